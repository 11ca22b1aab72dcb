// Copyright 2026 The PrivTier Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "privtier/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <thread>

#include "json.hpp"
#include "privtier/digest.hpp"
#include "privtier/error.hpp"
#include "privtier/evalkit.hpp"
#include "privtier/metrics.hpp"
#include "privtier/png_io.hpp"

namespace fs = std::filesystem;

namespace privtier {

#ifndef PRIVTIER_VERSION
#define PRIVTIER_VERSION "0.0.0"
#endif

std::string_view tool_version() { return PRIVTIER_VERSION; }

std::string frame_filename(std::size_t index) {
  return fmt::format("frame_{:05d}.png", index);
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file", path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes through a temporary sibling and renames into place.
void write_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory: " + ec.message(), path.parent_path().string());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing", tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed", tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + ec.message(), path.string());
}

std::span<const std::uint8_t> as_bytes(std::string_view text) {
  return {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()};
}

/// Output writer honouring --resume: a file whose on-disk bytes already
/// match both the previous manifest and the new content is left alone.
class OutputWriter {
 public:
  OutputWriter(fs::path root, const Manifest* previous)
      : root_(std::move(root)), previous_(previous) {}

  void write(const std::string& relative, std::span<const std::uint8_t> bytes) {
    const fs::path path = root_ / relative;
    if (previous_ != nullptr) {
      auto it = previous_->entries.find(relative);
      std::error_code ec;
      if (it != previous_->entries.end() && fs::is_regular_file(path, ec) &&
          to_hex(sha256(bytes)) == it->second) {
        try {
          if (to_hex(sha256_file(path)) == it->second) {
            ++unchanged_;
            return;
          }
        } catch (const IoError&) {
          // Unreadable: fall through and rewrite.
        }
      }
    }
    write_atomic(path, bytes);
    ++written_;
  }

  std::size_t written() const { return written_; }
  std::size_t unchanged() const { return unchanged_; }

 private:
  fs::path root_;
  const Manifest* previous_;
  std::size_t written_ = 0;
  std::size_t unchanged_ = 0;
};

struct ClipResult {
  std::optional<ClipRecord> record;
  std::optional<ClipFailure> failure;
  std::map<std::string, RoiMetricAccumulator> metrics;
  std::vector<std::string> warnings;
  std::size_t written = 0;
  std::size_t unchanged = 0;
  std::size_t null_frames = 0;
};

std::vector<fs::path> list_source_frames(const fs::path& dir) {
  std::vector<fs::path> frames;
  std::error_code ec;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    if (it->is_regular_file() && it->path().extension() == ".png") frames.push_back(it->path());
  }
  if (ec) throw IoError("cannot list frame directory: " + ec.message(), dir.string());
  std::sort(frames.begin(), frames.end());
  return frames;
}

std::vector<std::size_t> metric_frame_indices(int per_clip) {
  std::vector<std::size_t> out;
  if (per_clip <= 0) return out;
  const int n = std::min(per_clip, kClipFrames);
  for (int k = 0; k < n; ++k) out.push_back(static_cast<std::size_t>(k * kClipFrames / n));
  return out;
}

ClipResult process_clip(const ClipRecord& input, const PipelineConfig& config,
                        const Manifest* previous) {
  ClipResult result;
  try {
    if (!input.annotations) {
      throw ConfigError("record carries no per-frame annotations");
    }
    const auto sources = list_source_frames(config.input_root / "frames" / input.video_id);
    if (sources.empty()) throw IoError("no source frames", input.video_id);
    if (static_cast<int>(sources.size()) != input.total_frames) {
      result.warnings.push_back(fmt::format("{}: total_frames is {} but {} frames were found",
                                            input.video_id, input.total_frames, sources.size()));
    }
    const WindowPlan plan = center_window(sources.size(), kClipFrames);

    std::map<std::size_t, Frame> decoded;
    std::vector<Frame> frames;
    frames.reserve(plan.indices.size());
    for (std::size_t i : plan.indices) {
      auto it = decoded.find(i);
      if (it == decoded.end()) {
        it = decoded.emplace(i, resize_frame(read_png(sources[i]), kOutputSize, kOutputSize)).first;
      }
      frames.push_back(it->second);
    }

    ClipRecord record = input;
    record.padded = plan.padded;
    record.detection_rate = detection_rate(*record.annotations).value();
    record.roi_bbox_mean = mean_bbox(*record.annotations);
    const FrameAnnotations& annotations = *record.annotations;
    result.null_frames = static_cast<std::size_t>(
        std::count(annotations.begin(), annotations.end(), std::nullopt));

    OutputWriter writer(config.output_root, previous);
    const auto sampled = metric_frame_indices(config.metric_frames_per_clip);
    TransformNotes notes;
    for (const TierSpec& tier : config.tiers) {
      const std::string name = tier.name();
      RoiMetricAccumulator& acc = result.metrics[name];
      for (std::size_t f = 0; f < frames.size(); ++f) {
        const ScrambleContext context{&*config.key, record.video_id, f, config.generator};
        Frame out;
        try {
          out = apply_tier(tier, frames[f], annotations[f], context, &notes);
        } catch (const Error& e) {
          throw Error(fmt::format("frame {}: tier {}: {}", f, name, e.what()));
        }
        writer.write(fmt::format("{}/{}/{}", name, record.video_id, frame_filename(f)),
                     encode_png(out));
        if (std::find(sampled.begin(), sampled.end(), f) == sampled.end()) continue;
        if (!annotations[f]) {
          acc.skip_null();
          continue;
        }
        try {
          const BBox& box = annotations[f]->bbox;
          acc.add(roi_ssim(frames[f], out, box), roi_psnr(frames[f], out, box));
        } catch (const MetricUndefined&) {
          acc.skip_too_small();
        }
      }
    }
    for (auto& w : notes.warnings) result.warnings.push_back(record.video_id + ": " + w);
    result.written = writer.written();
    result.unchanged = writer.unchanged();
    result.record = std::move(record);
  } catch (const std::exception& e) {
    result.failure = ClipFailure{input.video_id, e.what()};
    result.metrics.clear();
  }
  return result;
}

void copy_tree(const fs::path& from, const std::string& prefix, OutputWriter& writer) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(from)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    const std::string relative =
        prefix + "/" + normalize_relative_path(file.lexically_relative(from));
    writer.write(relative, as_bytes(read_file(file)));
  }
}

std::string run_metadata(const PipelineConfig& config, const RunSummary& summary) {
  using nlohmann::json;
  const bool canonical = config.generator == PermutationGenerator::kAesCtr;
  json tiers = json::array();
  for (const TierSpec& t : config.tiers) {
    json entry = {{"name", t.name()}};
    switch (t.kind) {
      case TierKind::kOriginal:
        break;
      case TierKind::kBlur:
        entry["sigma"] = t.sigma;
        entry["kernel_radius"] = static_cast<int>(std::ceil(3.0 * t.sigma));
        break;
      case TierKind::kEdge:
        entry["canny_low"] = t.canny_low;
        entry["canny_high"] = t.canny_high;
        break;
      case TierKind::kScramble:
        entry["block_size"] = t.block_size;
        entry["nobg"] = t.nobg;
        break;
    }
    tiers.push_back(std::move(entry));
  }
  json doc = {
      {"tool", "privtier"},
      {"version", std::string(tool_version())},
      {"permutation_generator", std::string(to_string(config.generator))},
      {"non_canonical", !canonical},
      {"key_fingerprint_sha256", config.key->fingerprint()},
      {"tiers", std::move(tiers)},
      {"class_list", config.class_list},
      {"clip_frames", kClipFrames},
      {"frame_size", {kOutputSize, kOutputSize}},
      {"frame_filename_pattern", "frame_%05d.png"},
      {"nonce_preimage", "sha256(video_id|frame_index|block_size)[0:8]"},
      {"ctr_block_layout", "nonce(8) || uint64_be(counter from 0)"},
      {"scramble_grid",
       "largest BxB-aligned grid anchored at the bbox top-left; right and bottom strips "
       "narrower than B are left untransformed"},
      {"determinism",
       "every output byte is a pure function of the source frames, annotations, key and "
       "tier parameters; no random seeds are involved and worker count does not matter"},
      {"roi_metric_frames_per_clip", config.metric_frames_per_clip},
      {"summary",
       {{"clips", summary.clips},
        {"frames_per_clip", kClipFrames},
        {"padded_clips", summary.padded_clips},
        {"null_annotation_frames", summary.null_annotation_frames},
        {"failed_clips", summary.failures.size()}}}};
  if (!canonical) {
    doc["notice"] =
        "generated with the SHA-256 hash-chain fallback permutation; output differs from the "
        "canonical AES-CTR path and is not suitable for dataset regeneration";
  }
  return doc.dump(2) + "\n";
}

}  // namespace

RunSummary run_pipeline(const PipelineConfig& config) {
  if (!config.key) throw ConfigError("no AES key supplied");
  if (config.tiers.empty()) throw ConfigError("no tiers selected");
  std::set<std::string> names;
  for (const TierSpec& t : config.tiers) {
    t.validate();
    if (!names.insert(t.name()).second) throw ConfigError("tier listed twice: " + t.name());
  }
  if (config.workers == 0) throw ConfigError("workers must be positive");

  CorpusOptions options;
  options.class_list = config.class_list;
  const std::vector<ClipRecord> records =
      parse_annotations(read_file(config.input_root / "annotations.json"), options);

  std::optional<Manifest> previous;
  std::error_code ec;
  if (fs::exists(config.output_root, ec) && !fs::is_empty(config.output_root, ec)) {
    if (!config.resume) {
      throw ConfigError("output root is not empty (use --resume to continue a run)");
    }
    const fs::path manifest_path = config.output_root / kManifestFile;
    if (fs::exists(manifest_path)) previous = parse_manifest(read_file(manifest_path));
  }
  fs::create_directories(config.output_root);
  const Manifest* prev = previous ? &*previous : nullptr;

  std::vector<ClipResult> results(records.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      results[i] = process_clip(records[i], config, prev);
    }
  };
  {
    const unsigned n = std::max(1u, std::min<unsigned>(config.workers,
                                                       static_cast<unsigned>(records.size())));
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < n; ++w) pool.emplace_back(work);
    work();
  }

  RunSummary summary;
  summary.tiers = config.tiers.size();
  std::vector<ClipRecord> done;
  std::map<std::string, RoiMetricAccumulator> metrics;
  for (const TierSpec& t : config.tiers) metrics[t.name()];
  for (ClipResult& r : results) {
    for (auto& w : r.warnings) summary.warnings.push_back(std::move(w));
    if (r.failure) {
      summary.failures.push_back(*r.failure);
      continue;
    }
    ++summary.clips;
    summary.frames += static_cast<std::size_t>(kClipFrames);
    summary.padded_clips += r.record->padded ? 1 : 0;
    summary.null_annotation_frames += r.null_frames;
    summary.files_written += r.written;
    summary.files_unchanged += r.unchanged;
    for (const auto& [tier, acc] : r.metrics) metrics[tier].merge(acc);
    done.push_back(std::move(*r.record));
  }

  OutputWriter writer(config.output_root, prev);
  writer.write("annotations.json", as_bytes(serialize_annotations(done)));
  const SplitPair splits = make_splits(done);
  writer.write("train_split.txt", as_bytes(serialize_split_file(splits.train)));
  writer.write("test_split.txt", as_bytes(serialize_split_file(splits.test)));
  RoiSummaryTable roi_table;
  for (const auto& [tier, acc] : metrics) roi_table.emplace(tier, summarize(acc));
  writer.write(kRoiMetricsFile, as_bytes(serialize_roi_summary(roi_table)));
  writer.write(kRunMetadataFile, as_bytes(run_metadata(config, summary)));
  if (fs::is_regular_file(config.input_root / "CHANGELOG.md")) {
    writer.write("CHANGELOG.md", as_bytes(read_file(config.input_root / "CHANGELOG.md")));
  }
  if (fs::is_directory(config.input_root / "Estimated_Poses")) {
    copy_tree(config.input_root / "Estimated_Poses", "Estimated_Poses", writer);
  }
  summary.files_written += writer.written();
  summary.files_unchanged += writer.unchanged();

  // Drop leftovers of an interrupted write before hashing.
  std::vector<fs::path> stale;
  for (const auto& entry : fs::recursive_directory_iterator(config.output_root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".tmp") stale.push_back(entry.path());
  }
  for (const auto& p : stale) fs::remove(p);
  ManifestOptions manifest_options;
  manifest_options.excluded = {kManifestFile};
  manifest_options.workers = config.workers;
  const Manifest manifest = build_manifest(config.output_root, manifest_options);
  write_atomic(config.output_root / kManifestFile, as_bytes(serialize_manifest(manifest)));
  return summary;
}

// ---------------------------------------------------------------------------

RunVerification verify_run(const fs::path& output_root) {
  RunVerification v;
  const auto add = [&](std::string kind, std::string path, std::string detail) {
    v.findings.push_back({std::move(kind), std::move(path), std::move(detail)});
  };

  Manifest manifest;
  try {
    manifest = parse_manifest(read_file(output_root / kManifestFile));
  } catch (const Error& e) {
    add("missing-metadata", kManifestFile, e.what());
    return v;
  }
  ManifestOptions options;
  options.excluded = {kManifestFile};
  v.manifest = verify_manifest(output_root, manifest, options);
  for (const auto& p : v.manifest.missing) add("missing-file", p, "listed in manifest, not on disk");
  for (const auto& p : v.manifest.mismatched) add("digest-mismatch", p, "content changed");
  for (const auto& [p, msg] : v.manifest.errors) add("io-error", p, msg);

  std::vector<std::string> tiers;
  std::vector<std::string> class_list;
  try {
    const auto meta = nlohmann::json::parse(read_file(output_root / kRunMetadataFile));
    for (const auto& t : meta.at("tiers")) tiers.push_back(t.at("name").get<std::string>());
    class_list = meta.at("class_list").get<std::vector<std::string>>();
  } catch (const std::exception& e) {
    add("missing-metadata", kRunMetadataFile, e.what());
    return v;
  }
  std::vector<ClipRecord> records;
  try {
    CorpusOptions corpus_options;
    corpus_options.class_list = class_list;
    records = parse_annotations(read_file(output_root / "annotations.json"), corpus_options);
  } catch (const std::exception& e) {
    add("missing-metadata", "annotations.json", e.what());
    return v;
  }

  for (const ClipRecord& r : records) {
    for (const std::string& tier : tiers) {
      const fs::path dir = output_root / tier / r.video_id;
      const std::string rel_dir = tier + "/" + r.video_id;
      if (!fs::is_directory(dir)) {
        add("missing-tier", rel_dir, "tier directory absent");
        continue;
      }
      std::size_t present = 0;
      for (std::size_t f = 0; f < static_cast<std::size_t>(kClipFrames); ++f) {
        const fs::path file = dir / frame_filename(f);
        if (!fs::exists(file)) continue;
        ++present;
        try {
          const Frame frame = read_png(file);
          if (frame.width != kOutputSize || frame.height != kOutputSize) {
            add("bad-dimensions", rel_dir + "/" + frame_filename(f),
                fmt::format("{}x{}", frame.width, frame.height));
          }
        } catch (const Error& e) {
          add("decode-failure", rel_dir + "/" + frame_filename(f), e.what());
        }
      }
      if (present != static_cast<std::size_t>(kClipFrames)) {
        add("short-clip", rel_dir, fmt::format("{} of {} frames", present, kClipFrames));
      }
    }
  }
  return v;
}

}  // namespace privtier
