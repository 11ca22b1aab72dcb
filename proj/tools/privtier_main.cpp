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

// privtier: generate privacy tiers for annotated frame sequences and
// evaluate per-tier predictions.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "CLI11.hpp"
#include "privtier/corpus.hpp"
#include "privtier/digest.hpp"
#include "privtier/error.hpp"
#include "privtier/evalkit.hpp"
#include "privtier/manifest.hpp"
#include "privtier/permute.hpp"
#include "privtier/pipeline.hpp"

namespace fs = std::filesystem;
using namespace privtier;

namespace {

constexpr int kExitFindings = 1;
constexpr int kExitFatal = 2;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file", path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing", path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::vector<std::string> read_class_file(const fs::path& path) {
  std::vector<std::string> classes;
  std::istringstream in(read_file(path));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) classes.push_back(line);
  }
  if (classes.empty()) throw ConfigError("class list file is empty: " + path.string());
  return classes;
}

struct KeyOptions {
  std::string hex;
  std::string file;
};

std::optional<KeyMaterial> resolve_key(const KeyOptions& opts) {
  if (!opts.hex.empty()) return KeyMaterial::from_hex(opts.hex, KeyOrigin::kCliFlag);
  if (!opts.file.empty()) return KeyMaterial::from_file(opts.file);
  if (const char* env = std::getenv("PRIVTIER_KEY_HEX"); env != nullptr && *env != '\0') {
    return KeyMaterial::from_hex(env, KeyOrigin::kEnvVar);
  }
  return std::nullopt;
}

// --- transform ---------------------------------------------------------------

struct TransformOptions {
  std::string input;
  std::string output;
  KeyOptions key;
  std::vector<std::string> tiers = {"original", "blur", "edge", "scramble", "nobg"};
  std::vector<int> block_sizes = {4, 8, 16};
  double sigma = kDefaultBlurSigma;
  double canny_low = kDefaultCannyLow;
  double canny_high = kDefaultCannyHigh;
  unsigned workers = 1;
  bool fallback = false;
  bool resume = false;
  int metric_frames = 4;
  std::string classes;
};

std::vector<TierSpec> build_tiers(const TransformOptions& o) {
  std::vector<TierSpec> out;
  auto wants = [&](std::string_view t) {
    return std::find(o.tiers.begin(), o.tiers.end(), t) != o.tiers.end();
  };
  for (const auto& t : o.tiers) {
    if (t != "original" && t != "blur" && t != "edge" && t != "scramble" && t != "nobg") {
      throw ConfigError("unknown --tiers entry '" + t + "'");
    }
  }
  if (wants("original")) out.push_back(TierSpec::original());
  if (wants("blur")) out.push_back(TierSpec::blur(o.sigma));
  if (wants("edge")) out.push_back(TierSpec::edge(o.canny_low, o.canny_high));
  if (wants("scramble")) {
    for (int b : o.block_sizes) out.push_back(TierSpec::scramble(b));
  }
  if (wants("nobg")) {
    for (int b : o.block_sizes) out.push_back(TierSpec::scramble(b, true));
  }
  return out;
}

int run_transform(const TransformOptions& o) {
  PipelineConfig config;
  config.input_root = o.input;
  config.output_root = o.output;
  config.tiers = build_tiers(o);
  config.key = resolve_key(o.key);
  if (!config.key) {
    spdlog::critical("no key: pass --key-hex, --key-file or set PRIVTIER_KEY_HEX");
    return kExitFatal;
  }
  if (!o.classes.empty()) config.class_list = read_class_file(o.classes);
  config.workers = o.workers;
  config.resume = o.resume;
  config.metric_frames_per_clip = o.metric_frames;
  config.generator =
      o.fallback ? PermutationGenerator::kCsprngFallback : PermutationGenerator::kAesCtr;
  if (o.fallback) {
    spdlog::warn("--fallback-csprng: output is NON-CANONICAL and differs from the AES-CTR path; "
                 "it must not be used to regenerate the dataset");
  }
  spdlog::info("key fingerprint {}", config.key->fingerprint());

  const RunSummary summary = run_pipeline(config);
  for (const auto& w : summary.warnings) spdlog::warn("{}", w);
  for (const auto& f : summary.failures) spdlog::error("clip {} failed: {}", f.video_id, f.message);
  spdlog::info("clips={} frames={} tiers={} padded_clips={} null_annotation_frames={} "
               "written={} unchanged={} failed={}",
               summary.clips, summary.frames, summary.tiers, summary.padded_clips,
               summary.null_annotation_frames, summary.files_written, summary.files_unchanged,
               summary.failures.size());
  return summary.ok() ? 0 : kExitFindings;
}

// --- split -------------------------------------------------------------------

int run_split(const std::string& annotations, const std::string& out_dir,
              const std::string& classes, bool check_only) {
  CorpusOptions options = default_corpus_options();
  if (!classes.empty()) options.class_list = read_class_file(classes);
  const auto records = parse_annotations(read_file(annotations), options);
  const SplitPair splits = make_splits(records);
  const fs::path dir = out_dir.empty() ? fs::path(annotations).parent_path() : fs::path(out_dir);

  SplitPair checked = splits;
  if (check_only) {
    checked.train = parse_split_file(read_file(dir / "train_split.txt"), Split::kTrain);
    checked.test = parse_split_file(read_file(dir / "test_split.txt"), Split::kTest);
  } else {
    write_file(dir / "train_split.txt", serialize_split_file(splits.train));
    write_file(dir / "test_split.txt", serialize_split_file(splits.test));
  }
  auto problems = check_split_integrity(records, checked);
  if (check_only && checked.train.video_ids != splits.train.video_ids) {
    problems.push_back("train_split.txt differs from the group rule");
  }
  if (check_only && checked.test.video_ids != splits.test.video_ids) {
    problems.push_back("test_split.txt differs from the group rule");
  }
  for (const auto& p : problems) spdlog::error("{}", p);
  std::cout << "train " << checked.train.video_ids.size() << "\n"
            << "test " << checked.test.video_ids.size() << "\n";
  return problems.empty() ? 0 : kExitFindings;
}

// --- manifest / verify -------------------------------------------------------

int run_manifest(const std::string& root, const std::string& out, unsigned workers) {
  ManifestOptions options;
  options.excluded = {kManifestFile};
  options.workers = workers;
  const Manifest manifest = build_manifest(root, options);
  const fs::path target = out.empty() ? fs::path(root) / kManifestFile : fs::path(out);
  write_file(target, serialize_manifest(manifest));
  std::cout << manifest.entries.size() << " files -> " << target.string() << "\n";
  return 0;
}

int run_verify(const std::string& root, bool manifest_only) {
  if (manifest_only) {
    ManifestOptions options;
    options.excluded = {kManifestFile};
    const Manifest manifest = parse_manifest(read_file(fs::path(root) / kManifestFile));
    const ManifestReport r = verify_manifest(root, manifest, options);
    for (const auto& p : r.mismatched) std::cout << "MISMATCH " << p << "\n";
    for (const auto& p : r.missing) std::cout << "MISSING  " << p << "\n";
    for (const auto& p : r.extra) std::cout << "EXTRA    " << p << "\n";
    for (const auto& [p, m] : r.errors) std::cout << "ERROR    " << p << ": " << m << "\n";
    std::cout << r.matched.size() << " matched, " << r.mismatched.size() << " mismatched, "
              << r.missing.size() << " missing, " << r.extra.size() << " extra\n";
    return r.clean() ? 0 : kExitFindings;
  }
  const RunVerification v = verify_run(root);
  for (const auto& f : v.findings) {
    std::cout << f.kind << " " << f.path << ": " << f.detail << "\n";
  }
  for (const auto& p : v.manifest.extra) std::cout << "extra-file " << p << "\n";
  std::cout << v.manifest.matched.size() << " files verified, " << v.findings.size()
            << " finding(s)\n";
  return v.clean() ? 0 : kExitFindings;
}

// --- eval / plot -------------------------------------------------------------

struct EvalOptions {
  std::string predictions;
  std::string annotations;
  std::string split;
  std::string split_name;
  std::string ssim_summary;
  std::string face_flags;
  std::string out = "report.json";
  std::string classes;
  bool allow_train_eval = false;
};

void write_plot_tables(const ReportBundle& bundle, const fs::path& report_path,
                       const fs::path& dir) {
  const std::string stem = report_path.stem().string();
  write_file(dir / (stem + "_accuracy_by_tier.csv"), bundle.accuracy_by_tier_csv);
  write_file(dir / (stem + "_privacy_utility.csv"), bundle.privacy_utility_csv);
}

int run_eval(const EvalOptions& o) {
  EvalRunInputs in;
  in.predictions_dir = o.predictions;
  if (!o.classes.empty()) in.options.class_set = read_class_file(o.classes);
  CorpusOptions corpus_options;
  corpus_options.class_list = in.options.class_set;
  in.corpus = parse_annotations(read_file(o.annotations), corpus_options);
  Split split = Split::kTest;
  if (!o.split_name.empty()) {
    split = split_from_string(o.split_name);
  } else if (fs::path(o.split).filename().string().find("train") != std::string::npos) {
    split = Split::kTrain;
  }
  in.split = parse_split_file(read_file(o.split), split);
  if (!o.ssim_summary.empty()) in.roi_summary = parse_roi_summary(read_file(o.ssim_summary));
  if (!o.face_flags.empty()) in.face_flags = parse_face_flags(read_file(o.face_flags));
  in.options.allow_train_eval = o.allow_train_eval;

  const auto reports = evaluate_predictions_dir(in);
  for (const auto& r : reports) {
    if (r.missing_predictions > 0) {
      spdlog::warn("{} (config {}): {} test videos without a prediction, counted as wrong",
                   r.tier_name, to_string(r.config_label), r.missing_predictions);
    }
  }
  const ReportBundle bundle = emit_report(reports);
  const fs::path out(o.out);
  write_file(out, bundle.document);
  write_plot_tables(bundle, out, out.has_parent_path() ? out.parent_path() : fs::path("."));
  std::cout << bundle.accuracy_by_tier_csv;
  return 0;
}

int run_plot(const std::string& report, const std::string& out_dir) {
  const auto reports = parse_report(read_file(report));
  const ReportBundle bundle = emit_report(reports);
  const fs::path dir = out_dir.empty() ? fs::path(report).parent_path() : fs::path(out_dir);
  write_plot_tables(bundle, report, dir.empty() ? fs::path(".") : dir);
  std::cout << bundle.privacy_utility_csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("privtier"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"privtier: privacy-tier generation and evaluation toolkit"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  TransformOptions transform;
  auto* t = app.add_subcommand("transform", "generate all privacy tiers for a corpus");
  t->add_option("--input", transform.input, "input root (annotations.json + frames/)")->required();
  t->add_option("--output", transform.output, "output root")->required();
  auto* key_hex = t->add_option("--key-hex", transform.key.hex, "AES-128 key, 32 hex chars");
  t->add_option("--key-file", transform.key.file, "file holding the key")->excludes(key_hex);
  t->add_option("--tiers", transform.tiers, "subset of original,blur,edge,scramble,nobg")
      ->delimiter(',');
  t->add_option("--block-sizes", transform.block_sizes, "scramble block sizes")
      ->delimiter(',')
      ->check(CLI::Range(2, 224));
  t->add_option("--sigma", transform.sigma, "blur sigma")->check(CLI::PositiveNumber);
  t->add_option("--canny-low", transform.canny_low, "Canny low threshold");
  t->add_option("--canny-high", transform.canny_high, "Canny high threshold");
  t->add_option("--workers", transform.workers, "clip-level worker threads")
      ->check(CLI::Range(1u, 1024u));
  t->add_flag("--fallback-csprng", transform.fallback,
              "use the non-canonical SHA-256 hash-chain permutation");
  t->add_flag("--resume", transform.resume, "continue into a non-empty output root");
  t->add_option("--metric-frames", transform.metric_frames,
                "frames per clip sampled for ROI-SSIM/PSNR")
      ->check(CLI::Range(0, 32));
  t->add_option("--classes", transform.classes, "class list file, one name per line");

  std::string split_annotations, split_out, split_classes;
  bool split_check = false;
  auto* s = app.add_subcommand("split", "write or check the fixed group-based split files");
  s->add_option("--annotations", split_annotations, "annotations.json")->required();
  s->add_option("--out", split_out, "directory for train_split.txt/test_split.txt");
  s->add_option("--classes", split_classes, "class list file");
  s->add_flag("--check", split_check, "verify existing split files instead of writing");

  std::string manifest_root, manifest_out;
  unsigned manifest_workers = 1;
  auto* m = app.add_subcommand("manifest", "write manifest.json (SHA-256 per file)");
  m->add_option("--root", manifest_root, "directory to hash")->required();
  m->add_option("--out", manifest_out, "output path (default <root>/manifest.json)");
  m->add_option("--workers", manifest_workers, "hashing threads")->check(CLI::Range(1u, 1024u));

  std::string verify_root;
  bool verify_manifest_only = false;
  auto* v = app.add_subcommand("verify", "verify a generated tree against its manifest");
  v->add_option("--root", verify_root, "output root")->required();
  v->add_flag("--manifest-only", verify_manifest_only, "skip structural checks");

  EvalOptions eval;
  auto* e = app.add_subcommand("eval", "compute the per-tier metrics report");
  e->add_option("--predictions", eval.predictions, "directory of <Tier>.csv files")->required();
  e->add_option("--annotations", eval.annotations, "annotations.json")->required();
  e->add_option("--split", eval.split, "split file (test_split.txt)")->required();
  e->add_option("--split-name", eval.split_name, "override split inferred from file name")
      ->check(CLI::IsMember({"train", "test"}));
  e->add_option("--ssim-summary", eval.ssim_summary, "roi_metrics.json from transform");
  e->add_option("--face-flags", eval.face_flags, "face detection flags CSV");
  e->add_option("--out", eval.out, "report path");
  e->add_option("--classes", eval.classes, "class list file");
  e->add_flag("--allow-train-eval", eval.allow_train_eval, "permit evaluating on train split");

  std::string plot_report, plot_out;
  auto* p = app.add_subcommand("plot", "re-emit plot tables from a report document");
  p->add_option("--report", plot_report, "report.json")->required();
  p->add_option("--out-dir", plot_out, "directory for the CSV tables");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*t) return run_transform(transform);
    if (*s) return run_split(split_annotations, split_out, split_classes, split_check);
    if (*m) return run_manifest(manifest_root, manifest_out, manifest_workers);
    if (*v) return run_verify(verify_root, verify_manifest_only);
    if (*e) return run_eval(eval);
    if (*p) return run_plot(plot_report, plot_out);
  } catch (const ValidationError& ex) {
    spdlog::critical("validation error: {}", ex.what());
  } catch (const ParseError& ex) {
    spdlog::critical("parse error at {}: {}", ex.offset(), ex.what());
  } catch (const IoError& ex) {
    spdlog::critical("{}: {}", ex.path(), ex.what());
  } catch (const std::exception& ex) {
    spdlog::critical("{}", ex.what());
  }
  return kExitFatal;
}
