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

#include "privtier/evalkit.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>

#include "json.hpp"
#include "privtier/error.hpp"

namespace fs = std::filesystem;

namespace privtier {

using nlohmann::json;

std::string_view to_string(ConfigLabel label) {
  switch (label) {
    case ConfigLabel::kA:
      return "A";
    case ConfigLabel::kB:
      return "B";
    case ConfigLabel::kC:
      return "C";
  }
  return "?";
}

ConfigLabel config_from_string(std::string_view text) {
  if (text == "A") return ConfigLabel::kA;
  if (text == "B") return ConfigLabel::kB;
  if (text == "C") return ConfigLabel::kC;
  throw ConfigError(fmt::format("unknown evaluation config '{}'", text));
}

namespace {

/// Splits `text` into lines (LF, optional trailing CR stripped).
std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file", path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

PredictionSet load_predictions(std::string_view csv, std::string tier_name,
                               ConfigLabel config, std::span<const std::string> class_set) {
  PredictionSet set;
  set.tier_name = std::move(tier_name);
  set.config = config;
  const std::set<std::string, std::less<>> classes(class_set.begin(), class_set.end());

  const auto lines = lines_of(csv);
  if (lines.empty() || lines.front() != "video_id,label") {
    throw ParseError(fmt::format("{}: line 1: expected header 'video_id,label'", set.tier_name),
                     1);
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (lines[i].empty()) {
      if (i + 1 == lines.size()) break;
      throw ParseError(fmt::format("{}: line {}: empty line", set.tier_name, line_no), line_no);
    }
    const auto fields = split_commas(lines[i]);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw ParseError(
          fmt::format("{}: line {}: expected 'video_id,label'", set.tier_name, line_no),
          line_no);
    }
    if (!classes.contains(fields[1])) {
      throw ParseError(fmt::format("{}: line {}: unknown class '{}'", set.tier_name, line_no,
                                   fields[1]),
                       line_no);
    }
    if (!set.rows.emplace(std::string(fields[0]), std::string(fields[1])).second) {
      throw ParseError(fmt::format("{}: line {}: duplicate video_id '{}'", set.tier_name,
                                   line_no, fields[0]),
                       line_no);
    }
  }
  if (set.rows.empty()) {
    set.warnings.push_back(fmt::format("{}: prediction file has no rows", set.tier_name));
  }
  return set;
}

// ---------------------------------------------------------------------------

RoiSummary summarize(const RoiMetricAccumulator& acc) {
  RoiSummary s;
  s.roi_ssim = acc.mean_ssim();
  s.roi_psnr_db = acc.mean_psnr();
  s.frames_measured = acc.measured();
  s.frames_null = acc.null_frames();
  s.frames_too_small = acc.small_frames();
  s.psnr_infinite = acc.infinite_psnr();
  return s;
}

namespace {

json optional_number(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return "inf";
  return *v;
}

std::optional<double> read_optional_number(const json& v) {
  if (v.is_null()) return std::nullopt;
  if (v.is_string() && v.get<std::string>() == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  if (!v.is_number()) throw ParseError("expected a number, null or \"inf\"", 0);
  return v.get<double>();
}

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{}: {}", what, e.what()), e.byte);
  }
}

}  // namespace

std::string serialize_roi_summary(const RoiSummaryTable& table) {
  json doc = json::object();
  for (const auto& [tier, s] : table) {
    doc[tier] = {{"roi_ssim", optional_number(s.roi_ssim)},
                 {"roi_psnr_db", optional_number(s.roi_psnr_db)},
                 {"frames_measured", s.frames_measured},
                 {"frames_null", s.frames_null},
                 {"frames_too_small", s.frames_too_small},
                 {"psnr_infinite", s.psnr_infinite}};
  }
  return doc.dump(2) + "\n";
}

RoiSummaryTable parse_roi_summary(std::string_view document) {
  const json doc = parse_json(document, "ROI summary");
  if (!doc.is_object()) throw ParseError("ROI summary must be a JSON object", 0);
  RoiSummaryTable table;
  for (const auto& [tier, v] : doc.items()) {
    if (!v.is_object()) throw ParseError("ROI summary entry for " + tier + " is not an object", 0);
    RoiSummary s;
    s.roi_ssim = read_optional_number(v.value("roi_ssim", json(nullptr)));
    s.roi_psnr_db = read_optional_number(v.value("roi_psnr_db", json(nullptr)));
    s.frames_measured = v.value("frames_measured", std::size_t{0});
    s.frames_null = v.value("frames_null", std::size_t{0});
    s.frames_too_small = v.value("frames_too_small", std::size_t{0});
    s.psnr_infinite = v.value("psnr_infinite", std::size_t{0});
    table.emplace(tier, s);
  }
  return table;
}

FaceFlagTable parse_face_flags(std::string_view csv) {
  const auto lines = lines_of(csv);
  if (lines.empty() || lines.front() != "tier,sample_id,orig_detected,post_detected") {
    throw ParseError("face flags: line 1: expected header "
                     "'tier,sample_id,orig_detected,post_detected'",
                     1);
  }
  FaceFlagTable table;
  std::set<std::pair<std::string, std::string>> seen;
  const auto flag = [](std::string_view f, std::size_t line_no) {
    if (f == "1") return true;
    if (f == "0") return false;
    throw ParseError(fmt::format("face flags: line {}: flags must be 0 or 1", line_no), line_no);
  };
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (lines[i].empty()) continue;
    const auto f = split_commas(lines[i]);
    if (f.size() != 4 || f[0].empty() || f[1].empty()) {
      throw ParseError(fmt::format("face flags: line {}: expected 4 fields", line_no), line_no);
    }
    if (!seen.emplace(std::string(f[0]), std::string(f[1])).second) {
      throw ParseError(fmt::format("face flags: line {}: duplicate sample '{}'", line_no, f[1]),
                       line_no);
    }
    FaceFlags& flags = table[std::string(f[0])];
    flags.orig_detected.push_back(flag(f[2], line_no));
    flags.post_detected.push_back(flag(f[3], line_no));
  }
  return table;
}

// ---------------------------------------------------------------------------

MetricsReport evaluate(const PredictionSet& predictions, std::span<const ClipRecord> corpus,
                       const SplitAssignment& split, const RoiSummary* roi,
                       const FaceFlags* face_flags, const EvaluateOptions& options) {
  if (split.split == Split::kTrain && !options.allow_train_eval) {
    throw ConfigError("refusing to evaluate on the train split (use --allow-train-eval)");
  }
  if (split.video_ids.empty()) throw ConfigError("evaluation split lists no videos");
  std::map<std::string, const ClipRecord*> by_id;
  for (const ClipRecord& r : corpus) by_id.emplace(r.video_id, &r);

  std::map<std::string, std::string> labels;
  for (const std::string& id : split.video_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw ValidationError(fmt::format("split lists '{}' which is not in the corpus", id), id,
                            "video_id");
    }
    labels.emplace(id, it->second->class_label);
  }

  const AccuracyResult acc = top1_accuracy(predictions.rows, labels, options.class_set);

  MetricsReport report;
  report.tier_name = predictions.tier_name;
  report.config_label = predictions.config;
  report.top1 = acc.overall;
  report.per_class = acc.per_class;
  report.missing_predictions = acc.missing.size();

  const bool is_original = predictions.tier_name == "Original";
  if (roi) {
    report.roi_ssim = roi->roi_ssim;
    report.roi_psnr_db = roi->roi_psnr_db;
    report.frame_count = roi->frames_measured;
  }
  if (face_flags) {
    report.face_fail_rate = face_fail_rate(face_flags->orig_detected, face_flags->post_detected);
  }
  if (!is_original) {
    if (!options.original_accuracy_pct) {
      throw ConfigError(fmt::format(
          "tier {}: Original-tier accuracy is required for the accuracy drop and PU score",
          predictions.tier_name));
    }
    const double original = *options.original_accuracy_pct;
    report.acc_drop_pp = accuracy_drop(original, report.top1_pct());
    if (report.roi_ssim) report.pu_score = pu_score(report.top1_pct(), original, *report.roi_ssim);
  }
  return report;
}

int tier_order(std::string_view tier_name) {
  static const std::vector<std::string> kOrder = [] {
    // Figure order: Original, Blur, Edge, B16, B8, B4, then NoBG variants.
    return std::vector<std::string>{"Original",          "Tier1_Blur",        "Tier2_Edge",
                                    "Tier3_AES_B16",     "Tier3_AES_B8",      "Tier3_AES_B4",
                                    "Tier3_AES_B16_NoBG", "Tier3_AES_B8_NoBG", "Tier3_AES_B4_NoBG"};
  }();
  auto it = std::find(kOrder.begin(), kOrder.end(), tier_name);
  return it == kOrder.end() ? static_cast<int>(kOrder.size())
                            : static_cast<int>(it - kOrder.begin());
}

std::vector<MetricsReport> evaluate_predictions_dir(const EvalRunInputs& in) {
  if (!fs::is_directory(in.predictions_dir)) {
    throw IoError("predictions path is not a directory", in.predictions_dir.string());
  }
  struct Source {
    ConfigLabel config;
    std::string tier;
    fs::path path;
  };
  std::vector<Source> sources;
  auto scan = [&](const fs::path& dir, ConfigLabel config) {
    if (!fs::is_directory(dir)) return;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
      sources.push_back({config, entry.path().stem().string(), entry.path()});
    }
  };
  scan(in.predictions_dir, ConfigLabel::kA);
  scan(in.predictions_dir / "A", ConfigLabel::kA);
  scan(in.predictions_dir / "B", ConfigLabel::kB);
  scan(in.predictions_dir / "C", ConfigLabel::kC);
  std::sort(sources.begin(), sources.end(), [](const Source& a, const Source& b) {
    if (a.config != b.config) return a.config < b.config;
    if (tier_order(a.tier) != tier_order(b.tier)) return tier_order(a.tier) < tier_order(b.tier);
    return a.tier < b.tier;
  });
  for (std::size_t i = 1; i < sources.size(); ++i) {
    if (sources[i].config == sources[i - 1].config && sources[i].tier == sources[i - 1].tier) {
      throw ConfigError(fmt::format("two prediction files for tier {} config {}",
                                    sources[i].tier, to_string(sources[i].config)));
    }
  }
  if (sources.empty()) throw ConfigError("no prediction CSV files found");

  std::map<ConfigLabel, double> original_pct;
  std::vector<MetricsReport> reports;
  for (const Source& src : sources) {
    const PredictionSet set =
        load_predictions(read_text(src.path), src.tier, src.config, in.options.class_set);
    EvaluateOptions options = in.options;
    if (auto it = original_pct.find(src.config); it != original_pct.end()) {
      options.original_accuracy_pct = it->second;
    } else if (auto a = original_pct.find(ConfigLabel::kA); a != original_pct.end()) {
      options.original_accuracy_pct = a->second;
    }
    const auto roi = in.roi_summary.find(src.tier);
    const auto faces = in.face_flags.find(src.tier);
    MetricsReport report =
        evaluate(set, in.corpus, in.split, roi == in.roi_summary.end() ? nullptr : &roi->second,
                 faces == in.face_flags.end() ? nullptr : &faces->second, options);
    if (src.tier == "Original") original_pct[src.config] = report.top1_pct();
    reports.push_back(std::move(report));
  }
  return reports;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kConfigNotice =
    "Config labels (A within-tier, B trained on Original, C trained and evaluated on "
    "Tier3_AES_B8_NoBG) are declared by the submitter; the toolkit cannot verify what data "
    "a model was trained on.";

constexpr std::string_view kNoBgNote =
    "combines block scrambling with background removal; not a point on the same privacy "
    "scale";

std::string note_for(std::string_view tier) {
  return tier.ends_with("_NoBG") ? std::string(kNoBgNote) : std::string();
}

json ratio_json(const Ratio& r) { return {{"correct", r.numerator}, {"total", r.denominator}}; }

json rounded(const std::optional<double>& v, int decimals) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return "inf";
  return round_to(*v, decimals);
}

std::string fixed(double v, int decimals) {
  if (std::isinf(v)) return "inf";
  return fmt::format("{:.{}f}", round_to(v, decimals), decimals);
}

std::vector<const MetricsReport*> ordered(std::span<const MetricsReport> reports) {
  std::vector<const MetricsReport*> out;
  for (const auto& r : reports) out.push_back(&r);
  std::stable_sort(out.begin(), out.end(), [](const MetricsReport* a, const MetricsReport* b) {
    if (a->config_label != b->config_label) return a->config_label < b->config_label;
    const int oa = tier_order(a->tier_name);
    const int ob = tier_order(b->tier_name);
    if (oa != ob) return oa < ob;
    return a->tier_name < b->tier_name;
  });
  return out;
}

}  // namespace

ReportBundle emit_report(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw DomainError("emit_report needs at least one tier report");
  const auto rows = ordered(reports);

  json tiers = json::array();
  for (const MetricsReport* r : rows) {
    json per_class = json::object();
    for (const auto& [name, ratio] : r->per_class) {
      per_class[name] = ratio ? json(round_to(100.0 * ratio->value(), 1)) : json(nullptr);
    }
    json face = nullptr;
    if (r->face_fail_rate) face = round_to(100.0 * r->face_fail_rate->value(), 1);
    json entry = {{"tier", r->tier_name},
                  {"config", std::string(to_string(r->config_label))},
                  {"top1_pct", round_to(r->top1_pct(), 1)},
                  {"top1", ratio_json(r->top1)},
                  {"per_class_pct", per_class},
                  {"acc_drop_pp", rounded(r->acc_drop_pp, 1)},
                  {"roi_ssim", rounded(r->roi_ssim, 3)},
                  {"roi_psnr_db", rounded(r->roi_psnr_db, 2)},
                  {"face_fail_pct", face},
                  {"pu_score", rounded(r->pu_score, 3)},
                  {"frame_count", r->frame_count},
                  {"missing_predictions", r->missing_predictions}};
    if (const std::string note = note_for(r->tier_name); !note.empty()) entry["note"] = note;
    tiers.push_back(std::move(entry));
  }
  json doc = {{"notice", std::string(kConfigNotice)}, {"tiers", std::move(tiers)}};

  ReportBundle bundle;
  bundle.document = doc.dump(2) + "\n";
  bundle.accuracy_by_tier_csv = "tier,config,accuracy_pct,note\n";
  bundle.privacy_utility_csv = "tier,config,privacy,accuracy_pct,pu_score,note\n";
  for (const MetricsReport* r : rows) {
    const std::string note = note_for(r->tier_name);
    bundle.accuracy_by_tier_csv += fmt::format("{},{},{},{}\n", r->tier_name,
                                               to_string(r->config_label),
                                               fixed(r->top1_pct(), 1), note);
    if (r->roi_ssim) {
      bundle.privacy_utility_csv += fmt::format(
          "{},{},{},{},{},{}\n", r->tier_name, to_string(r->config_label),
          fixed(1.0 - *r->roi_ssim, 3), fixed(r->top1_pct(), 1),
          r->pu_score ? fixed(*r->pu_score, 3) : std::string(), note);
    }
  }
  return bundle;
}

std::vector<MetricsReport> parse_report(std::string_view document) {
  const json doc = parse_json(document, "report");
  if (!doc.is_object() || !doc.contains("tiers") || !doc["tiers"].is_array()) {
    throw ParseError("report document needs a 'tiers' array", 0);
  }
  std::vector<MetricsReport> out;
  for (const json& t : doc["tiers"]) {
    MetricsReport r;
    try {
      r.tier_name = t.at("tier").get<std::string>();
      r.config_label = config_from_string(t.at("config").get<std::string>());
      r.top1 = Ratio{t.at("top1").at("correct").get<std::uint64_t>(),
                     t.at("top1").at("total").get<std::uint64_t>()};
      for (const auto& [name, v] : t.at("per_class_pct").items()) {
        r.per_class[name] = std::nullopt;
        if (!v.is_null()) {
          // Stored as a percentage; keep it as a ratio over 1000 for plotting.
          r.per_class[name] = Ratio{static_cast<std::uint64_t>(std::llround(v.get<double>() * 10)),
                                    1000};
        }
      }
      r.acc_drop_pp = read_optional_number(t.at("acc_drop_pp"));
      r.roi_ssim = read_optional_number(t.at("roi_ssim"));
      r.roi_psnr_db = read_optional_number(t.at("roi_psnr_db"));
      r.pu_score = read_optional_number(t.at("pu_score"));
      if (const auto face = read_optional_number(t.at("face_fail_pct"))) {
        r.face_fail_rate = Ratio{static_cast<std::uint64_t>(std::llround(*face * 10)), 1000};
      }
      r.frame_count = t.at("frame_count").get<std::size_t>();
      r.missing_predictions = t.at("missing_predictions").get<std::size_t>();
    } catch (const json::exception& e) {
      throw ParseError(fmt::format("report tier entry: {}", e.what()), 0);
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace privtier
