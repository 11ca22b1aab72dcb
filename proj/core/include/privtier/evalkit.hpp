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

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "privtier/corpus.hpp"
#include "privtier/metrics.hpp"

namespace privtier {

/// Evaluation regimes: A within-tier, B trained on Original, C trained and
/// evaluated on B8-NoBG. Declared by the submitter, never verified.
enum class ConfigLabel { kA, kB, kC };

std::string_view to_string(ConfigLabel label);
ConfigLabel config_from_string(std::string_view text);

struct PredictionSet {
  std::string tier_name;
  ConfigLabel config = ConfigLabel::kA;
  std::map<std::string, std::string> rows;
  std::vector<std::string> warnings;
};

/// CSV with header "video_id,label". Throws ParseError carrying the 1-based
/// line number for malformed lines, duplicates and unknown classes.
PredictionSet load_predictions(std::string_view csv, std::string tier_name,
                               ConfigLabel config,
                               std::span<const std::string> class_set);

/// Per-tier ROI metric summary produced by the pipeline.
struct RoiSummary {
  std::optional<double> roi_ssim;
  std::optional<double> roi_psnr_db;
  std::size_t frames_measured = 0;
  std::size_t frames_null = 0;
  std::size_t frames_too_small = 0;
  std::size_t psnr_infinite = 0;
};
using RoiSummaryTable = std::map<std::string, RoiSummary>;

RoiSummary summarize(const RoiMetricAccumulator& acc);
/// JSON object keyed by tier; infinite PSNR is the string "inf".
std::string serialize_roi_summary(const RoiSummaryTable& table);
RoiSummaryTable parse_roi_summary(std::string_view document);

struct FaceFlags {
  std::vector<bool> orig_detected;
  std::vector<bool> post_detected;
};
using FaceFlagTable = std::map<std::string, FaceFlags>;

/// CSV with header "tier,sample_id,orig_detected,post_detected" (0/1).
FaceFlagTable parse_face_flags(std::string_view csv);

struct MetricsReport {
  std::string tier_name;
  ConfigLabel config_label = ConfigLabel::kA;
  Ratio top1{0, 0};
  std::map<std::string, std::optional<Ratio>> per_class;
  /// Percentage points; nullopt for the Original tier.
  std::optional<double> acc_drop_pp;
  std::optional<double> roi_ssim;
  std::optional<double> roi_psnr_db;
  std::optional<Ratio> face_fail_rate;
  /// nullopt for Original and when no SSIM is available.
  std::optional<double> pu_score;
  std::size_t frame_count = 0;
  std::size_t missing_predictions = 0;

  double top1_pct() const { return top1.denominator ? 100.0 * top1.value() : 0.0; }
};

struct EvaluateOptions {
  std::vector<std::string> class_set = default_class_list();
  /// Original-tier Top-1 (percent) for the same model; required for every
  /// tier except Original itself.
  std::optional<double> original_accuracy_pct;
  bool allow_train_eval = false;
};

/// Throws ConfigError when evaluating on the train split without
/// allow_train_eval, or when the Original accuracy is needed but absent.
MetricsReport evaluate(const PredictionSet& predictions, std::span<const ClipRecord> corpus,
                       const SplitAssignment& split, const RoiSummary* roi,
                       const FaceFlags* face_flags, const EvaluateOptions& options);

/// Loads <dir>/<Tier>.csv (config A) and <dir>/{A,B,C}/<Tier>.csv, evaluates
/// Original first within each config (falling back to config A's Original).
struct EvalRunInputs {
  std::filesystem::path predictions_dir;
  std::vector<ClipRecord> corpus;
  SplitAssignment split;
  RoiSummaryTable roi_summary;
  FaceFlagTable face_flags;
  EvaluateOptions options;
};
std::vector<MetricsReport> evaluate_predictions_dir(const EvalRunInputs& inputs);

struct ReportBundle {
  std::string document;
  /// tier,config,accuracy_pct,note
  std::string accuracy_by_tier_csv;
  /// tier,config,privacy,accuracy_pct,pu_score,note with privacy = 1 - SSIM
  std::string privacy_utility_csv;
};

/// Deterministic: sorted keys and fixed decimal places. Throws DomainError
/// for an empty list.
ReportBundle emit_report(std::span<const MetricsReport> reports);

/// Reads back a report document (values at their reported precision).
std::vector<MetricsReport> parse_report(std::string_view document);

/// Canonical ordering position of a tier name for tables.
int tier_order(std::string_view tier_name);

}  // namespace privtier
