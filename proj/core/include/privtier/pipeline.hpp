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
#include <optional>
#include <string>
#include <vector>

#include "privtier/corpus.hpp"
#include "privtier/manifest.hpp"
#include "privtier/permute.hpp"
#include "privtier/transforms.hpp"

namespace privtier {

/// Version string written into run metadata.
std::string_view tool_version();

/// Input layout:
///   <input_root>/annotations.json      per-frame annotations (224x224 space)
///   <input_root>/frames/<video_id>/    pre-extracted lossless frames, sorted
///   <input_root>/CHANGELOG.md          optional, copied verbatim
///   <input_root>/Estimated_Poses/      optional, copied verbatim
struct PipelineConfig {
  std::filesystem::path input_root;
  std::filesystem::path output_root;
  std::vector<TierSpec> tiers = default_tier_set();
  std::optional<KeyMaterial> key;
  std::vector<std::string> class_list = default_class_list();
  unsigned workers = 1;
  PermutationGenerator generator = PermutationGenerator::kAesCtr;
  bool resume = false;
  /// Evenly spaced frames per clip used for ROI-SSIM / ROI-PSNR.
  int metric_frames_per_clip = 4;
};

struct ClipFailure {
  std::string video_id;
  std::string message;
};

struct RunSummary {
  std::size_t clips = 0;
  /// Windowed frames per clip summed over clips (each written once per tier).
  std::size_t frames = 0;
  std::size_t tiers = 0;
  std::size_t padded_clips = 0;
  std::size_t null_annotation_frames = 0;
  std::size_t files_written = 0;
  std::size_t files_unchanged = 0;
  std::vector<ClipFailure> failures;
  std::vector<std::string> warnings;

  bool ok() const { return failures.empty(); }
};

/// Windows, resizes and transforms every clip, then writes annotations,
/// split files, ROI metric summary, run metadata and manifest. Throws
/// ConfigError before touching the output when the key is missing or the
/// output root is non-empty without `resume`.
RunSummary run_pipeline(const PipelineConfig& config);

struct Finding {
  std::string kind;
  std::string path;
  std::string detail;
};

struct RunVerification {
  ManifestReport manifest;
  std::vector<Finding> findings;
  bool clean() const { return findings.empty(); }
};

/// Manifest check plus structure: every clip has every tier, 32 frames
/// each, decodable, 224x224.
RunVerification verify_run(const std::filesystem::path& output_root);

/// "frame_00007.png"
std::string frame_filename(std::size_t index);

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kRunMetadataFile = "run_metadata.json";
inline constexpr const char* kRoiMetricsFile = "roi_metrics.json";

}  // namespace privtier
