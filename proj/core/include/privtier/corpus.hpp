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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace privtier {

inline constexpr int kClipFrames = 32;
inline constexpr int kOutputSize = 224;
inline constexpr int kKeypointCount = 17;
inline constexpr double kMinDetectionConfidence = 0.5;
inline constexpr int kGroupCount = 25;
inline constexpr int kLastTrainGroup = 19;

enum class Split { kTrain, kTest };

std::string_view to_string(Split split);
/// Accepts "train" or "test"; throws DomainError otherwise.
Split split_from_string(std::string_view name);

/// Half-open pixel rectangle: x_min <= x < x_max, y_min <= y < y_max.
struct BBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const { return x_max - x_min; }
  int height() const { return y_max - y_min; }
  long area() const {
    return empty() ? 0 : static_cast<long>(width()) * height();
  }
  bool empty() const { return x_max <= x_min || y_max <= y_min; }
  bool contains(int x, int y) const {
    return x >= x_min && x < x_max && y >= y_min && y < y_max;
  }
  bool fits_within(int frame_width, int frame_height) const {
    return 0 <= x_min && x_min < x_max && x_max <= frame_width &&
           0 <= y_min && y_min < y_max && y_max <= frame_height;
  }
  bool operator==(const BBox&) const = default;
};

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double c = 0.0;
  bool operator==(const Keypoint&) const = default;
};

/// Only rectangular masks are produced in v1; the enum is the hook for
/// raster segmentation masks.
enum class MaskKind { kBBox };

struct RoiAnnotation {
  BBox bbox;
  double confidence = 0.0;
  std::array<Keypoint, kKeypointCount> keypoints{};
  MaskKind mask_kind = MaskKind::kBBox;

  /// Binary ROI mask M(p): 1 inside the bbox, 0 elsewhere.
  bool mask(int x, int y) const { return bbox.contains(x, y); }
  bool operator==(const RoiAnnotation&) const = default;
};

/// One entry per clip frame; nullopt where no person passed the detector.
using FrameAnnotations = std::vector<std::optional<RoiAnnotation>>;

/// Exact non-negative fraction.
struct Ratio {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;

  double value() const {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
  bool operator==(const Ratio&) const = default;
};

struct ClipRecord {
  std::string video_id;
  std::string source_file;
  std::string class_label;
  int group_id = 0;
  Split split = Split::kTrain;
  double source_fps = 0.0;
  int total_frames = 0;
  int clip_frames = kClipFrames;
  /// Equals the exact detected/clip_frames ratio when annotations are
  /// present; otherwise the value read from the document.
  double detection_rate = 0.0;
  /// Mean of the non-null per-frame boxes; nullopt when nothing was detected.
  std::optional<BBox> roi_bbox_mean;
  /// Metadata-only documents omit per-frame annotations.
  std::optional<FrameAnnotations> annotations;
  /// Source shorter than the window; last frame repeated.
  bool padded = false;
  /// Unknown top-level fields, kept verbatim as JSON text.
  std::map<std::string, std::string> extra_fields;

  bool operator==(const ClipRecord&) const = default;
};

struct CorpusOptions {
  /// Allowed class labels. Empty accepts any label.
  std::vector<std::string> class_list;
  int frame_width = kOutputSize;
  int frame_height = kOutputSize;
};

/// The 15 action classes of the benchmark, in table order.
const std::vector<std::string>& default_class_list();

CorpusOptions default_corpus_options();

/// Parses an annotations.json document. Throws ParseError (byte offset) on
/// malformed JSON and ValidationError (video_id, field) on schema or
/// invariant violations.
std::vector<ClipRecord> parse_annotations(std::string_view document,
                                          const CorpusOptions& options);
std::vector<ClipRecord> parse_annotations(std::string_view document);

/// Deterministic UTF-8 serialization; detection_rate rounded to 4 decimals.
std::string serialize_annotations(std::span<const ClipRecord> records);

/// Throws ValidationError describing the first violated invariant.
void validate_record(const ClipRecord& record, const CorpusOptions& options);

/// Groups 1..19 train, 20..25 test. Throws DomainError outside [1, 25].
Split assign_split(int group_id);

/// Throws DomainError on an empty list.
Ratio detection_rate(const FrameAnnotations& annotations);

/// Component-wise rounded mean of non-null boxes.
std::optional<BBox> mean_bbox(const FrameAnnotations& annotations);

/// Extracts NN from UCF101-style names such as "v_BrushingTeeth_g01_c01.avi".
std::optional<int> group_from_source_file(std::string_view source_file);

struct SplitAssignment {
  Split split = Split::kTest;
  std::vector<std::string> video_ids;
};

/// One id per LF-terminated line. Ids are sorted on output.
SplitAssignment parse_split_file(std::string_view text, Split split);
std::string serialize_split_file(const SplitAssignment& assignment);

struct SplitPair {
  SplitAssignment train{Split::kTrain, {}};
  SplitAssignment test{Split::kTest, {}};
};

/// Partitions records by group with assign_split. Throws ValidationError
/// when a record's declared split disagrees with its group.
SplitPair make_splits(std::span<const ClipRecord> records);

/// Returns human-readable violations: ids present in both splits, groups
/// straddling both splits, ids unknown to the corpus.
std::vector<std::string> check_split_integrity(
    std::span<const ClipRecord> records, const SplitPair& splits);

}  // namespace privtier
