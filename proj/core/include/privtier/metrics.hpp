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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "privtier/corpus.hpp"
#include "privtier/frame.hpp"

namespace privtier {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

// ---------------------------------------------------------------------------
// Privacy metrics over the ROI crop

/// Mean SSIM over every 11x11 Gaussian window (sigma 1.5) fully inside the
/// bbox crop, per channel, averaged over channels. Throws MetricUndefined
/// when the crop is smaller than the window and DomainError on mismatched
/// frames or a bbox outside the frame.
double roi_ssim(const Frame& original, const Frame& transformed, const BBox& bbox);

/// 10 log10(255^2 / MSE) with MSE over all channels of the crop; +inf when
/// the crops are identical.
double roi_psnr(const Frame& original, const Frame& transformed, const BBox& bbox);

/// Corpus aggregation: plain means over measured frames. PSNR infinities
/// are counted apart from the finite mean.
class RoiMetricAccumulator {
 public:
  void add(double ssim, double psnr);
  void skip_null() { ++null_frames_; }
  void skip_too_small() { ++small_frames_; }
  void merge(const RoiMetricAccumulator& other);

  std::size_t measured() const { return measured_; }
  std::size_t null_frames() const { return null_frames_; }
  std::size_t small_frames() const { return small_frames_; }
  std::size_t infinite_psnr() const { return infinite_psnr_; }

  std::optional<double> mean_ssim() const;
  /// Mean over finite values; +inf when every measured frame was identical.
  std::optional<double> mean_psnr() const;

 private:
  double ssim_sum_ = 0.0;
  double psnr_sum_ = 0.0;
  std::size_t measured_ = 0;
  std::size_t finite_psnr_ = 0;
  std::size_t infinite_psnr_ = 0;
  std::size_t null_frames_ = 0;
  std::size_t small_frames_ = 0;
};

// ---------------------------------------------------------------------------
// Recognition metrics

struct AccuracyResult {
  Ratio overall;
  /// Every class in the class set; nullopt where no ground-truth members.
  std::map<std::string, std::optional<Ratio>> per_class;
  /// Labelled videos without a prediction (counted as incorrect).
  std::vector<std::string> missing;
};

/// Top-1 accuracy over the videos in `labels`. Throws ValidationError for
/// predictions of unknown videos or labels outside `class_set`.
AccuracyResult top1_accuracy(const std::map<std::string, std::string>& predictions,
                             const std::map<std::string, std::string>& labels,
                             std::span<const std::string> class_set);

/// Percentage points: acc_original - acc_tier. Throws DomainError outside
/// [0, 100].
double accuracy_drop(double acc_original_pct, double acc_tier_pct);

/// (acc_tier / acc_original) * (1 - ssim). Throws DomainError when
/// acc_original <= 0 or ssim outside [-1, 1].
double pu_score(double acc_tier_pct, double acc_original_pct, double ssim_tier);

/// True->false transitions among originally-detected faces; nullopt when
/// nothing was detected originally. Throws DomainError on length mismatch.
std::optional<Ratio> face_fail_rate(const std::vector<bool>& orig_detected,
                                    const std::vector<bool>& post_detected);

/// Half-away-from-zero rounding to `decimals` places, for reporting.
double round_to(double value, int decimals);

}  // namespace privtier
