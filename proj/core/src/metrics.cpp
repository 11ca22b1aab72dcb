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

#include "privtier/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "privtier/error.hpp"

namespace privtier {

namespace {

void check_pair(const Frame& a, const Frame& b, const BBox& bbox) {
  if (a.width != b.width || a.height != b.height) {
    throw DomainError("metric inputs differ in size");
  }
  if (!bbox.fits_within(a.width, a.height)) {
    throw DomainError("metric bbox lies outside the frame or is empty");
  }
}

std::vector<double> ssim_weights() {
  std::vector<double> w(kSsimWindow);
  const int r = kSsimWindow / 2;
  double sum = 0.0;
  for (int k = -r; k <= r; ++k) {
    w[static_cast<std::size_t>(k + r)] = std::exp(-(k * k) / (2.0 * kSsimSigma * kSsimSigma));
    sum += w[static_cast<std::size_t>(k + r)];
  }
  for (double& v : w) v /= sum;
  return w;
}

/// "Valid" separable filtering of a w x h plane with the 1-D weights.
std::vector<double> filter_valid(const std::vector<double>& plane, int w, int h,
                                 const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int ow = w - n + 1;
  const int oh = h - n + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[static_cast<std::size_t>(i)] * plane[static_cast<std::size_t>(y) * w + x + i];
      tmp[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[static_cast<std::size_t>(i)] * tmp[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double roi_ssim(const Frame& original, const Frame& transformed, const BBox& bbox) {
  check_pair(original, transformed, bbox);
  const int w = bbox.width();
  const int h = bbox.height();
  if (w < kSsimWindow || h < kSsimWindow) {
    throw MetricUndefined(fmt::format("ROI {}x{} is smaller than the {}x{} SSIM window",
                                      w, h, kSsimWindow, kSsimWindow));
  }
  static const std::vector<double> weights = ssim_weights();
  constexpr double L = 255.0;
  constexpr double C1 = (kSsimK1 * L) * (kSsimK1 * L);
  constexpr double C2 = (kSsimK2 * L) * (kSsimK2 * L);

  const std::size_t count = static_cast<std::size_t>(w) * h;
  double channel_sum = 0.0;
  for (int c = 0; c < Frame::kChannels; ++c) {
    std::vector<double> x(count), y(count), xx(count), yy(count), xy(count);
    for (int j = 0; j < h; ++j) {
      for (int i = 0; i < w; ++i) {
        const std::size_t p = static_cast<std::size_t>(j) * w + i;
        const double a = original.at(bbox.x_min + i, bbox.y_min + j, c);
        const double b = transformed.at(bbox.x_min + i, bbox.y_min + j, c);
        x[p] = a;
        y[p] = b;
        xx[p] = a * a;
        yy[p] = b * b;
        xy[p] = a * b;
      }
    }
    const auto mu_x = filter_valid(x, w, h, weights);
    const auto mu_y = filter_valid(y, w, h, weights);
    const auto e_xx = filter_valid(xx, w, h, weights);
    const auto e_yy = filter_valid(yy, w, h, weights);
    const auto e_xy = filter_valid(xy, w, h, weights);
    double sum = 0.0;
    for (std::size_t p = 0; p < mu_x.size(); ++p) {
      const double mx = mu_x[p];
      const double my = mu_y[p];
      const double vx = e_xx[p] - mx * mx;
      const double vy = e_yy[p] - my * my;
      const double cxy = e_xy[p] - mx * my;
      sum += ((2.0 * mx * my + C1) * (2.0 * cxy + C2)) /
             ((mx * mx + my * my + C1) * (vx + vy + C2));
    }
    channel_sum += sum / static_cast<double>(mu_x.size());
  }
  return std::clamp(channel_sum / Frame::kChannels, -1.0, 1.0);
}

double roi_psnr(const Frame& original, const Frame& transformed, const BBox& bbox) {
  check_pair(original, transformed, bbox);
  std::uint64_t sse = 0;
  for (int y = bbox.y_min; y < bbox.y_max; ++y) {
    for (int x = bbox.x_min; x < bbox.x_max; ++x) {
      for (int c = 0; c < Frame::kChannels; ++c) {
        const int d = int{original.at(x, y, c)} - int{transformed.at(x, y, c)};
        sse += static_cast<std::uint64_t>(d * d);
      }
    }
  }
  if (sse == 0) return std::numeric_limits<double>::infinity();
  const double mse = static_cast<double>(sse) /
                     (static_cast<double>(bbox.area()) * Frame::kChannels);
  return 10.0 * std::log10((255.0 * 255.0) / mse);
}

void RoiMetricAccumulator::add(double ssim, double psnr) {
  ssim_sum_ += ssim;
  ++measured_;
  if (std::isinf(psnr)) {
    ++infinite_psnr_;
  } else {
    psnr_sum_ += psnr;
    ++finite_psnr_;
  }
}

void RoiMetricAccumulator::merge(const RoiMetricAccumulator& other) {
  ssim_sum_ += other.ssim_sum_;
  psnr_sum_ += other.psnr_sum_;
  measured_ += other.measured_;
  finite_psnr_ += other.finite_psnr_;
  infinite_psnr_ += other.infinite_psnr_;
  null_frames_ += other.null_frames_;
  small_frames_ += other.small_frames_;
}

std::optional<double> RoiMetricAccumulator::mean_ssim() const {
  if (measured_ == 0) return std::nullopt;
  return ssim_sum_ / static_cast<double>(measured_);
}

std::optional<double> RoiMetricAccumulator::mean_psnr() const {
  if (measured_ == 0) return std::nullopt;
  if (finite_psnr_ == 0) return std::numeric_limits<double>::infinity();
  return psnr_sum_ / static_cast<double>(finite_psnr_);
}

AccuracyResult top1_accuracy(const std::map<std::string, std::string>& predictions,
                             const std::map<std::string, std::string>& labels,
                             std::span<const std::string> class_set) {
  const std::set<std::string> classes(class_set.begin(), class_set.end());

  std::vector<std::string> unknown_ids;
  std::vector<std::string> unknown_labels;
  for (const auto& [id, predicted] : predictions) {
    if (!labels.contains(id)) unknown_ids.push_back(id);
    if (!classes.contains(predicted)) unknown_labels.push_back(id + "=" + predicted);
  }
  for (const auto& [id, truth] : labels) {
    if (!classes.contains(truth)) unknown_labels.push_back(id + "=" + truth);
  }
  if (!unknown_ids.empty()) {
    throw ValidationError(fmt::format("predictions for unknown videos: {}",
                                      fmt::join(unknown_ids, ", ")),
                          unknown_ids.front(), "video_id");
  }
  if (!unknown_labels.empty()) {
    throw ValidationError(
        fmt::format("labels outside the class set: {}", fmt::join(unknown_labels, ", ")),
        unknown_labels.front(), "label");
  }

  AccuracyResult result;
  result.overall = Ratio{0, 0};
  std::map<std::string, Ratio> per_class;
  for (const auto& [id, truth] : labels) {
    Ratio& r = per_class.try_emplace(truth, Ratio{0, 0}).first->second;
    ++r.denominator;
    ++result.overall.denominator;
    auto it = predictions.find(id);
    if (it == predictions.end()) {
      result.missing.push_back(id);
    } else if (it->second == truth) {
      ++r.numerator;
      ++result.overall.numerator;
    }
  }

  for (const std::string& name : classes) {
    auto it = per_class.find(name);
    if (it == per_class.end() || it->second.denominator == 0) {
      result.per_class[name] = std::nullopt;
    } else {
      result.per_class[name] = it->second;
    }
  }
  return result;
}

double accuracy_drop(double acc_original_pct, double acc_tier_pct) {
  const auto in_range = [](double v) { return v >= 0.0 && v <= 100.0; };
  if (!in_range(acc_original_pct) || !in_range(acc_tier_pct)) {
    throw DomainError("accuracies must be percentages in [0, 100]");
  }
  return acc_original_pct - acc_tier_pct;
}

double pu_score(double acc_tier_pct, double acc_original_pct, double ssim_tier) {
  if (!(acc_original_pct > 0.0)) {
    throw DomainError("PU score needs a positive Original-tier accuracy");
  }
  if (!(ssim_tier >= -1.0 && ssim_tier <= 1.0)) {
    throw DomainError("SSIM must lie in [-1, 1]");
  }
  return (acc_tier_pct / acc_original_pct) * (1.0 - ssim_tier);
}

std::optional<Ratio> face_fail_rate(const std::vector<bool>& orig_detected,
                                    const std::vector<bool>& post_detected) {
  if (orig_detected.size() != post_detected.size()) {
    throw DomainError("face detection flag lists differ in length");
  }
  Ratio r{0, 0};
  for (std::size_t i = 0; i < orig_detected.size(); ++i) {
    if (!orig_detected[i]) continue;
    ++r.denominator;
    if (!post_detected[i]) ++r.numerator;
  }
  if (r.denominator == 0) return std::nullopt;
  return r;
}

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double scaled = value * scale;
  // Nudge by a few ulps so 22.2999999 (from 88.8 - 66.5) rounds as 22.3.
  const double nudged = scaled + std::copysign(1e-9 * std::max(1.0, std::abs(scaled)), scaled);
  return std::round(nudged) / scale;
}

}  // namespace privtier
