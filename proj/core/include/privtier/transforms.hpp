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
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "privtier/corpus.hpp"
#include "privtier/frame.hpp"
#include "privtier/permute.hpp"

namespace privtier {

inline constexpr double kDefaultBlurSigma = 15.0;
inline constexpr double kDefaultCannyLow = 50.0;
inline constexpr double kDefaultCannyHigh = 150.0;

/// Warnings raised by transforms that degrade to a no-op.
struct TransformNotes {
  std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Temporal window

struct WindowPlan {
  /// Source index for each output frame.
  std::vector<std::size_t> indices;
  bool padded = false;
};

/// Centre window of `target` frames out of `length`. Short sources repeat
/// their last frame. Throws DomainError when length or target is zero.
WindowPlan center_window(std::size_t length, std::size_t target = kClipFrames);

template <typename T>
std::vector<T> apply_window(const std::vector<T>& items, const WindowPlan& plan) {
  std::vector<T> out;
  out.reserve(plan.indices.size());
  for (std::size_t i : plan.indices) out.push_back(items.at(i));
  return out;
}

// ---------------------------------------------------------------------------
// Tier specification

enum class TierKind { kOriginal, kBlur, kEdge, kScramble };

struct TierSpec {
  TierKind kind = TierKind::kOriginal;
  double sigma = 0.0;
  double canny_low = 0.0;
  double canny_high = 0.0;
  int block_size = 0;
  bool nobg = false;

  static TierSpec original();
  static TierSpec blur(double sigma = kDefaultBlurSigma);
  static TierSpec edge(double low = kDefaultCannyLow, double high = kDefaultCannyHigh);
  static TierSpec scramble(int block_size, bool nobg = false);

  /// Directory name, e.g. "Tier3_AES_B8_NoBG".
  std::string name() const;
  /// Throws ConfigError when parameters do not fit the kind.
  void validate() const;

  bool operator==(const TierSpec&) const = default;
};

/// Original, Blur, Edge, B4, B8, B16, B4-NoBG, B8-NoBG, B16-NoBG.
std::vector<TierSpec> default_tier_set();

/// Inverse of TierSpec::name() for the default parameters.
TierSpec tier_from_name(std::string_view name);

// ---------------------------------------------------------------------------
// Per-frame transforms

/// Gaussian blur written only inside the bbox. The kernel (radius ceil(3
/// sigma)) reads the whole frame with reflect-101 borders.
Frame tier1_blur(const Frame& frame, const std::optional<RoiAnnotation>& roi,
                 double sigma = kDefaultBlurSigma, TransformNotes* notes = nullptr);

/// Binary Canny map over the whole frame (BT.601 luma, 3x3 Sobel, L1
/// magnitude, hysteresis).
std::vector<std::uint8_t> canny_edges(const Frame& frame, double low, double high);

/// 255 where inside the bbox and Canny fires, 0 elsewhere; all black
/// without a ROI.
Frame tier2_edge(const Frame& frame, const std::optional<RoiAnnotation>& roi,
                 double low = kDefaultCannyLow, double high = kDefaultCannyHigh);

/// Largest BxB-aligned grid anchored at the bbox's top-left corner.
struct BlockGrid {
  int origin_x = 0;
  int origin_y = 0;
  int cols = 0;
  int rows = 0;
  int block_size = 0;

  std::size_t block_count() const {
    return static_cast<std::size_t>(cols) * static_cast<std::size_t>(rows);
  }
  bool empty() const { return cols == 0 || rows == 0; }
  bool contains(int x, int y) const {
    return x >= origin_x && x < origin_x + cols * block_size && y >= origin_y &&
           y < origin_y + rows * block_size;
  }
};

/// cols/rows are zero when the bbox is narrower than one block.
BlockGrid make_block_grid(const BBox& bbox, int block_size);

/// Copies block i (row-major in `grid`) to slot permutation.mapping[i].
Frame permute_blocks(const Frame& frame, const BlockGrid& grid,
                     const BlockPermutation& permutation);

struct ScrambleContext {
  const KeyMaterial* key = nullptr;
  std::string_view video_id;
  std::uint64_t frame_index = 0;
  PermutationGenerator generator = PermutationGenerator::kAesCtr;
};

Frame tier3_scramble(const Frame& frame, const std::optional<RoiAnnotation>& roi,
                     int block_size, const ScrambleContext& context,
                     TransformNotes* notes = nullptr);

/// p * M(p); all black without a ROI.
Frame apply_nobg(const Frame& frame, const std::optional<RoiAnnotation>& roi);

// ---------------------------------------------------------------------------
// Tier set

struct TierSetOptions {
  PermutationGenerator generator = PermutationGenerator::kAesCtr;
};

/// Tier name -> transformed clip, for frames that are already windowed and
/// resized. Errors are rethrown as Error with (video_id, frame, tier).
std::map<std::string, std::vector<Frame>> generate_tier_set(
    const ClipRecord& clip, const std::vector<Frame>& frames, const KeyMaterial& key,
    const std::vector<TierSpec>& tiers, const TierSetOptions& options = {},
    TransformNotes* notes = nullptr);

/// One tier for one frame; the building block of generate_tier_set.
Frame apply_tier(const TierSpec& tier, const Frame& frame,
                 const std::optional<RoiAnnotation>& roi, const ScrambleContext& context,
                 TransformNotes* notes = nullptr);

}  // namespace privtier
