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

#include "privtier/transforms.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "privtier/error.hpp"

namespace privtier {

WindowPlan center_window(std::size_t length, std::size_t target) {
  if (length == 0) throw DomainError("cannot window an empty frame sequence");
  if (target == 0) throw DomainError("window length must be positive");
  WindowPlan plan;
  plan.indices.reserve(target);
  if (length >= target) {
    const std::size_t start = (length - target) / 2;
    for (std::size_t i = 0; i < target; ++i) plan.indices.push_back(start + i);
  } else {
    for (std::size_t i = 0; i < target; ++i) {
      plan.indices.push_back(std::min(i, length - 1));
    }
    plan.padded = true;
  }
  return plan;
}

// ---------------------------------------------------------------------------

TierSpec TierSpec::original() { return {}; }

TierSpec TierSpec::blur(double sigma) {
  TierSpec t;
  t.kind = TierKind::kBlur;
  t.sigma = sigma;
  return t;
}

TierSpec TierSpec::edge(double low, double high) {
  TierSpec t;
  t.kind = TierKind::kEdge;
  t.canny_low = low;
  t.canny_high = high;
  return t;
}

TierSpec TierSpec::scramble(int block_size, bool nobg) {
  TierSpec t;
  t.kind = TierKind::kScramble;
  t.block_size = block_size;
  t.nobg = nobg;
  return t;
}

std::string TierSpec::name() const {
  switch (kind) {
    case TierKind::kOriginal:
      return "Original";
    case TierKind::kBlur:
      return "Tier1_Blur";
    case TierKind::kEdge:
      return "Tier2_Edge";
    case TierKind::kScramble:
      return fmt::format("Tier3_AES_B{}{}", block_size, nobg ? "_NoBG" : "");
  }
  return "Unknown";
}

void TierSpec::validate() const {
  const bool has_blur = sigma != 0.0;
  const bool has_edge = canny_low != 0.0 || canny_high != 0.0;
  const bool has_block = block_size != 0 || nobg;
  switch (kind) {
    case TierKind::kOriginal:
      if (has_blur || has_edge || has_block) {
        throw ConfigError("Original tier takes no parameters");
      }
      return;
    case TierKind::kBlur:
      if (!(sigma > 0.0)) throw ConfigError("blur sigma must be positive");
      if (has_edge || has_block) throw ConfigError("blur tier takes only sigma");
      return;
    case TierKind::kEdge:
      if (!(canny_low >= 0.0 && canny_low < canny_high)) {
        throw ConfigError("edge tier needs 0 <= low < high");
      }
      if (has_blur || has_block) throw ConfigError("edge tier takes only thresholds");
      return;
    case TierKind::kScramble:
      if (block_size < 2) throw ConfigError("scramble block size must be >= 2");
      if (has_blur || has_edge) throw ConfigError("scramble tier takes only B and NoBG");
      return;
  }
}

std::vector<TierSpec> default_tier_set() {
  return {TierSpec::original(),        TierSpec::blur(),
          TierSpec::edge(),            TierSpec::scramble(4),
          TierSpec::scramble(8),       TierSpec::scramble(16),
          TierSpec::scramble(4, true), TierSpec::scramble(8, true),
          TierSpec::scramble(16, true)};
}

TierSpec tier_from_name(std::string_view name) {
  if (name == "Original") return TierSpec::original();
  if (name == "Tier1_Blur") return TierSpec::blur();
  if (name == "Tier2_Edge") return TierSpec::edge();
  constexpr std::string_view kPrefix = "Tier3_AES_B";
  if (name.starts_with(kPrefix)) {
    std::string_view rest = name.substr(kPrefix.size());
    bool nobg = false;
    if (rest.ends_with("_NoBG")) {
      nobg = true;
      rest.remove_suffix(5);
    }
    int b = 0;
    for (char c : rest) {
      if (c < '0' || c > '9' || b > 100000) throw ConfigError(fmt::format("unknown tier '{}'", name));
      b = b * 10 + (c - '0');
    }
    if (!rest.empty() && b >= 2) return TierSpec::scramble(b, nobg);
  }
  throw ConfigError(fmt::format("unknown tier '{}'", name));
}

// ---------------------------------------------------------------------------
// Blur

namespace {

int reflect101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double v = std::exp(-(k * k) / (2.0 * sigma * sigma));
    w[static_cast<std::size_t>(k + radius)] = v;
    sum += v;
  }
  for (double& v : w) v /= sum;
  return w;
}

/// Clips the bbox to the frame; empty when nothing remains.
BBox clip_to_frame(const BBox& b, const Frame& frame) {
  return BBox{std::max(b.x_min, 0), std::max(b.y_min, 0), std::min(b.x_max, frame.width),
              std::min(b.y_max, frame.height)};
}

}  // namespace

Frame tier1_blur(const Frame& frame, const std::optional<RoiAnnotation>& roi,
                 double sigma, TransformNotes* notes) {
  if (!(sigma > 0.0)) throw DomainError("blur sigma must be positive");
  if (!roi) return frame;
  const BBox box = clip_to_frame(roi->bbox, frame);
  if (box.empty()) {
    if (notes) notes->warnings.push_back("blur: degenerate bbox, frame unchanged");
    return frame;
  }

  const std::vector<double> kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = box.width();
  constexpr int C = Frame::kChannels;

  // Source columns and rows for every tap, with reflect-101 applied once.
  std::vector<int> col_index(static_cast<std::size_t>(w + 2 * radius));
  for (int i = 0; i < w + 2 * radius; ++i) {
    col_index[static_cast<std::size_t>(i)] = reflect101(box.x_min - radius + i, frame.width);
  }
  std::vector<char> needed(static_cast<std::size_t>(frame.height), 0);
  for (int y = box.y_min; y < box.y_max; ++y) {
    for (int k = -radius; k <= radius; ++k) needed[reflect101(y + k, frame.height)] = 1;
  }

  // Horizontal pass over the rows the vertical pass reads, ROI columns only.
  std::vector<double> rows(static_cast<std::size_t>(frame.height) * w * C);
  std::vector<double> padded(col_index.size() * C);
  const std::size_t stride = static_cast<std::size_t>(frame.width) * C;
  const std::size_t span = static_cast<std::size_t>(w) * C;
  for (int y = 0; y < frame.height; ++y) {
    if (!needed[static_cast<std::size_t>(y)]) continue;
    const std::uint8_t* line = frame.pixels.data() + stride * static_cast<std::size_t>(y);
    for (std::size_t i = 0; i < col_index.size(); ++i) {
      for (int c = 0; c < C; ++c) {
        padded[i * C + c] = line[static_cast<std::size_t>(col_index[i]) * C + c];
      }
    }
    double* dst = &rows[static_cast<std::size_t>(y) * span];
    for (int k = 0; k <= 2 * radius; ++k) {
      const double wk = kernel[static_cast<std::size_t>(k)];
      const double* src = &padded[static_cast<std::size_t>(k) * C];
      for (std::size_t i = 0; i < span; ++i) dst[i] += wk * src[i];
    }
  }

  Frame out = frame;
  std::vector<double> acc(static_cast<std::size_t>(w) * C);
  for (int y = box.y_min; y < box.y_max; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int k = -radius; k <= radius; ++k) {
      const double wk = kernel[static_cast<std::size_t>(k + radius)];
      const double* src =
          &rows[static_cast<std::size_t>(reflect101(y + k, frame.height)) * w * C];
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += wk * src[i];
    }
    std::uint8_t* dst = out.pixels.data() + stride * static_cast<std::size_t>(y) +
                        static_cast<std::size_t>(box.x_min) * C;
    for (std::size_t i = 0; i < acc.size(); ++i) dst[i] = quantize(acc[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Edge

std::vector<std::uint8_t> canny_edges(const Frame& frame, double low, double high) {
  if (!(low < high)) throw DomainError("Canny thresholds need low < high");
  const int W = frame.width;
  const int H = frame.height;
  const auto idx = [W](int x, int y) {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(W) +
           static_cast<std::size_t>(x);
  };

  std::vector<int> luma(static_cast<std::size_t>(W) * H);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      luma[idx(x, y)] = (299 * frame.at(x, y, 0) + 587 * frame.at(x, y, 1) +
                         114 * frame.at(x, y, 2) + 500) /
                        1000;
    }
  }
  const auto px = [&](int x, int y) {
    return luma[idx(std::clamp(x, 0, W - 1), std::clamp(y, 0, H - 1))];
  };

  std::vector<int> gx(luma.size()), gy(luma.size()), mag(luma.size());
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const int dx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                     (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const int dy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                     (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      gx[idx(x, y)] = dx;
      gy[idx(x, y)] = dy;
      mag[idx(x, y)] = std::abs(dx) + std::abs(dy);
    }
  }
  const auto m_at = [&](int x, int y) {
    return (x < 0 || y < 0 || x >= W || y >= H) ? 0 : mag[idx(x, y)];
  };

  // Non-maximum suppression with tan(22.5 deg) in Q15 fixed point. The
  // strict/non-strict comparison pair keeps one pixel of a flat ridge.
  constexpr long kTan22 = 13573;  // round(0.41421356 * 2^15)
  enum : std::uint8_t { kNone = 0, kWeak = 1, kStrong = 2 };
  std::vector<std::uint8_t> state(luma.size(), kNone);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const int m = mag[idx(x, y)];
      if (!(m > low)) continue;
      const long ax = std::abs(gx[idx(x, y)]);
      const long ay = static_cast<long>(std::abs(gy[idx(x, y)])) << 15;
      const long tg22 = ax * kTan22;
      bool keep;
      if (ay < tg22) {
        keep = m > m_at(x - 1, y) && m >= m_at(x + 1, y);
      } else if (ay > tg22 + (ax << 16)) {
        keep = m > m_at(x, y - 1) && m >= m_at(x, y + 1);
      } else {
        const bool same_sign = (gx[idx(x, y)] ^ gy[idx(x, y)]) >= 0;
        keep = same_sign ? (m > m_at(x - 1, y - 1) && m > m_at(x + 1, y + 1))
                         : (m > m_at(x + 1, y - 1) && m > m_at(x - 1, y + 1));
      }
      if (keep) state[idx(x, y)] = m > high ? kStrong : kWeak;
    }
  }

  std::vector<std::uint8_t> edges(luma.size(), 0);
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (state[idx(x, y)] == kStrong && !edges[idx(x, y)]) {
        edges[idx(x, y)] = 1;
        stack.emplace_back(x, y);
      }
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx;
            const int ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
            if (state[idx(nx, ny)] != kNone && !edges[idx(nx, ny)]) {
              edges[idx(nx, ny)] = 1;
              stack.emplace_back(nx, ny);
            }
          }
        }
      }
    }
  }
  return edges;
}

Frame tier2_edge(const Frame& frame, const std::optional<RoiAnnotation>& roi,
                 double low, double high) {
  if (!(low < high)) throw DomainError("Canny thresholds need low < high");
  Frame out(frame.width, frame.height, 0);
  if (!roi) return out;
  const BBox box = clip_to_frame(roi->bbox, frame);
  if (box.empty()) return out;
  const std::vector<std::uint8_t> edges = canny_edges(frame, low, high);
  for (int y = box.y_min; y < box.y_max; ++y) {
    for (int x = box.x_min; x < box.x_max; ++x) {
      if (edges[static_cast<std::size_t>(y) * frame.width + x]) out.set_rgb(x, y, 255, 255, 255);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scramble

BlockGrid make_block_grid(const BBox& bbox, int block_size) {
  if (block_size < 1) throw DomainError("block size must be positive");
  BlockGrid grid;
  grid.origin_x = bbox.x_min;
  grid.origin_y = bbox.y_min;
  grid.block_size = block_size;
  if (!bbox.empty()) {
    grid.cols = bbox.width() / block_size;
    grid.rows = bbox.height() / block_size;
  }
  if (grid.cols == 0 || grid.rows == 0) grid.cols = grid.rows = 0;
  return grid;
}

Frame permute_blocks(const Frame& frame, const BlockGrid& grid,
                     const BlockPermutation& permutation) {
  if (permutation.size() != grid.block_count()) {
    throw DomainError("permutation size does not match the block grid");
  }
  if (grid.origin_x < 0 || grid.origin_y < 0 ||
      grid.origin_x + grid.cols * grid.block_size > frame.width ||
      grid.origin_y + grid.rows * grid.block_size > frame.height) {
    throw DomainError("block grid exceeds the frame");
  }
  Frame out = frame;
  const int B = grid.block_size;
  const std::size_t row_bytes = static_cast<std::size_t>(B) * Frame::kChannels;
  for (std::size_t i = 0; i < permutation.size(); ++i) {
    const std::size_t slot = permutation.mapping[i];
    const int sx = grid.origin_x + static_cast<int>(i % grid.cols) * B;
    const int sy = grid.origin_y + static_cast<int>(i / grid.cols) * B;
    const int dx = grid.origin_x + static_cast<int>(slot % grid.cols) * B;
    const int dy = grid.origin_y + static_cast<int>(slot / grid.cols) * B;
    for (int r = 0; r < B; ++r) {
      std::copy_n(frame.pixels.begin() + static_cast<std::ptrdiff_t>(frame.index(sx, sy + r, 0)),
                  row_bytes,
                  out.pixels.begin() + static_cast<std::ptrdiff_t>(out.index(dx, dy + r, 0)));
    }
  }
  return out;
}

Frame tier3_scramble(const Frame& frame, const std::optional<RoiAnnotation>& roi,
                     int block_size, const ScrambleContext& context,
                     TransformNotes* notes) {
  if (block_size < 2) throw DomainError("scramble block size must be >= 2");
  if (context.key == nullptr) throw ConfigError("scramble requires a key");
  if (!roi) return frame;
  const BlockGrid grid = make_block_grid(clip_to_frame(roi->bbox, frame), block_size);
  if (grid.block_count() <= 1) {
    if (notes) {
      notes->warnings.push_back(fmt::format(
          "scramble: ROI holds {} block(s) of {}px, frame unchanged", grid.block_count(),
          block_size));
    }
    return frame;
  }
  const PermutationSeed seed{std::string(context.video_id), context.frame_index,
                             static_cast<std::uint32_t>(block_size)};
  const BlockPermutation perm =
      derive_permutation(grid.block_count(), seed, *context.key, context.generator);
  return permute_blocks(frame, grid, perm);
}

Frame apply_nobg(const Frame& frame, const std::optional<RoiAnnotation>& roi) {
  Frame out(frame.width, frame.height, 0);
  if (!roi) return out;
  const BBox box = clip_to_frame(roi->bbox, frame);
  if (box.empty()) return out;
  const std::size_t row_bytes = static_cast<std::size_t>(box.width()) * Frame::kChannels;
  for (int y = box.y_min; y < box.y_max; ++y) {
    const auto offset = static_cast<std::ptrdiff_t>(frame.index(box.x_min, y, 0));
    std::copy_n(frame.pixels.begin() + offset, row_bytes, out.pixels.begin() + offset);
  }
  return out;
}

// ---------------------------------------------------------------------------

Frame apply_tier(const TierSpec& tier, const Frame& frame,
                 const std::optional<RoiAnnotation>& roi, const ScrambleContext& context,
                 TransformNotes* notes) {
  switch (tier.kind) {
    case TierKind::kOriginal:
      return frame;
    case TierKind::kBlur:
      return tier1_blur(frame, roi, tier.sigma, notes);
    case TierKind::kEdge:
      return tier2_edge(frame, roi, tier.canny_low, tier.canny_high);
    case TierKind::kScramble: {
      Frame scrambled = tier3_scramble(frame, roi, tier.block_size, context, notes);
      return tier.nobg ? apply_nobg(scrambled, roi) : scrambled;
    }
  }
  throw ConfigError("unknown tier kind");
}

std::map<std::string, std::vector<Frame>> generate_tier_set(
    const ClipRecord& clip, const std::vector<Frame>& frames, const KeyMaterial& key,
    const std::vector<TierSpec>& tiers, const TierSetOptions& options,
    TransformNotes* notes) {
  if (!clip.annotations || clip.annotations->size() != frames.size()) {
    throw DomainError(fmt::format("{}: annotations not aligned 1:1 with {} frames",
                                  clip.video_id, frames.size()));
  }
  std::map<std::string, std::vector<Frame>> out;
  for (const TierSpec& tier : tiers) {
    tier.validate();
    const std::string name = tier.name();
    std::vector<Frame>& dst = out[name];
    dst.reserve(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
      const ScrambleContext context{&key, clip.video_id, f, options.generator};
      try {
        dst.push_back(apply_tier(tier, frames[f], (*clip.annotations)[f], context, notes));
      } catch (const Error& e) {
        throw Error(fmt::format("{}: frame {}: tier {}: {}", clip.video_id, f, name,
                                e.what()));
      }
    }
  }
  return out;
}

}  // namespace privtier
