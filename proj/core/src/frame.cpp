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

#include "privtier/frame.hpp"

#include <algorithm>
#include <cmath>

#include "privtier/error.hpp"

namespace privtier {

Frame::Frame(int w, int h, std::uint8_t fill) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw DomainError("frame dimensions must be positive");
  pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * kChannels,
                fill);
}

namespace {

struct Tap {
  int lo;
  int hi;
  double frac;
};

std::vector<Tap> make_taps(int src, int dst) {
  std::vector<Tap> taps(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / static_cast<double>(dst);
  for (int i = 0; i < dst; ++i) {
    double pos = (i + 0.5) * scale - 0.5;
    pos = std::clamp(pos, 0.0, static_cast<double>(src - 1));
    const int lo = static_cast<int>(std::floor(pos));
    const int hi = std::min(lo + 1, src - 1);
    taps[static_cast<std::size_t>(i)] = {lo, hi, pos - lo};
  }
  return taps;
}

}  // namespace

Frame resize_frame(const Frame& frame, int target_width, int target_height) {
  if (frame.width <= 0 || frame.height <= 0 || frame.pixels.empty()) {
    throw DomainError("cannot resize an empty frame");
  }
  if (target_width <= 0 || target_height <= 0) {
    throw DomainError("resize target must be positive");
  }
  if (frame.width == target_width && frame.height == target_height) return frame;

  const auto xs = make_taps(frame.width, target_width);
  const auto ys = make_taps(frame.height, target_height);
  Frame out(target_width, target_height);
  for (int y = 0; y < target_height; ++y) {
    const Tap& ty = ys[static_cast<std::size_t>(y)];
    for (int x = 0; x < target_width; ++x) {
      const Tap& tx = xs[static_cast<std::size_t>(x)];
      for (int c = 0; c < Frame::kChannels; ++c) {
        const double top = (1.0 - tx.frac) * frame.at(tx.lo, ty.lo, c) +
                           tx.frac * frame.at(tx.hi, ty.lo, c);
        const double bottom = (1.0 - tx.frac) * frame.at(tx.lo, ty.hi, c) +
                              tx.frac * frame.at(tx.hi, ty.hi, c);
        const double v = (1.0 - ty.frac) * top + ty.frac * bottom;
        out.at(x, y, c) =
            static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
      }
    }
  }
  return out;
}

}  // namespace privtier
