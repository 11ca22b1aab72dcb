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
#include <vector>

namespace privtier {

/// 8-bit RGB raster, row-major, channels interleaved.
struct Frame {
  static constexpr int kChannels = 3;

  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Frame() = default;
  /// Throws DomainError for non-positive dimensions.
  Frame(int w, int h, std::uint8_t fill = 0);

  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
            static_cast<std::size_t>(x)) *
               kChannels +
           static_cast<std::size_t>(c);
  }
  std::uint8_t& at(int x, int y, int c) { return pixels[index(x, y, c)]; }
  std::uint8_t at(int x, int y, int c) const { return pixels[index(x, y, c)]; }

  void set_rgb(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const std::size_t i = index(x, y, 0);
    pixels[i] = r;
    pixels[i + 1] = g;
    pixels[i + 2] = b;
  }

  bool operator==(const Frame&) const = default;
};

/// Bilinear resampling with half-pixel centres and edge clamping. A
/// same-size call returns an identical copy. Throws DomainError on empty
/// input or target.
Frame resize_frame(const Frame& frame, int target_width, int target_height);

}  // namespace privtier
