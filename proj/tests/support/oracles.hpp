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

// Independent reference implementations used only by tests. Nothing here
// calls into the library under test except for the plain data types.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "privtier/corpus.hpp"
#include "privtier/frame.hpp"

namespace privtier::oracle {

std::array<std::uint8_t, 32> sha256(std::string_view text);

/// AES-128 in OpenSSL's native CTR mode with IV = nonce || counter0.
std::vector<std::uint8_t> aes_ctr_keystream(std::span<const std::uint8_t> key,
                                            std::span<const std::uint8_t> nonce,
                                            std::uint64_t first_counter, std::size_t length);

/// Single-block AES-128 encryption via the legacy block API.
std::array<std::uint8_t, 16> aes_block(std::span<const std::uint8_t> key,
                                       std::span<const std::uint8_t, 16> block);

/// Descending Fisher-Yates drawing big-endian words from a finite buffer.
std::vector<std::uint32_t> fisher_yates(std::size_t n, std::span<const std::uint8_t> bytes);

/// Bilinear sample of channel c at output pixel (x, y), half-pixel centres.
double bilinear(const Frame& src, int out_w, int out_h, int x, int y, int c);

/// Direct 2D Gaussian convolution (un-separated, reflect-101 borders).
double dense_blur(const Frame& src, int x, int y, int c, double sigma);

/// Textbook Canny with float gradients and angle bins from atan2.
std::vector<std::uint8_t> canny(const Frame& frame, double low, double high);

/// SSIM evaluated window by window with an explicit 2D Gaussian.
double ssim(const Frame& a, const Frame& b, const BBox& box);

double psnr(const Frame& a, const Frame& b, const BBox& box);

struct Counts {
  std::uint64_t correct = 0;
  std::uint64_t total = 0;
};

/// Overall and per-class counts by straight enumeration of labelled ids.
std::pair<Counts, std::map<std::string, Counts>> count_accuracy(
    const std::map<std::string, std::string>& predictions,
    const std::map<std::string, std::string>& labels);

}  // namespace privtier::oracle
