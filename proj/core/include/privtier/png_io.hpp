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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "privtier/frame.hpp"

namespace privtier {

/// Lossless 8-bit RGB PNG. Output bytes depend only on the frame.
std::vector<std::uint8_t> encode_png(const Frame& frame);

/// Any PNG colour type is converted to 8-bit RGB. Throws ParseError on
/// corrupt or truncated data.
Frame decode_png(std::span<const std::uint8_t> bytes);

Frame read_png(const std::filesystem::path& path);

}  // namespace privtier
