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

// Synthetic corpora and frames for tests.

#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "privtier/corpus.hpp"
#include "privtier/frame.hpp"
#include "privtier/permute.hpp"

namespace privtier::fixture {

Frame random_frame(std::mt19937_64& rng, int width, int height);

/// Smooth gradients plus structured texture; gives Canny something to find.
Frame textured_frame(std::uint64_t seed, int width, int height);

RoiAnnotation make_roi(const BBox& box, double confidence = 0.9);

KeyMaterial test_key(std::uint8_t salt = 0);

std::string source_file_name(const std::string& class_label, int group, int clip);

/// Metadata-only records whose per-class counts follow the benchmark table
/// (1,932 clips, 25 groups per class, 480 clips in groups 20..25).
std::vector<ClipRecord> table_conformant_records();

/// Clips with full per-frame annotations, one per (class, group) cell.
std::vector<ClipRecord> grid_records(int classes, int groups, std::uint64_t seed);

struct FixtureOptions {
  int clips = 10;
  int source_width = 80;
  int source_height = 60;
  std::uint64_t seed = 7;
  bool with_changelog = true;
  bool with_poses = true;
};

/// Writes annotations.json and frames/<id>/*.png under `root`. Mixes long,
/// exact and short sources, partially and fully null annotations, and one
/// ROI smaller than the SSIM window.
std::vector<ClipRecord> write_fixture_corpus(const std::filesystem::path& root,
                                             const FixtureOptions& options = {});

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

std::string slurp(const std::filesystem::path& path);

}  // namespace privtier::fixture
