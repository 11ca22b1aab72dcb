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


#include "fixture.hpp"

#include <unistd.h>

#include <cmath>
#include <fstream>
#include <iterator>

#include "privtier/png_io.hpp"

namespace fs = std::filesystem;

namespace privtier::fixture {

namespace {

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::uint8_t clamp_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

Frame random_frame(std::mt19937_64& rng, int width, int height) {
  Frame f(width, height);
  std::uniform_int_distribution<int> dist(0, 255);
  for (auto& p : f.pixels) p = static_cast<std::uint8_t>(dist(rng));
  return f;
}

Frame textured_frame(std::uint64_t seed, int width, int height) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double fx = 0.05 + 0.3 * u(rng);
  const double fy = 0.05 + 0.3 * u(rng);
  const double phase = 6.28 * u(rng);
  const double cx = width * u(rng);
  const double cy = height * u(rng);
  const double radius = 0.15 * width + 0.2 * width * u(rng);
  Frame f(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double wave = 60.0 * std::sin(fx * x + fy * y + phase);
      const bool disc = (x - cx) * (x - cx) + (y - cy) * (y - cy) < radius * radius;
      const double base = 40.0 + 120.0 * x / width + (disc ? 70.0 : 0.0);
      const double noise = 12.0 * (u(rng) - 0.5);
      f.set_rgb(x, y, clamp_u8(base + wave + noise), clamp_u8(base * 0.8 - wave + noise),
                clamp_u8(255.0 - base + noise));
    }
  }
  return f;
}

RoiAnnotation make_roi(const BBox& box, double confidence) {
  RoiAnnotation roi;
  roi.bbox = box;
  roi.confidence = confidence;
  for (int k = 0; k < kKeypointCount; ++k) {
    roi.keypoints[k] = {box.x_min + (k % 4 + 0.5) * box.width() / 4.0,
                        box.y_min + (k / 4 + 0.5) * box.height() / 5.0, 0.25 + 0.04 * k};
  }
  return roi;
}

KeyMaterial test_key(std::uint8_t salt) {
  std::array<std::uint8_t, 16> bytes{};
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<std::uint8_t>(0x10 * i + 0x0f + salt);
  }
  return KeyMaterial(bytes, KeyOrigin::kCliFlag);
}

std::string source_file_name(const std::string& class_label, int group, int clip) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "v_%s_g%02d_c%02d.avi", class_label.c_str(), group, clip);
  return buf;
}

namespace {

ClipRecord metadata_record(int serial, const std::string& cls, int group, int clip) {
  ClipRecord r;
  char id[16];
  std::snprintf(id, sizeof id, "%05d", serial);
  r.video_id = id;
  r.source_file = source_file_name(cls, group, clip);
  r.class_label = cls;
  r.group_id = group;
  r.split = assign_split(group);
  r.source_fps = 25.0;
  r.total_frames = 120;
  r.detection_rate = 1.0;
  r.roi_bbox_mean = BBox{40, 20, 180, 210};
  return r;
}

std::vector<int> spread(int total, int slots) {
  std::vector<int> out(slots, total / slots);
  for (int i = 0; i < total % slots; ++i) out[i]++;
  return out;
}

}  // namespace

std::vector<ClipRecord> table_conformant_records() {
  static const std::vector<std::pair<std::string, int>> kCounts = {
      {"BrushingTeeth", 131}, {"Haircut", 130},          {"MoppingFloor", 110},
      {"ApplyEyeMakeup", 145}, {"BabyCrawling", 132},    {"ShavingBeard", 161},
      {"BodyWeightSquats", 112}, {"Lunges", 127},        {"TaiChi", 100},
      {"JumpRope", 144},      {"WritingOnBoard", 152},   {"WallPushups", 130},
      {"JumpingJack", 123},   {"CleanAndJerk", 112},     {"WalkingWithDog", 123}};
  constexpr int kTestTotal = 480;
  int total = 0;
  for (const auto& [_, n] : kCounts) total += n;
  // Largest-remainder apportionment of the 480 test clips across classes.
  std::vector<int> test(kCounts.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < kCounts.size(); ++i) {
    const double exact = static_cast<double>(kCounts[i].second) * kTestTotal / total;
    test[i] = static_cast<int>(exact);
    assigned += test[i];
    remainders.emplace_back(exact - test[i], i);
  }
  std::sort(remainders.rbegin(), remainders.rend());
  for (int k = 0; k < kTestTotal - assigned; ++k) test[remainders[k].second]++;

  std::vector<ClipRecord> out;
  int serial = 1;
  for (std::size_t i = 0; i < kCounts.size(); ++i) {
    const auto& [cls, n] = kCounts[i];
    const auto train = spread(n - test[i], kLastTrainGroup);
    const auto tst = spread(test[i], kGroupCount - kLastTrainGroup);
    for (int g = 1; g <= kGroupCount; ++g) {
      const int clips = g <= kLastTrainGroup ? train[g - 1] : tst[g - kLastTrainGroup - 1];
      for (int c = 1; c <= clips; ++c) out.push_back(metadata_record(serial++, cls, g, c));
    }
  }
  return out;
}

std::vector<ClipRecord> grid_records(int classes, int groups, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ClipRecord> out;
  int serial = 1;
  for (int k = 0; k < classes; ++k) {
    const std::string cls = k < static_cast<int>(default_class_list().size())
                                ? default_class_list()[k]
                                : "Class" + std::to_string(k);
    for (int g = 1; g <= groups; ++g) {
      const int clips = 1 + static_cast<int>(rng() % 4);
      for (int c = 1; c <= clips; ++c) {
        ClipRecord r = metadata_record(serial++, cls, g, c);
        FrameAnnotations ann(kClipFrames);
        for (int f = 0; f < kClipFrames; ++f) {
          if (rng() % 5 == 0) continue;
          const int x = 10 + static_cast<int>(rng() % 60);
          const int y = 10 + static_cast<int>(rng() % 60);
          ann[f] = make_roi({x, y, x + 60 + static_cast<int>(rng() % 80),
                             y + 60 + static_cast<int>(rng() % 80)});
        }
        r.detection_rate = detection_rate(ann).value();
        r.roi_bbox_mean = mean_bbox(ann);
        r.annotations = std::move(ann);
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

std::vector<ClipRecord> write_fixture_corpus(const fs::path& root, const FixtureOptions& o) {
  std::mt19937_64 rng(o.seed);
  std::vector<ClipRecord> records;
  const auto& classes = default_class_list();
  for (int i = 0; i < o.clips; ++i) {
    const std::string cls = classes[i % classes.size()];
    const int group = 1 + (i * 11) % kGroupCount;
    ClipRecord r = metadata_record(i + 1, cls, group, 1 + i / 3);
    const int lengths[] = {40, 32, 20, 47};
    r.total_frames = lengths[i % 4];

    FrameAnnotations ann(kClipFrames);
    const int bx = 20 + static_cast<int>(rng() % 40);
    const int by = 16 + static_cast<int>(rng() % 40);
    const int bw = 70 + static_cast<int>(rng() % 80);
    const int bh = 80 + static_cast<int>(rng() % 70);
    for (int f = 0; f < kClipFrames; ++f) {
      if (i == 3) continue;                        // never detected
      if (i % 2 == 0 && f % 7 == 3) continue;      // sporadic misses
      if (i == 1 && f < 8) {
        ann[f] = make_roi({100, 100, 109, 108});   // below the SSIM window
        continue;
      }
      const int dx = (f * 3) % 11;
      const int dy = (f * 5) % 9;
      ann[f] = make_roi({bx + dx, by + dy, std::min(224, bx + dx + bw), std::min(224, by + dy + bh)},
                        0.5 + 0.4 * ((f + i) % 5) / 4.0);
    }
    r.detection_rate = detection_rate(ann).value();
    r.roi_bbox_mean = mean_bbox(ann);
    r.annotations = std::move(ann);

    for (int f = 0; f < r.total_frames; ++f) {
      const Frame frame = textured_frame(o.seed * 1000003 + i * 101 + f, o.source_width,
                                         o.source_height);
      char name[32];
      std::snprintf(name, sizeof name, "img_%04d.png", f + 1);
      write_bytes(root / "frames" / r.video_id / name, encode_png(frame));
    }
    records.push_back(std::move(r));
  }
  write_text(root / "annotations.json", serialize_annotations(records));
  if (o.with_changelog) write_text(root / "CHANGELOG.md", "# Changelog\n\n## 1.0.0\n- fixture\n");
  if (o.with_poses) {
    for (const auto& r : records) {
      write_text(root / "Estimated_Poses" / (r.video_id + ".json"),
                 "{\"video_id\": \"" + r.video_id + "\", \"frames\": []}\n");
    }
  }
  return records;
}

fs::path scratch_dir(const std::string& tag) {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() /
                       ("privtier_" + tag + "_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace privtier::fixture
