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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixture.hpp"
#include "oracles.hpp"
#include "privtier/error.hpp"
#include "privtier/transforms.hpp"

using namespace privtier;

namespace {

Frame constant(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Frame f(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f.set_rgb(x, y, r, g, b);
  }
  return f;
}

bool outside_equal(const Frame& a, const Frame& b, const BBox& region) {
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      if (region.contains(x, y)) continue;
      for (int c = 0; c < 3; ++c) {
        if (a.at(x, y, c) != b.at(x, y, c)) return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST(Window, CentreOfLongSource) {
  const WindowPlan p = center_window(120);
  ASSERT_EQ(p.indices.size(), 32u);
  EXPECT_EQ(p.indices.front(), 44u);
  EXPECT_EQ(p.indices.back(), 75u);
  EXPECT_FALSE(p.padded);
}

TEST(Window, ExactAndShort) {
  const WindowPlan exact = center_window(32);
  for (std::size_t i = 0; i < 32; ++i) EXPECT_EQ(exact.indices[i], i);
  EXPECT_FALSE(exact.padded);
  const WindowPlan shortp = center_window(20);
  ASSERT_EQ(shortp.indices.size(), 32u);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(shortp.indices[i], i);
  for (std::size_t i = 20; i < 32; ++i) EXPECT_EQ(shortp.indices[i], 19u);
  EXPECT_TRUE(shortp.padded);
  EXPECT_THROW(center_window(0), DomainError);
}

TEST(TierSpec, NamesAndValidation) {
  const auto tiers = default_tier_set();
  ASSERT_EQ(tiers.size(), 9u);
  std::vector<std::string> names;
  for (const auto& t : tiers) {
    names.push_back(t.name());
    EXPECT_EQ(tier_from_name(t.name()), t);
  }
  EXPECT_EQ(names, (std::vector<std::string>{"Original", "Tier1_Blur", "Tier2_Edge",
                                             "Tier3_AES_B4", "Tier3_AES_B8", "Tier3_AES_B16",
                                             "Tier3_AES_B4_NoBG", "Tier3_AES_B8_NoBG",
                                             "Tier3_AES_B16_NoBG"}));
  EXPECT_THROW(TierSpec::scramble(1).validate(), ConfigError);
  EXPECT_THROW(TierSpec::edge(150, 50).validate(), ConfigError);
  EXPECT_THROW(TierSpec::blur(0).validate(), ConfigError);
}

TEST(Blur, ConstantRoiUnchanged) {
  const Frame f = constant(64, 64, 90, 10, 200);
  const auto roi = fixture::make_roi({10, 12, 50, 60});
  EXPECT_EQ(tier1_blur(f, roi, 4.0), f);
}

TEST(Blur, OutsideUntouchedAndNullPassthrough) {
  std::mt19937_64 rng(9);
  const Frame f = fixture::random_frame(rng, 96, 80);
  const BBox box{20, 10, 70, 66};
  const Frame out = tier1_blur(f, fixture::make_roi(box), 3.0);
  EXPECT_TRUE(outside_equal(f, out, box));
  EXPECT_NE(out, f);
  EXPECT_EQ(tier1_blur(f, std::nullopt, 3.0), f);
}

TEST(Blur, DegenerateBoxWarns) {
  std::mt19937_64 rng(10);
  const Frame f = fixture::random_frame(rng, 32, 32);
  TransformNotes notes;
  EXPECT_EQ(tier1_blur(f, fixture::make_roi({5, 5, 5, 20}), 2.0, &notes), f);
  EXPECT_FALSE(notes.warnings.empty());
}

TEST(Blur, ImpulseMatchesDenseConvolution) {
  Frame f(96, 96);
  f.set_rgb(48, 48, 255, 255, 255);
  const BBox box{8, 8, 88, 88};
  for (double sigma : {1.0, 2.5, 6.0}) {
    const Frame out = tier1_blur(f, fixture::make_roi(box), sigma);
    for (int y = box.y_min; y < box.y_max; ++y) {
      for (int x = box.x_min; x < box.x_max; ++x) {
        ASSERT_LE(std::abs(out.at(x, y, 0) - oracle::dense_blur(f, x, y, 0, sigma)), 1.0)
            << sigma << " @" << x << "," << y;
      }
    }
  }
}

TEST(Blur, RandomFrameMatchesDenseConvolutionNearBorders) {
  std::mt19937_64 rng(11);
  const Frame f = fixture::random_frame(rng, 40, 36);
  const BBox box{0, 0, 40, 36};
  const Frame out = tier1_blur(f, fixture::make_roi(box), 2.0);
  for (int y = 0; y < 36; y += 5) {
    for (int x = 0; x < 40; x += 3) {
      for (int c = 0; c < 3; ++c) {
        ASSERT_LE(std::abs(out.at(x, y, c) - oracle::dense_blur(f, x, y, c, 2.0)), 1.0);
      }
    }
  }
}

TEST(Blur, MeanIntensityPreserved) {
  std::mt19937_64 rng(17);
  Frame f = fixture::random_frame(rng, 224, 224);
  for (int y = 0; y < 224; ++y) {
    for (int x = 0; x < 224; ++x) {
      // Linear ramp plus bounded noise: the Gaussian reproduces the ramp.
      for (int c = 0; c < 3; ++c) f.at(x, y, c) = static_cast<std::uint8_t>(x / 2 + f.at(x, y, c) / 4);
    }
  }
  const BBox box{60, 60, 164, 164};
  const Frame out = tier1_blur(f, fixture::make_roi(box), 15.0);
  for (int c = 0; c < 3; ++c) {
    double before = 0, after = 0;
    for (int y = box.y_min; y < box.y_max; ++y) {
      for (int x = box.x_min; x < box.x_max; ++x) {
        before += f.at(x, y, c);
        after += out.at(x, y, c);
      }
    }
    EXPECT_LT(std::abs(before - after) / box.area(), 1.0) << c;
  }
}

TEST(Edge, ConstantFrameIsBlack) {
  const Frame f = constant(64, 64, 120, 120, 120);
  const Frame out = tier2_edge(f, fixture::make_roi({0, 0, 64, 64}));
  EXPECT_TRUE(std::all_of(out.pixels.begin(), out.pixels.end(), [](auto v) { return v == 0; }));
}

TEST(Edge, BilevelAndBlackOutside) {
  const Frame f = fixture::textured_frame(3, 128, 96);
  const BBox box{16, 8, 100, 90};
  const Frame out = tier2_edge(f, fixture::make_roi(box));
  int white = 0;
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const int v = out.at(x, y, 0);
      ASSERT_TRUE(v == 0 || v == 255);
      ASSERT_EQ(out.at(x, y, 1), v);
      ASSERT_EQ(out.at(x, y, 2), v);
      if (!box.contains(x, y)) ASSERT_EQ(v, 0);
      white += v == 255;
    }
  }
  EXPECT_GT(white, 0);
  const Frame none = tier2_edge(f, std::nullopt);
  EXPECT_TRUE(std::all_of(none.pixels.begin(), none.pixels.end(), [](auto v) { return v == 0; }));
}

TEST(Edge, VerticalStepGivesSingleLine) {
  Frame f(64, 48);
  for (int y = 0; y < 48; ++y) {
    for (int x = 32; x < 64; ++x) f.set_rgb(x, y, 255, 255, 255);
  }
  const auto ours = canny_edges(f, 50, 150);
  const auto ref = oracle::canny(f, 50, 150);
  auto columns = [&](const std::vector<std::uint8_t>& e, int y) {
    std::vector<int> cols;
    for (int x = 0; x < 64; ++x) {
      if (e[y * 64 + x]) cols.push_back(x);
    }
    return cols;
  };
  for (int y = 0; y < 48; ++y) {
    const auto a = columns(ours, y);
    const auto b = columns(ref, y);
    ASSERT_EQ(a.size(), 1u) << "row " << y;
    ASSERT_EQ(b.size(), 1u) << "row " << y;
    EXPECT_LE(std::abs(a[0] - 32) , 1);
    EXPECT_LE(std::abs(a[0] - b[0]), 1);
  }
}

TEST(Edge, AgreesWithReferenceOnTexture) {
  const Frame f = fixture::textured_frame(21, 96, 96);
  const auto ours = canny_edges(f, 50, 150);
  const auto ref = oracle::canny(f, 50, 150);
  // Tie-breaking differs between integer and float NMS; require that every
  // edge pixel in one map has an edge pixel within one step in the other.
  auto near = [](const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    int miss = 0, total = 0;
    for (int y = 0; y < 96; ++y) {
      for (int x = 0; x < 96; ++x) {
        if (!a[y * 96 + x]) continue;
        ++total;
        bool found = false;
        for (int dy = -1; dy <= 1 && !found; ++dy) {
          for (int dx = -1; dx <= 1 && !found; ++dx) {
            const int nx = x + dx, ny = y + dy;
            found = nx >= 0 && ny >= 0 && nx < 96 && ny < 96 && b[ny * 96 + nx];
          }
        }
        miss += !found;
      }
    }
    return total == 0 ? 1.0 : static_cast<double>(miss) / total;
  };
  EXPECT_LT(near(ours, ref), 0.05);
  EXPECT_LT(near(ref, ours), 0.05);
}

TEST(Grid, AlignmentAndResidual) {
  const BlockGrid g = make_block_grid({10, 20, 45, 39}, 8);
  EXPECT_EQ(g.origin_x, 10);
  EXPECT_EQ(g.origin_y, 20);
  EXPECT_EQ(g.cols, 4);
  EXPECT_EQ(g.rows, 2);
  EXPECT_TRUE(make_block_grid({0, 0, 7, 40}, 8).empty());
}

TEST(Scramble, SingleBlockAndConstantAreIdentity) {
  std::mt19937_64 rng(12);
  const KeyMaterial key = fixture::test_key();
  const ScrambleContext ctx{&key, "00001", 0};
  const Frame f = fixture::random_frame(rng, 64, 64);
  TransformNotes notes;
  EXPECT_EQ(tier3_scramble(f, fixture::make_roi({4, 4, 15, 13}), 8, ctx, &notes), f);
  EXPECT_FALSE(notes.warnings.empty());
  const Frame c = constant(64, 64, 1, 2, 3);
  EXPECT_EQ(tier3_scramble(c, fixture::make_roi({0, 0, 64, 64}), 8, ctx), c);
  EXPECT_EQ(tier3_scramble(f, std::nullopt, 8, ctx), f);
}

TEST(Scramble, InverseRoundTripAndLocality) {
  std::mt19937_64 rng(13);
  const KeyMaterial key = fixture::test_key();
  const Frame f = fixture::random_frame(rng, 100, 90);
  const BBox box{7, 5, 95, 83};
  for (int b : {4, 8, 16}) {
    const ScrambleContext ctx{&key, "00077", 3};
    const Frame out = tier3_scramble(f, fixture::make_roi(box), b, ctx);
    const BlockGrid g = make_block_grid(box, b);
    const BBox region{g.origin_x, g.origin_y, g.origin_x + g.cols * b, g.origin_y + g.rows * b};
    EXPECT_TRUE(outside_equal(f, out, region)) << b;
    BlockPermutation perm =
        aes_ctr_permutation(g.block_count(), {"00077", 3, static_cast<std::uint32_t>(b)}, key);
    BlockPermutation inv{perm.inverse(), perm.generator};
    EXPECT_EQ(permute_blocks(out, g, inv), f) << b;
  }
}

TEST(Scramble, FramesGetDifferentPermutations) {
  const KeyMaterial key = fixture::test_key();
  const Frame f = fixture::textured_frame(5, 64, 64);
  const auto roi = fixture::make_roi({0, 0, 64, 64});
  const Frame a = tier3_scramble(f, roi, 8, {&key, "00001", 0});
  const Frame b = tier3_scramble(f, roi, 8, {&key, "00001", 1});
  EXPECT_NE(a, b);
}

TEST(NoBg, MaskSemantics) {
  std::mt19937_64 rng(14);
  const Frame f = fixture::random_frame(rng, 48, 40);
  EXPECT_EQ(apply_nobg(f, fixture::make_roi({0, 0, 48, 40})), f);
  const Frame black = apply_nobg(f, std::nullopt);
  EXPECT_TRUE(std::all_of(black.pixels.begin(), black.pixels.end(), [](auto v) { return v == 0; }));
  const BBox box{5, 6, 30, 33};
  const Frame out = apply_nobg(f, fixture::make_roi(box));
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 48; ++x) {
      for (int c = 0; c < 3; ++c) {
        ASSERT_EQ(out.at(x, y, c), box.contains(x, y) ? f.at(x, y, c) : 0);
      }
    }
  }
}

TEST(TierSet, NullAnnotationsClip) {
  std::mt19937_64 rng(15);
  const KeyMaterial key = fixture::test_key();
  ClipRecord clip;
  clip.video_id = "00009";
  clip.annotations = FrameAnnotations(32);
  std::vector<Frame> frames;
  for (int i = 0; i < 32; ++i) frames.push_back(fixture::random_frame(rng, 32, 32));
  const auto out = generate_tier_set(clip, frames, key, default_tier_set());
  ASSERT_EQ(out.size(), 9u);
  for (const auto& [name, seq] : out) {
    ASSERT_EQ(seq.size(), 32u);
    const bool blackened = name == "Tier2_Edge" || name.ends_with("_NoBG");
    for (std::size_t i = 0; i < 32; ++i) {
      if (blackened) {
        EXPECT_TRUE(std::all_of(seq[i].pixels.begin(), seq[i].pixels.end(),
                                [](auto v) { return v == 0; }))
            << name;
      } else {
        EXPECT_EQ(seq[i], frames[i]) << name;
      }
    }
  }
}

TEST(TierSet, OriginalOnlyAndNoBgComposition) {
  const KeyMaterial key = fixture::test_key();
  ClipRecord clip;
  clip.video_id = "00010";
  FrameAnnotations ann(32, fixture::make_roi({8, 8, 56, 60}));
  clip.annotations = ann;
  std::vector<Frame> frames;
  for (int i = 0; i < 32; ++i) frames.push_back(fixture::textured_frame(i, 64, 64));
  const auto only = generate_tier_set(clip, frames, key, {TierSpec::original()});
  ASSERT_EQ(only.size(), 1u);
  EXPECT_EQ(only.at("Original"), frames);

  const auto both =
      generate_tier_set(clip, frames, key, {TierSpec::scramble(8), TierSpec::scramble(8, true)});
  for (std::size_t i = 0; i < 32; ++i) {
    EXPECT_EQ(both.at("Tier3_AES_B8_NoBG")[i], apply_nobg(both.at("Tier3_AES_B8")[i], ann[i]));
  }
}
