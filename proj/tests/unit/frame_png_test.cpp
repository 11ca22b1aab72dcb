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

#include <cmath>
#include <random>

#include "fixture.hpp"
#include "oracles.hpp"
#include "privtier/error.hpp"
#include "privtier/frame.hpp"
#include "privtier/png_io.hpp"

using namespace privtier;

TEST(Frame, RejectsEmpty) {
  EXPECT_THROW(Frame(0, 4), DomainError);
  EXPECT_THROW(resize_frame(Frame(4, 4), 0, 4), DomainError);
}

TEST(Resize, ConstantColour) {
  Frame src(320, 240);
  for (int y = 0; y < 240; ++y) {
    for (int x = 0; x < 320; ++x) src.set_rgb(x, y, 12, 200, 77);
  }
  const Frame out = resize_frame(src, 224, 224);
  ASSERT_EQ(out.width, 224);
  for (int y = 0; y < 224; ++y) {
    for (int x = 0; x < 224; ++x) {
      ASSERT_EQ(out.at(x, y, 0), 12);
      ASSERT_EQ(out.at(x, y, 1), 200);
      ASSERT_EQ(out.at(x, y, 2), 77);
    }
  }
}

TEST(Resize, UnitScaleIsIdentity) {
  std::mt19937_64 rng(1);
  const Frame src = fixture::random_frame(rng, 224, 224);
  EXPECT_EQ(resize_frame(src, 224, 224), src);
}

TEST(Resize, TwoByTwoUpsample) {
  Frame src(2, 2);
  const std::uint8_t corners[4] = {0, 255, 255, 0};
  for (int i = 0; i < 4; ++i) src.set_rgb(i % 2, i / 2, corners[i], corners[i], corners[i]);
  const Frame out = resize_frame(src, 4, 4);
  // Source coordinates along each axis are {0, 0.25, 0.75, 1}.
  const double t[4] = {0.0, 0.25, 0.75, 1.0};
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      const double v = 255.0 * (t[x] + t[y] - 2.0 * t[x] * t[y]);
      EXPECT_EQ(out.at(x, y, 0), static_cast<int>(std::floor(v + 0.5))) << x << "," << y;
    }
  }
}

TEST(Resize, MatchesBilinearOracle) {
  std::mt19937_64 rng(2);
  const Frame src = fixture::random_frame(rng, 80, 60);
  const Frame out = resize_frame(src, 224, 224);
  for (int y = 0; y < 224; y += 3) {
    for (int x = 0; x < 224; x += 5) {
      for (int c = 0; c < 3; ++c) {
        ASSERT_NEAR(out.at(x, y, c), oracle::bilinear(src, 224, 224, x, y, c), 0.5 + 1e-9);
      }
    }
  }
}

TEST(Png, RoundTripAndDeterminism) {
  std::mt19937_64 rng(3);
  const Frame f = fixture::random_frame(rng, 37, 19);
  const auto bytes = encode_png(f);
  EXPECT_EQ(bytes, encode_png(f));
  EXPECT_EQ(decode_png(bytes), f);
}

TEST(Png, TruncatedIsParseError) {
  std::mt19937_64 rng(4);
  auto bytes = encode_png(fixture::random_frame(rng, 16, 16));
  bytes.resize(bytes.size() / 2);
  EXPECT_THROW(decode_png(bytes), ParseError);
  EXPECT_THROW(read_png("/nonexistent/privtier.png"), IoError);
}
