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
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "fixture.hpp"
#include "oracles.hpp"
#include "privtier/digest.hpp"
#include "privtier/error.hpp"
#include "privtier/permute.hpp"

using namespace privtier;

namespace {

KeyMaterial zero_key() {
  const std::array<std::uint8_t, 16> z{};
  return KeyMaterial(z, KeyOrigin::kCliFlag);
}

class VectorStream final : public ByteStream {
 public:
  explicit VectorStream(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}
  void read(std::span<std::uint8_t> out) override {
    for (auto& b : out) b = bytes_.at(pos_++);
  }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

bool is_bijection(const std::vector<std::uint32_t>& m) {
  std::vector<std::uint32_t> s = m;
  std::sort(s.begin(), s.end());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != i) return false;
  }
  return true;
}

}  // namespace

TEST(Key, LengthAndHex) {
  EXPECT_THROW(KeyMaterial(std::vector<std::uint8_t>(15), KeyOrigin::kCliFlag), DomainError);
  EXPECT_THROW(KeyMaterial::from_hex("00112233", KeyOrigin::kCliFlag), DomainError);
  const auto k = KeyMaterial::from_hex("000102030405060708090a0b0c0d0e0f", KeyOrigin::kEnvVar);
  EXPECT_EQ(k.bytes()[15], 0x0f);
  EXPECT_EQ(k.origin(), KeyOrigin::kEnvVar);
  EXPECT_EQ(k.fingerprint(), to_hex(sha256(k.bytes())));
}

TEST(Key, FromFileHexOrRaw) {
  const auto dir = fixture::scratch_dir("key");
  std::ofstream(dir / "hex.key") << "  000102030405060708090a0b0c0d0e0f\n";
  std::array<char, 16> raw{};
  for (int i = 0; i < 16; ++i) raw[i] = static_cast<char>(i);
  std::ofstream(dir / "raw.key", std::ios::binary).write(raw.data(), 16);
  std::ofstream(dir / "bad.key") << "short";
  const auto a = KeyMaterial::from_file(dir / "hex.key");
  const auto b = KeyMaterial::from_file(dir / "raw.key");
  EXPECT_TRUE(std::equal(a.bytes().begin(), a.bytes().end(), b.bytes().begin()));
  EXPECT_EQ(a.origin(), KeyOrigin::kKeyFile);
  EXPECT_THROW(KeyMaterial::from_file(dir / "bad.key"), Error);
  EXPECT_THROW(KeyMaterial::from_file(dir / "missing.key"), Error);
}

TEST(Nonce, MatchesPreimageDigest) {
  const Nonce n = derive_nonce("00001", 0, 8);
  const auto d = oracle::sha256("00001|0|8");
  EXPECT_TRUE(std::equal(n.begin(), n.end(), d.begin()));
  EXPECT_EQ(derive_nonce("00001", 0, 8), n);
  EXPECT_NE(derive_nonce("00001", 1, 8), n);
  EXPECT_NE(derive_nonce("00001", 0, 16), n);
}

TEST(Nonce, DistinctAcrossFrames) {
  std::set<Nonce> seen;
  for (std::uint64_t f = 0; f < 5000; ++f) EXPECT_TRUE(seen.insert(derive_nonce("v", f, 8)).second);
}

TEST(Keystream, AesKnownAnswer) {
  const Nonce zero{};
  EXPECT_EQ(to_hex(keystream(zero_key(), zero, 16)), "66e94bd4ef8a2c3b884cfa59ca342b2e");
  EXPECT_EQ(keystream(zero_key(), zero, 1), std::vector<std::uint8_t>{0x66});
  EXPECT_THROW(keystream(zero_key(), zero, 0), DomainError);
}

TEST(Keystream, SecondBlockIsCounterOne) {
  const Nonce zero{};
  const auto ks = keystream(zero_key(), zero, 32);
  std::array<std::uint8_t, 16> block{};
  block[15] = 1;
  const auto expect = oracle::aes_block(zero_key().bytes(), block);
  EXPECT_TRUE(std::equal(expect.begin(), expect.end(), ks.begin() + 16));
}

TEST(Keystream, MatchesNativeCtrMode) {
  const KeyMaterial key = fixture::test_key(3);
  const Nonce n = derive_nonce("clip", 9, 4);
  for (std::size_t len : {1u, 15u, 16u, 17u, 1000u, 5000u}) {
    EXPECT_EQ(keystream(key, n, len), oracle::aes_ctr_keystream(key.bytes(), n, 0, len)) << len;
  }
}

TEST(Shuffle, HandRunFourElements) {
  // Words: 7 (7 % 4 = 3), 0xFFFFFFFF (rejected for m=3), 5 (5 % 3 = 2), 1 (1 % 2 = 1).
  const std::vector<std::uint8_t> bytes = {0, 0, 0, 7, 0xff, 0xff, 0xff, 0xff,
                                           0, 0, 0, 5, 0, 0, 0, 1};
  VectorStream s(bytes);
  const auto p = permutation_from_stream(4, s);
  // i=3,j=3: [0,1,2,3]; i=2,j=2: unchanged; i=1,j=1: unchanged.
  EXPECT_EQ(p.mapping, (std::vector<std::uint32_t>{0, 1, 2, 3}));
  const std::vector<std::uint8_t> bytes2 = {0, 0, 0, 4, 0, 0, 0, 4, 0, 0, 0, 0};
  VectorStream s2(bytes2);
  // i=3,j=0: [3,1,2,0]; i=2,j=1: [3,2,1,0]; i=1,j=0: [2,3,1,0].
  EXPECT_EQ(permutation_from_stream(4, s2).mapping, (std::vector<std::uint32_t>{2, 3, 1, 0}));
}

TEST(Shuffle, AesPathMatchesOracle) {
  const KeyMaterial key = fixture::test_key();
  for (std::size_t n : {2u, 4u, 49u, 196u, 3136u}) {
    const PermutationSeed seed{"00042", 7, 8};
    const auto ks = oracle::aes_ctr_keystream(key.bytes(), derive_nonce("00042", 7, 8), 0, 8 * n + 64);
    EXPECT_EQ(aes_ctr_permutation(n, seed, key).mapping, oracle::fisher_yates(n, ks)) << n;
  }
}

TEST(Shuffle, SingletonAndEmpty) {
  const KeyMaterial key = fixture::test_key();
  for (auto g : {PermutationGenerator::kAesCtr, PermutationGenerator::kCsprngFallback}) {
    const auto p = derive_permutation(1, {"x", 0, 8}, key, g);
    EXPECT_EQ(p.mapping, std::vector<std::uint32_t>{0});
    EXPECT_EQ(p.generator, g);
  }
  EXPECT_THROW(aes_ctr_permutation(0, {"x", 0, 8}, key), DomainError);
}

TEST(Shuffle, RejectionCapRaisesInternalFault) {
  VectorStream s(std::vector<std::uint8_t>(4 * 1100, 0xff));
  EXPECT_THROW(permutation_from_stream(3, s), InternalFault);
}

TEST(Shuffle, Bijective) {
  const KeyMaterial key = fixture::test_key();
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng() % 10000;
    const auto p = aes_ctr_permutation(n, {"v" + std::to_string(t), rng() % 64, 8}, key);
    ASSERT_EQ(p.size(), n);
    ASSERT_TRUE(is_bijection(p.mapping));
    const auto inv = p.inverse();
    for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(inv[p.mapping[i]], i);
  }
}

TEST(Shuffle, FallbackDiffersAndIsDeterministic) {
  const KeyMaterial key = fixture::test_key();
  const PermutationSeed seed{"00001", 0, 8};
  const auto a = csprng_fallback_permutation(196, seed, key);
  const auto b = csprng_fallback_permutation(196, seed, key);
  const auto c = aes_ctr_permutation(196, seed, key);
  EXPECT_EQ(a.mapping, b.mapping);
  EXPECT_NE(a.mapping, c.mapping);
  EXPECT_EQ(a.generator, PermutationGenerator::kCsprngFallback);
  EXPECT_EQ(c.generator, PermutationGenerator::kAesCtr);
  EXPECT_TRUE(is_bijection(a.mapping));
}

TEST(Shuffle, FallbackStreamIsHashChain) {
  const KeyMaterial key = fixture::test_key();
  const Nonce nonce = derive_nonce("a", 1, 4);
  HashChainStream s(key, nonce);
  std::vector<std::uint8_t> got(64);
  s.read(got);
  for (std::uint64_t j = 0; j < 2; ++j) {
    std::string pre(key.bytes().begin(), key.bytes().end());
    pre.append(nonce.begin(), nonce.end());
    for (int i = 7; i >= 0; --i) pre.push_back(static_cast<char>(j >> (8 * i)));
    const auto d = oracle::sha256(pre);
    EXPECT_TRUE(std::equal(d.begin(), d.end(), got.begin() + 32 * j)) << j;
  }
}

TEST(Shuffle, UniformOverFourElements) {
  const KeyMaterial key = fixture::test_key();
  constexpr int kTrials = 100000;
  std::map<std::vector<std::uint32_t>, int> counts;
  for (int t = 0; t < kTrials; ++t) {
    counts[aes_ctr_permutation(4, {"u", static_cast<std::uint64_t>(t), 4}, key).mapping]++;
  }
  ASSERT_EQ(counts.size(), 24u);
  const double p = 1.0 / 24.0;
  const double mean = kTrials * p;
  const double sigma = std::sqrt(kTrials * p * (1 - p));
  for (const auto& [perm, c] : counts) EXPECT_NEAR(c, mean, 5 * sigma);
}
