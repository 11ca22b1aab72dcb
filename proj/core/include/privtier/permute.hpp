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

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace privtier {

enum class KeyOrigin { kCliFlag, kEnvVar, kKeyFile };

/// AES-128 key. Never serialized; use fingerprint() for audit trails.
class KeyMaterial {
 public:
  static constexpr std::size_t kSize = 16;

  /// Throws DomainError unless `bytes` has exactly 16 entries.
  KeyMaterial(std::span<const std::uint8_t> bytes, KeyOrigin origin);

  /// 32 hex characters.
  static KeyMaterial from_hex(std::string_view hex, KeyOrigin origin);
  /// A key file holds either 16 raw bytes or 32 hex characters (surrounding
  /// whitespace ignored).
  static KeyMaterial from_file(const std::filesystem::path& path);

  std::span<const std::uint8_t, kSize> bytes() const { return key_; }
  KeyOrigin origin() const { return origin_; }
  /// Lowercase hex SHA-256 of the key bytes.
  std::string fingerprint() const;

 private:
  std::array<std::uint8_t, kSize> key_{};
  KeyOrigin origin_;
};

using Nonce = std::array<std::uint8_t, 8>;

enum class PermutationGenerator { kAesCtr, kCsprngFallback };
std::string_view to_string(PermutationGenerator generator);

/// First 8 bytes of SHA-256("<video_id>|<frame_index>|<block_size>").
Nonce derive_nonce(std::string_view video_id, std::uint64_t frame_index,
                   std::uint32_t block_size);

/// Unbounded byte source feeding the shuffle.
class ByteStream {
 public:
  virtual ~ByteStream() = default;
  virtual void read(std::span<std::uint8_t> out) = 0;
  std::uint32_t next_word_be();
};

/// AES-128-CTR: block j = AES_K(nonce || uint64_be(j)), j from 0.
class AesCtrStream final : public ByteStream {
 public:
  AesCtrStream(const KeyMaterial& key, const Nonce& nonce);
  ~AesCtrStream() override;
  AesCtrStream(const AesCtrStream&) = delete;
  AesCtrStream& operator=(const AesCtrStream&) = delete;

  void read(std::span<std::uint8_t> out) override;

 private:
  void refill();

  struct Cipher;
  std::unique_ptr<Cipher> cipher_;
  Nonce nonce_;
  std::uint64_t counter_ = 0;
  std::vector<std::uint8_t> buffer_;
  std::size_t cursor_ = 0;
};

/// Non-canonical fallback: block j = SHA-256(key || nonce || uint64_be(j)).
class HashChainStream final : public ByteStream {
 public:
  HashChainStream(const KeyMaterial& key, const Nonce& nonce);
  void read(std::span<std::uint8_t> out) override;

 private:
  std::array<std::uint8_t, KeyMaterial::kSize> key_;
  Nonce nonce_;
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, 32> block_{};
  std::size_t cursor_ = 32;
};

/// First `length` bytes of the AES-CTR keystream. Throws DomainError if
/// length is zero.
std::vector<std::uint8_t> keystream(const KeyMaterial& key, const Nonce& nonce,
                                    std::size_t length);

struct BlockPermutation {
  /// mapping[i] is the destination slot of block i.
  std::vector<std::uint32_t> mapping;
  PermutationGenerator generator = PermutationGenerator::kAesCtr;

  std::size_t size() const { return mapping.size(); }
  /// inverse()[slot] is the block that landed in `slot`.
  std::vector<std::uint32_t> inverse() const;
};

inline constexpr int kMaxRejectionsPerDraw = 1000;

/// Descending Fisher-Yates over [0, n). Each draw j in [0, i] takes 32-bit
/// big-endian words from `stream`, rejecting w >= floor(2^32/(i+1))*(i+1).
/// Throws DomainError for n == 0 and InternalFault after 1000 rejections.
BlockPermutation permutation_from_stream(
    std::size_t n, ByteStream& stream,
    PermutationGenerator generator = PermutationGenerator::kAesCtr);

struct PermutationSeed {
  std::string video_id;
  std::uint64_t frame_index = 0;
  std::uint32_t block_size = 8;
};

/// Canonical permutation: AES-CTR stream keyed by the derived nonce.
BlockPermutation aes_ctr_permutation(std::size_t n, const PermutationSeed& seed,
                                     const KeyMaterial& key);

/// Same shuffle over the SHA-256 hash chain. Output differs from the AES
/// path and is never canonical.
BlockPermutation csprng_fallback_permutation(std::size_t n,
                                             const PermutationSeed& seed,
                                             const KeyMaterial& key);

BlockPermutation derive_permutation(std::size_t n, const PermutationSeed& seed,
                                    const KeyMaterial& key,
                                    PermutationGenerator generator);

}  // namespace privtier
