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

#include "privtier/permute.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>

#include "privtier/digest.hpp"
#include "privtier/error.hpp"

namespace privtier {

KeyMaterial::KeyMaterial(std::span<const std::uint8_t> bytes, KeyOrigin origin)
    : origin_(origin) {
  if (bytes.size() != kSize) {
    throw DomainError(fmt::format("AES-128 key must be {} bytes, got {}", kSize,
                                  bytes.size()));
  }
  std::copy(bytes.begin(), bytes.end(), key_.begin());
}

KeyMaterial KeyMaterial::from_hex(std::string_view hex, KeyOrigin origin) {
  if (hex.size() != 2 * kSize) {
    throw DomainError(fmt::format("key must be {} hex characters, got {}",
                                  2 * kSize, hex.size()));
  }
  const auto bytes = privtier::from_hex(hex);
  return KeyMaterial(bytes, origin);
}

KeyMaterial KeyMaterial::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open key file", path.string());
  const std::string content((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
  if (content.size() == kSize) {
    return KeyMaterial(
        std::span(reinterpret_cast<const std::uint8_t*>(content.data()), kSize),
        KeyOrigin::kKeyFile);
  }
  auto first = std::find_if_not(content.begin(), content.end(),
                                [](unsigned char c) { return std::isspace(c); });
  auto last = std::find_if_not(content.rbegin(), content.rend(),
                               [](unsigned char c) { return std::isspace(c); })
                  .base();
  if (first >= last) throw DomainError("key file is empty");
  return from_hex(std::string_view(&*first, static_cast<std::size_t>(last - first)),
                  KeyOrigin::kKeyFile);
}

std::string KeyMaterial::fingerprint() const { return to_hex(sha256(key_)); }

std::string_view to_string(PermutationGenerator generator) {
  return generator == PermutationGenerator::kAesCtr ? "aes_ctr" : "csprng_fallback";
}

Nonce derive_nonce(std::string_view video_id, std::uint64_t frame_index,
                   std::uint32_t block_size) {
  const std::string preimage =
      fmt::format("{}|{}|{}", video_id, frame_index, block_size);
  const Sha256Digest digest = sha256(preimage);
  Nonce nonce{};
  std::copy_n(digest.begin(), nonce.size(), nonce.begin());
  return nonce;
}

std::uint32_t ByteStream::next_word_be() {
  std::array<std::uint8_t, 4> b{};
  read(b);
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

namespace {

constexpr std::size_t kAesBlock = 16;
constexpr std::size_t kBlocksPerRefill = 64;

void put_u64_be(std::uint64_t value, std::uint8_t* out) {
  for (int i = 7; i >= 0; --i) {
    out[i] = static_cast<std::uint8_t>(value & 0xff);
    value >>= 8;
  }
}

}  // namespace

struct AesCtrStream::Cipher {
  EVP_CIPHER_CTX* ctx = nullptr;
  ~Cipher() { EVP_CIPHER_CTX_free(ctx); }
};

AesCtrStream::AesCtrStream(const KeyMaterial& key, const Nonce& nonce)
    : cipher_(std::make_unique<Cipher>()), nonce_(nonce) {
  cipher_->ctx = EVP_CIPHER_CTX_new();
  if (cipher_->ctx == nullptr ||
      EVP_EncryptInit_ex(cipher_->ctx, EVP_aes_128_ecb(), nullptr,
                         key.bytes().data(), nullptr) != 1) {
    throw InternalFault("AES-128 initialisation failed");
  }
  EVP_CIPHER_CTX_set_padding(cipher_->ctx, 0);
}

AesCtrStream::~AesCtrStream() = default;

void AesCtrStream::refill() {
  std::vector<std::uint8_t> counters(kBlocksPerRefill * kAesBlock);
  for (std::size_t b = 0; b < kBlocksPerRefill; ++b) {
    std::uint8_t* block = counters.data() + b * kAesBlock;
    std::copy(nonce_.begin(), nonce_.end(), block);
    put_u64_be(counter_++, block + nonce_.size());
  }
  buffer_.resize(counters.size());
  int produced = 0;
  if (EVP_EncryptUpdate(cipher_->ctx, buffer_.data(), &produced, counters.data(),
                        static_cast<int>(counters.size())) != 1 ||
      produced != static_cast<int>(counters.size())) {
    throw InternalFault("AES-128 block encryption failed");
  }
  cursor_ = 0;
}

void AesCtrStream::read(std::span<std::uint8_t> out) {
  std::size_t written = 0;
  while (written < out.size()) {
    if (cursor_ == buffer_.size()) refill();
    const std::size_t take = std::min(out.size() - written, buffer_.size() - cursor_);
    std::copy_n(buffer_.begin() + static_cast<std::ptrdiff_t>(cursor_), take,
                out.begin() + static_cast<std::ptrdiff_t>(written));
    cursor_ += take;
    written += take;
  }
}

HashChainStream::HashChainStream(const KeyMaterial& key, const Nonce& nonce)
    : nonce_(nonce) {
  std::copy(key.bytes().begin(), key.bytes().end(), key_.begin());
}

void HashChainStream::read(std::span<std::uint8_t> out) {
  std::size_t written = 0;
  while (written < out.size()) {
    if (cursor_ == block_.size()) {
      std::array<std::uint8_t, 8> counter{};
      put_u64_be(counter_++, counter.data());
      block_ = Sha256().update(key_).update(nonce_).update(counter).finish();
      cursor_ = 0;
    }
    const std::size_t take = std::min(out.size() - written, block_.size() - cursor_);
    std::copy_n(block_.begin() + static_cast<std::ptrdiff_t>(cursor_), take,
                out.begin() + static_cast<std::ptrdiff_t>(written));
    cursor_ += take;
    written += take;
  }
}

std::vector<std::uint8_t> keystream(const KeyMaterial& key, const Nonce& nonce,
                                    std::size_t length) {
  if (length == 0) throw DomainError("keystream length must be positive");
  std::vector<std::uint8_t> out(length);
  AesCtrStream stream(key, nonce);
  stream.read(out);
  return out;
}

std::vector<std::uint32_t> BlockPermutation::inverse() const {
  std::vector<std::uint32_t> inv(mapping.size());
  for (std::size_t i = 0; i < mapping.size(); ++i) {
    inv[mapping[i]] = static_cast<std::uint32_t>(i);
  }
  return inv;
}

BlockPermutation permutation_from_stream(std::size_t n, ByteStream& stream,
                                         PermutationGenerator generator) {
  if (n == 0) throw DomainError("permutation size must be positive");
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw DomainError("permutation size exceeds 32-bit range");
  }
  BlockPermutation perm;
  perm.generator = generator;
  perm.mapping.resize(n);
  std::iota(perm.mapping.begin(), perm.mapping.end(), 0u);

  constexpr std::uint64_t kRange = std::uint64_t{1} << 32;
  for (std::size_t i = n - 1; i >= 1; --i) {
    const std::uint64_t bound = static_cast<std::uint64_t>(i) + 1;
    const std::uint64_t limit = (kRange / bound) * bound;
    std::uint64_t word = stream.next_word_be();
    int rejections = 0;
    while (word >= limit) {
      if (++rejections > kMaxRejectionsPerDraw) {
        throw InternalFault("rejection sampling exceeded its iteration cap");
      }
      word = stream.next_word_be();
    }
    const std::size_t j = static_cast<std::size_t>(word % bound);
    std::swap(perm.mapping[i], perm.mapping[j]);
  }
  return perm;
}

BlockPermutation aes_ctr_permutation(std::size_t n, const PermutationSeed& seed,
                                     const KeyMaterial& key) {
  AesCtrStream stream(key, derive_nonce(seed.video_id, seed.frame_index,
                                        seed.block_size));
  return permutation_from_stream(n, stream, PermutationGenerator::kAesCtr);
}

BlockPermutation csprng_fallback_permutation(std::size_t n,
                                             const PermutationSeed& seed,
                                             const KeyMaterial& key) {
  HashChainStream stream(key, derive_nonce(seed.video_id, seed.frame_index,
                                           seed.block_size));
  return permutation_from_stream(n, stream, PermutationGenerator::kCsprngFallback);
}

BlockPermutation derive_permutation(std::size_t n, const PermutationSeed& seed,
                                    const KeyMaterial& key,
                                    PermutationGenerator generator) {
  return generator == PermutationGenerator::kAesCtr
             ? aes_ctr_permutation(n, seed, key)
             : csprng_fallback_permutation(n, seed, key);
}

}  // namespace privtier
