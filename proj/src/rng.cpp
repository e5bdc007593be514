// Copyright 2026 The ssinfer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ssinfer/rng.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <cstring>
#include <vector>

#include "ssinfer/error.hpp"

namespace ssinfer {

namespace {

std::array<std::uint8_t, 32> Digest(const std::uint8_t* prefix,
                                    std::size_t prefix_len,
                                    std::string_view label) {
  std::vector<std::uint8_t> input(prefix, prefix + prefix_len);
  input.insert(input.end(), label.begin(), label.end());
  std::array<std::uint8_t, 32> out{};
  SHA256(input.data(), input.size(), out.data());
  return out;
}

std::array<std::uint8_t, 32> SeedDigest(std::uint64_t seed,
                                        std::string_view label) {
  std::uint8_t seed_bytes[8];
  for (int i = 0; i < 8; ++i) {
    seed_bytes[i] = static_cast<std::uint8_t>(seed >> (8 * i));
  }
  return Digest(seed_bytes, sizeof(seed_bytes), label);
}

}  // namespace

struct Rng::Impl {
  EVP_CIPHER_CTX* ctx = nullptr;
  ~Impl() { EVP_CIPHER_CTX_free(ctx); }
};

Rng::Rng(std::uint64_t seed, std::string_view label)
    : Rng(SeedDigest(seed, label)) {}

Rng::Rng(const std::array<std::uint8_t, 32>& digest)
    : impl_(std::make_unique<Impl>()), key_material_(digest) {
  impl_->ctx = EVP_CIPHER_CTX_new();
  Require(impl_->ctx != nullptr, ErrorKind::kConfig, "EVP_CIPHER_CTX_new failed");
  // First 16 bytes: AES key; last 16 bytes: initial counter block.
  if (EVP_EncryptInit_ex(impl_->ctx, EVP_aes_128_ctr(), nullptr,
                         key_material_.data(), key_material_.data() + 16) != 1) {
    Fail(ErrorKind::kConfig, "AES-CTR init failed");
  }
}

Rng::~Rng() = default;
Rng::Rng(Rng&&) noexcept = default;
Rng& Rng::operator=(Rng&&) noexcept = default;

Rng Rng::Derive(std::string_view label) const {
  return Rng(Digest(key_material_.data(), key_material_.size(), label));
}

void Rng::Refill() {
  static const std::array<std::uint8_t, sizeof(buffer_)> kZeros{};
  int out_len = 0;
  EVP_EncryptUpdate(impl_->ctx, reinterpret_cast<unsigned char*>(buffer_.data()),
                    &out_len, kZeros.data(), static_cast<int>(kZeros.size()));
  pos_ = 0;
}

std::uint64_t Rng::NextU64() {
  if (pos_ == buffer_.size()) Refill();
  return buffer_[pos_++];
}

uint128 Rng::NextU128() {
  uint128 lo = NextU64();
  uint128 hi = NextU64();
  return (hi << 64) | lo;
}

std::uint64_t Rng::Bits(int bits) {
  std::uint64_t v = NextU64();
  return bits >= 64 ? v : (v & ((std::uint64_t{1} << bits) - 1));
}

double Rng::Uniform(double lo, double hi) {
  // 53 random mantissa bits.
  double unit = static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

}  // namespace ssinfer
