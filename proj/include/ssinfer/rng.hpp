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

#ifndef SSINFER_RNG_HPP_
#define SSINFER_RNG_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <string_view>

namespace ssinfer {

using uint128 = unsigned __int128;

// Deterministic cryptographic randomness: AES-128 in counter mode, keyed by
// SHA-256(seed || label). Two Rng objects built from the same (seed, label)
// produce the same stream. Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::string_view label = "");
  ~Rng();
  Rng(Rng&&) noexcept;
  Rng& operator=(Rng&&) noexcept;
  Rng(const Rng&) = delete;
  Rng& operator=(const Rng&) = delete;

  // Independent child stream; deterministic in (parent key, label).
  Rng Derive(std::string_view label) const;

  std::uint64_t NextU64();
  uint128 NextU128();
  std::uint8_t NextBit() { return static_cast<std::uint8_t>(NextU64() & 1); }
  // Uniform in [0, 2^bits), bits in [1, 64].
  std::uint64_t Bits(int bits);
  // Uniform double in [lo, hi).
  double Uniform(double lo, double hi);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return NextU64(); }

 private:
  Rng(const std::array<std::uint8_t, 32>& digest);
  void Refill();

  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::array<std::uint8_t, 32> key_material_{};
  std::array<std::uint64_t, 64> buffer_{};
  std::size_t pos_ = 64;
};

}  // namespace ssinfer

#endif  // SSINFER_RNG_HPP_
