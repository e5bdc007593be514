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

// Distributed comparison function: keys (k0, k1) for F(x) = beta * 1{x < alpha}
// whose local evaluations sum to F(x) in Z_{2^w}. w = 1 gives Boolean
// (XOR) shares.
//
// Tree construction with per-level correction words (seed, two control bits,
// output-group value) and one final output correction.

#ifndef SSINFER_FSS_HPP_
#define SSINFER_FSS_HPP_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ssinfer/ring.hpp"
#include "ssinfer/rng.hpp"
#include "ssinfer/transport.hpp"

namespace ssinfer {

struct SecurityParams {
  int kappa = 128;            // seed bits: 64 (tests only) or 128
  std::uint8_t prg_id = 1;    // 1 = fixed-key AES-128 in MMO mode

  void Validate() const;
  friend bool operator==(const SecurityParams&, const SecurityParams&) = default;
};

// Length-expanding PRG for the tree walk: one call produces both children
// (seed, control bit, output word) from a kappa-bit seed.
class Prg {
 public:
  struct Children {
    uint128 seed[2];
    std::uint8_t t[2];
    std::uint64_t v[2];
  };

  explicit Prg(const SecurityParams& sec);
  ~Prg();
  Prg(const Prg&) = delete;
  Prg& operator=(const Prg&) = delete;

  Children Expand(uint128 seed);
  std::uint64_t expansions() const { return expansions_; }
  void reset_expansions() { expansions_ = 0; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  uint128 seed_mask_;
  std::uint64_t expansions_ = 0;
};

struct DcfCorrection {
  uint128 seed = 0;
  std::uint8_t t_left = 0;
  std::uint8_t t_right = 0;
  Word value = 0;

  friend bool operator==(const DcfCorrection&, const DcfCorrection&) = default;
};

struct DcfKey {
  Party party = Party::kClient;
  int kappa = 128;
  int in_bits = 0;
  int out_bits = 1;  // output group Z_{2^out_bits}
  uint128 root_seed = 0;
  std::vector<DcfCorrection> correction_words;  // one per input bit, MSB first
  Word final_correction = 0;

  // kappa + in_bits * (kappa + 2 + out_bits) + out_bits.
  std::size_t BodyBits() const;
  // 5-byte header (party, kappa LE16, in_bits, out_bits) then the body packed
  // LSB-first: root seed, per level (seed, t_left, t_right, value), final.
  Bytes Serialize() const;
  static DcfKey Deserialize(std::span<const std::uint8_t> bytes);
  std::size_t SerializedBytes() const { return 5 + (BodyBits() + 7) / 8; }

  friend bool operator==(const DcfKey&, const DcfKey&) = default;
};

// Requires 1 <= in_bits <= 64, alpha < 2^in_bits, 1 <= out_bits <= 64.
std::pair<DcfKey, DcfKey> GenDcf(const SecurityParams& sec, Word alpha,
                                 Word beta, int in_bits, int out_bits, Rng& rng,
                                 Prg& prg);
std::pair<DcfKey, DcfKey> GenDcf(const SecurityParams& sec, Word alpha,
                                 Word beta, int in_bits, int out_bits, Rng& rng);

// One party's share of beta * 1{x < alpha}; in_bits PRG expansions.
Word EvalDcf(const DcfKey& key, Word x, Prg& prg);

}  // namespace ssinfer

#endif  // SSINFER_FSS_HPP_
