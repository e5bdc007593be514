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

// Arithmetic over Z_{2^l}, fixed-point encoding, and 2-out-of-2 additive
// sharing. Ring elements are stored in a uint64_t and always kept reduced.

#ifndef SSINFER_RING_HPP_
#define SSINFER_RING_HPP_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ssinfer {

class Rng;

using Word = std::uint64_t;

// Party 0 is the client (data owner), party 1 the server (model owner).
enum class Party : std::uint8_t { kClient = 0, kServer = 1 };

inline int Index(Party p) { return static_cast<int>(p); }
inline Party Other(Party p) {
  return p == Party::kClient ? Party::kServer : Party::kClient;
}

struct RingParams {
  int bits = 32;  // l, one of 8, 16, 32, 64
  int frac = 8;   // f, fixed-point fraction bits

  // Throws kConfig unless l is supported and 1 <= f < l (f = 16 requires
  // l = 64).
  void Validate() const;

  Word mask() const { return bits == 64 ? ~Word{0} : (Word{1} << bits) - 1; }
  Word half() const { return Word{1} << (bits - 1); }
  int bytes() const { return bits / 8; }
  Word Reduce(Word v) const { return v & mask(); }

  friend bool operator==(const RingParams&, const RingParams&) = default;
};

struct RingElement {
  Word value = 0;
  friend bool operator==(const RingElement&, const RingElement&) = default;
};

struct ArithShare {
  Party party = Party::kClient;
  RingElement value;
};

struct BoolShare {
  Party party = Party::kClient;
  std::uint8_t bit = 0;
};

// Two's complement view of a reduced ring element.
std::int64_t ToSigned(Word v, const RingParams& ring);
Word FromSigned(std::int64_t v, const RingParams& ring);
// floor(signed(v) / 2^shift), re-embedded in the ring.
Word ArithShift(Word v, int shift, const RingParams& ring);
inline std::uint8_t Msb(Word v, const RingParams& ring) {
  return static_cast<std::uint8_t>((v >> (ring.bits - 1)) & 1);
}

// round(x * 2^f) in two's complement; kOverflow unless |x| < 2^(l-f-1).
RingElement FxEncode(double x, const RingParams& ring);
// Same, at an explicit scale (used for coefficients at 2f and 3f).
RingElement FxEncodeAt(double x, int scale, const RingParams& ring);
double FxDecode(RingElement v, const RingParams& ring);
double FxDecodeAt(Word v, int scale, const RingParams& ring);

// s0 uniform, s1 = x - s0.
std::pair<ArithShare, ArithShare> Share(RingElement x, Rng& rng,
                                        const RingParams& ring);
// kPartyMismatch unless s0 is party 0 and s1 party 1.
RingElement Reconstruct(const ArithShare& s0, const ArithShare& s1,
                        const RingParams& ring);
std::pair<BoolShare, BoolShare> ShareBit(std::uint8_t b, Rng& rng);
std::uint8_t Reconstruct(const BoolShare& b0, const BoolShare& b1);

// Local (non-interactive) probabilistic truncation: party 0 computes
// floor(s0 / 2^f), party 1 computes -floor((2^l - s1) / 2^f). The sum is
// floor(x / 2^f) up to one ulp, except for a wrap event of probability about
// |x| / 2^l.
ArithShare TruncateShare(const ArithShare& s, int f, const RingParams& ring);
Word TruncateShareValue(Party party, Word s, int f, const RingParams& ring);

// --- vector helpers; every output is reduced ------------------------------

using Words = std::vector<Word>;

Words Add(std::span<const Word> a, std::span<const Word> b, const RingParams& ring);
Words Sub(std::span<const Word> a, std::span<const Word> b, const RingParams& ring);
Words Hadamard(std::span<const Word> a, std::span<const Word> b,
               const RingParams& ring);
Words Scale(std::span<const Word> a, Word c, const RingParams& ring);
Words Negate(std::span<const Word> a, const RingParams& ring);
// Row-major (m1 x m2) * (m2 x m3).
Words MatMul(std::span<const Word> a, std::span<const Word> b, std::size_t m1,
             std::size_t m2, std::size_t m3, const RingParams& ring);

// Splits a vector into two uniformly random shares.
std::pair<Words, Words> ShareVector(std::span<const Word> x, Rng& rng,
                                   const RingParams& ring);
Words ReconstructVector(std::span<const Word> s0, std::span<const Word> s1,
                        const RingParams& ring);
Words UniformVector(std::size_t n, Rng& rng, const RingParams& ring);

}  // namespace ssinfer

#endif  // SSINFER_RING_HPP_
