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

#include "ssinfer/ring.hpp"

#include <cmath>
#include <string>

#include "ssinfer/error.hpp"
#include "ssinfer/rng.hpp"

namespace ssinfer {

void RingParams::Validate() const {
  Require(bits == 8 || bits == 16 || bits == 32 || bits == 64,
          ErrorKind::kConfig, "ring bit width must be 8, 16, 32 or 64, got " +
                                  std::to_string(bits));
  Require(frac >= 1 && frac < bits, ErrorKind::kConfig,
          "fraction bits must satisfy 1 <= f < l");
  Require(frac < 16 || bits == 64, ErrorKind::kConfig,
          "f >= 16 is only supported with l = 64");
}

std::int64_t ToSigned(Word v, const RingParams& ring) {
  v = ring.Reduce(v);
  if (ring.bits == 64) return static_cast<std::int64_t>(v);
  if (v >= ring.half()) {
    return static_cast<std::int64_t>(v) - (std::int64_t{1} << ring.bits);
  }
  return static_cast<std::int64_t>(v);
}

Word FromSigned(std::int64_t v, const RingParams& ring) {
  return ring.Reduce(static_cast<Word>(v));
}

Word ArithShift(Word v, int shift, const RingParams& ring) {
  // >> on negative int64 is arithmetic (floor) since C++20.
  return FromSigned(ToSigned(v, ring) >> shift, ring);
}

RingElement FxEncodeAt(double x, int scale, const RingParams& ring) {
  const double limit = std::ldexp(1.0, ring.bits - scale - 1);
  Require(std::isfinite(x) && std::fabs(x) < limit, ErrorKind::kOverflow,
          "value " + std::to_string(x) + " does not fit in l=" +
              std::to_string(ring.bits) + " at scale " + std::to_string(scale));
  const double scaled = std::nearbyint(std::ldexp(x, scale));
  return {FromSigned(static_cast<std::int64_t>(scaled), ring)};
}

RingElement FxEncode(double x, const RingParams& ring) {
  return FxEncodeAt(x, ring.frac, ring);
}

double FxDecodeAt(Word v, int scale, const RingParams& ring) {
  return std::ldexp(static_cast<double>(ToSigned(v, ring)), -scale);
}

double FxDecode(RingElement v, const RingParams& ring) {
  return FxDecodeAt(v.value, ring.frac, ring);
}

std::pair<ArithShare, ArithShare> Share(RingElement x, Rng& rng,
                                        const RingParams& ring) {
  const Word s0 = rng.Bits(ring.bits);
  const Word s1 = ring.Reduce(x.value - s0);
  return {ArithShare{Party::kClient, {s0}}, ArithShare{Party::kServer, {s1}}};
}

RingElement Reconstruct(const ArithShare& s0, const ArithShare& s1,
                        const RingParams& ring) {
  Require(s0.party == Party::kClient && s1.party == Party::kServer,
          ErrorKind::kPartyMismatch,
          "reconstruct needs one share from each party, in order");
  return {ring.Reduce(s0.value.value + s1.value.value)};
}

std::pair<BoolShare, BoolShare> ShareBit(std::uint8_t b, Rng& rng) {
  const std::uint8_t b0 = rng.NextBit();
  return {BoolShare{Party::kClient, b0},
          BoolShare{Party::kServer, static_cast<std::uint8_t>((b & 1) ^ b0)}};
}

std::uint8_t Reconstruct(const BoolShare& b0, const BoolShare& b1) {
  Require(b0.party == Party::kClient && b1.party == Party::kServer,
          ErrorKind::kPartyMismatch,
          "reconstruct needs one share from each party, in order");
  return static_cast<std::uint8_t>((b0.bit ^ b1.bit) & 1);
}

Word TruncateShareValue(Party party, Word s, int f, const RingParams& ring) {
  s = ring.Reduce(s);
  if (party == Party::kClient) return s >> f;
  const Word negated = ring.Reduce(Word{0} - s);
  return ring.Reduce(Word{0} - (negated >> f));
}

ArithShare TruncateShare(const ArithShare& s, int f, const RingParams& ring) {
  return {s.party, {TruncateShareValue(s.party, s.value.value, f, ring)}};
}

namespace {

void CheckSameSize(std::size_t a, std::size_t b) {
  Require(a == b, ErrorKind::kShape,
          "vector size mismatch: " + std::to_string(a) + " vs " +
              std::to_string(b));
}

}  // namespace

Words Add(std::span<const Word> a, std::span<const Word> b, const RingParams& ring) {
  CheckSameSize(a.size(), b.size());
  Words out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = ring.Reduce(a[i] + b[i]);
  return out;
}

Words Sub(std::span<const Word> a, std::span<const Word> b, const RingParams& ring) {
  CheckSameSize(a.size(), b.size());
  Words out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = ring.Reduce(a[i] - b[i]);
  return out;
}

Words Hadamard(std::span<const Word> a, std::span<const Word> b,
               const RingParams& ring) {
  CheckSameSize(a.size(), b.size());
  Words out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = ring.Reduce(a[i] * b[i]);
  return out;
}

Words Scale(std::span<const Word> a, Word c, const RingParams& ring) {
  Words out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = ring.Reduce(a[i] * c);
  return out;
}

Words Negate(std::span<const Word> a, const RingParams& ring) {
  Words out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = ring.Reduce(Word{0} - a[i]);
  return out;
}

Words MatMul(std::span<const Word> a, std::span<const Word> b, std::size_t m1,
             std::size_t m2, std::size_t m3, const RingParams& ring) {
  Require(a.size() == m1 * m2 && b.size() == m2 * m3, ErrorKind::kShape,
          "matmul operand sizes do not match the declared shape");
  Words out(m1 * m3, 0);
  for (std::size_t i = 0; i < m1; ++i) {
    for (std::size_t k = 0; k < m2; ++k) {
      const Word aik = a[i * m2 + k];
      if (aik == 0) continue;
      const Word* brow = b.data() + k * m3;
      Word* orow = out.data() + i * m3;
      for (std::size_t j = 0; j < m3; ++j) orow[j] += aik * brow[j];
    }
  }
  for (Word& v : out) v = ring.Reduce(v);
  return out;
}

std::pair<Words, Words> ShareVector(std::span<const Word> x, Rng& rng,
                                   const RingParams& ring) {
  Words s0(x.size()), s1(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    s0[i] = rng.Bits(ring.bits);
    s1[i] = ring.Reduce(x[i] - s0[i]);
  }
  return {std::move(s0), std::move(s1)};
}

Words ReconstructVector(std::span<const Word> s0, std::span<const Word> s1,
                        const RingParams& ring) {
  return Add(s0, s1, ring);
}

Words UniformVector(std::size_t n, Rng& rng, const RingParams& ring) {
  Words out(n);
  for (Word& v : out) v = rng.Bits(ring.bits);
  return out;
}

}  // namespace ssinfer
