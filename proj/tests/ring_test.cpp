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

#include <gtest/gtest.h>

#include <cmath>

#include "ssinfer/error.hpp"
#include "ssinfer/rng.hpp"
#include "test_util.hpp"

namespace ssinfer {
namespace {

const RingParams kRing32{32, 8};
const RingParams kRing8{8, 3};

TEST(RingParams, ValidatesWidthAndFraction) {
  EXPECT_NO_THROW(kRing32.Validate());
  EXPECT_THROW((RingParams{24, 8}).Validate(), Error);
  EXPECT_THROW((RingParams{32, 0}).Validate(), Error);
  EXPECT_THROW((RingParams{32, 32}).Validate(), Error);
  EXPECT_THROW((RingParams{32, 16}).Validate(), Error);
  EXPECT_NO_THROW((RingParams{64, 16}).Validate());
}

TEST(FixedPoint, EncodeKnownValues) {
  EXPECT_EQ(FxEncode(1.5, kRing32).value, 384u);
  EXPECT_EQ(FxEncode(0.0, kRing32).value, 0u);
  EXPECT_EQ(FxEncode(-1.0, kRing32).value, (Word{1} << 32) - 256);
}

TEST(FixedPoint, DecodeKnownValues) {
  EXPECT_DOUBLE_EQ(FxDecode({384}, kRing32), 1.5);
  EXPECT_DOUBLE_EQ(FxDecode({(Word{1} << 32) - 256}, kRing32), -1.0);
}

TEST(FixedPoint, EncodeRejectsOutOfRange) {
  // |x| must be below 2^(l-f-1) = 2^23.
  EXPECT_THROW(FxEncode(std::ldexp(1.0, 23), kRing32), Error);
  EXPECT_THROW(FxEncode(-std::ldexp(1.0, 23), kRing32), Error);
  EXPECT_THROW(FxEncode(NAN, kRing32), Error);
  EXPECT_NO_THROW(FxEncode(std::ldexp(1.0, 23) - 1.0, kRing32));
  try {
    FxEncode(1e9, kRing32);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kOverflow);
  }
}

TEST(FixedPoint, RoundTripOnGrid) {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const std::int64_t q = static_cast<std::int64_t>(rng.Bits(24)) - (1 << 23) + 1;
    const double x = std::ldexp(static_cast<double>(q), -8);
    EXPECT_EQ(FxDecode(FxEncode(x, kRing32), kRing32), x);
  }
}

TEST(FixedPoint, EncodingIsMonotone) {
  Word prev = FxEncode(-100.0, kRing32).value;
  for (double x = -100.0 + 1.0 / 256; x < 100.0; x += 1.0 / 256) {
    const Word cur = FxEncode(x, kRing32).value;
    EXPECT_LT(ToSigned(prev, kRing32), ToSigned(cur, kRing32));
    prev = cur;
  }
}

TEST(Sharing, KnownShares) {
  Rng rng(1);
  auto [s0, s1] = Share({5}, rng, kRing32);
  EXPECT_EQ(kRing32.Reduce(s0.value.value + s1.value.value), 5u);
  EXPECT_EQ(s0.party, Party::kClient);
  EXPECT_EQ(s1.party, Party::kServer);
  EXPECT_EQ(Reconstruct(ArithShare{Party::kClient, {3}},
                        ArithShare{Party::kServer, {2}}, kRing32)
                .value,
            5u);
}

TEST(Sharing, ReconstructRejectsPartyMismatch) {
  const ArithShare a{Party::kClient, {1}};
  try {
    Reconstruct(a, a, kRing32);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kPartyMismatch);
  }
}

TEST(Sharing, RoundTripRandom) {
  Rng rng(2);
  for (int i = 0; i < 10000; ++i) {
    const RingElement x{rng.Bits(32)};
    auto [s0, s1] = Share(x, rng, kRing32);
    EXPECT_EQ(Reconstruct(s0, s1, kRing32), x);
  }
}

TEST(Sharing, ClientShareUniformAtL8) {
  Rng rng(3);
  std::vector<std::uint64_t> counts(256, 0);
  for (int i = 0; i < 100000; ++i) {
    auto [s0, s1] = Share({77}, rng, kRing8);
    ++counts[s0.value.value];
  }
  EXPECT_GT(testing::UniformChiSquareP(counts), 0.001);
  // Every bucket within 5 sigma of 1/256.
  const double mean = 100000.0 / 256;
  const double sigma = std::sqrt(100000.0 * (1.0 / 256) * (255.0 / 256));
  for (auto c : counts) EXPECT_NEAR(static_cast<double>(c), mean, 5 * sigma);
}

TEST(Sharing, AdditiveHomomorphism) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Word x = rng.Bits(32), y = rng.Bits(32), c = rng.Bits(32);
    auto [x0, x1] = Share({x}, rng, kRing32);
    auto [y0, y1] = Share({y}, rng, kRing32);
    const ArithShare z0{Party::kClient, {kRing32.Reduce(x0.value.value + y0.value.value)}};
    const ArithShare z1{Party::kServer, {kRing32.Reduce(x1.value.value + y1.value.value)}};
    EXPECT_EQ(Reconstruct(z0, z1, kRing32).value, kRing32.Reduce(x + y));
    const ArithShare c0{Party::kClient, {kRing32.Reduce(x0.value.value * c)}};
    const ArithShare c1{Party::kServer, {kRing32.Reduce(x1.value.value * c)}};
    EXPECT_EQ(Reconstruct(c0, c1, kRing32).value, kRing32.Reduce(x * c));
  }
}

TEST(Sharing, BooleanFlipByOneParty) {
  Rng rng(5);
  for (std::uint8_t b : {0, 1}) {
    for (int i = 0; i < 100; ++i) {
      auto [b0, b1] = ShareBit(b, rng);
      EXPECT_EQ(Reconstruct(b0, b1), b);
      b1.bit ^= 1;
      EXPECT_EQ(Reconstruct(b0, b1), b ^ 1);
    }
  }
}

TEST(Truncation, SharesOfZero) {
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    auto [s0, s1] = Share({0}, rng, kRing32);
    const std::int64_t r = ToSigned(
        Reconstruct(TruncateShare(s0, 8, kRing32), TruncateShare(s1, 8, kRing32),
                    kRing32)
            .value,
        kRing32);
    EXPECT_LE(std::llabs(r), 1);
  }
}

// Local truncation is off by one ulp at most, except for a wrap event whose
// probability is |x| / 2^l per trial.
TEST(Truncation, SixAtDoubleScale) {
  Rng rng(8);
  const Word x = FxEncodeAt(6.0, 16, kRing32).value;
  const std::int64_t want = ToSigned(FxEncode(6.0, kRing32).value, kRing32);
  int wraps = 0;
  for (int i = 0; i < 10000; ++i) {
    auto [s0, s1] = Share({x}, rng, kRing32);
    const std::int64_t got = ToSigned(
        Reconstruct(TruncateShare(s0, 8, kRing32), TruncateShare(s1, 8, kRing32),
                    kRing32)
            .value,
        kRing32);
    if (std::llabs(got - want) > 1) {
      ++wraps;
    }
  }
  // Expected wraps: 10^4 * 6 * 2^16 / 2^32, about 0.9.
  EXPECT_LE(wraps, 6);
}

TEST(Truncation, WrapRateMonteCarlo) {
  Rng rng(9);
  const std::int64_t bound = std::int64_t{1} << (32 - 8 - 4);
  int large = 0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    const std::int64_t v =
        static_cast<std::int64_t>(rng.Bits(21)) - bound;  // |v| <= 2^20
    auto [s0, s1] = Share({FromSigned(v, kRing32)}, rng, kRing32);
    const std::int64_t got = ToSigned(
        Reconstruct(TruncateShare(s0, 8, kRing32), TruncateShare(s1, 8, kRing32),
                    kRing32)
            .value,
        kRing32);
    if (std::llabs(got - (v >> 8)) > 1) ++large;
  }
  EXPECT_LT(static_cast<double>(large) / trials, 1.0 / 8);
}

TEST(Truncation, ExactWhenNoWrap) {
  // With s0 >= x (unsigned) the local rule is floor or floor+1 of x / 2^f.
  const Word x = 1000;
  const ArithShare s0{Party::kClient, {5000}};
  const ArithShare s1{Party::kServer, {kRing32.Reduce(x - 5000)}};
  const Word got = Reconstruct(TruncateShare(s0, 3, kRing32),
                               TruncateShare(s1, 3, kRing32), kRing32)
                       .value;
  EXPECT_TRUE(got == 125 || got == 126);
}

TEST(VectorOps, MatMulMatchesNaive) {
  Rng rng(10);
  const std::size_t m1 = 3, m2 = 4, m3 = 5;
  const Words a = UniformVector(m1 * m2, rng, kRing32);
  const Words b = UniformVector(m2 * m3, rng, kRing32);
  const Words c = MatMul(a, b, m1, m2, m3, kRing32);
  for (std::size_t i = 0; i < m1; ++i) {
    for (std::size_t j = 0; j < m3; ++j) {
      Word acc = 0;
      for (std::size_t k = 0; k < m2; ++k) acc += a[i * m2 + k] * b[k * m3 + j];
      EXPECT_EQ(c[i * m3 + j], kRing32.Reduce(acc));
    }
  }
  EXPECT_THROW(MatMul(a, b, m1, m3, m2, kRing32), Error);
}

TEST(VectorOps, ShareVectorRoundTrip) {
  Rng rng(11);
  const Words x = UniformVector(100, rng, kRing8);
  auto [s0, s1] = ShareVector(x, rng, kRing8);
  EXPECT_EQ(ReconstructVector(s0, s1, kRing8), x);
  EXPECT_THROW(Add(s0, Words(3), kRing8), Error);
}

TEST(Rng, DeterministicAndLabelled) {
  Rng a(42, "x"), b(42, "x"), c(42, "y");
  const std::uint64_t va = a.NextU64();
  EXPECT_EQ(va, b.NextU64());
  EXPECT_NE(va, c.NextU64());
  Rng d1 = Rng(1).Derive("child"), d2 = Rng(1).Derive("child");
  EXPECT_EQ(d1.NextU64(), d2.NextU64());
}

}  // namespace
}  // namespace ssinfer
