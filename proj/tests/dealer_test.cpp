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

#include "ssinfer/dealer.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "ssinfer/error.hpp"
#include "ssinfer/protocols.hpp"
#include "test_util.hpp"

namespace ssinfer {
namespace {

const RingParams kRing{32, 8};
const SecurityParams kSec{};

ErrorKind KindOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kConfig;
}

Requirements MixedPlan() {
  Requirements plan;
  plan.requests = {
      {CorrelationKind::kAsymTriple, TripleShape::Matrix(3, 4, 5), 0, 0},
      {CorrelationKind::kAsymTriple, TripleShape::Elementwise(10), 0, 0},
      {CorrelationKind::kSharedTriple, TripleShape::Elementwise(6), 0, 0},
      {CorrelationKind::kSharedTriple, TripleShape::Matrix(2, 3, 2), 0, 0},
      {CorrelationKind::kDrelu, {}, 4, 0},
      {CorrelationKind::kBitXa, {}, 7, 0},
      {CorrelationKind::kTrunc, {}, 3, 8},
      {CorrelationKind::kPowerMask, {}, 5, 3},
  };
  return plan;
}

TEST(Plan, SquapolNeedsFourScalarTriples) {
  Session planner = Session::Planner(Party::kClient, kRing, kSec);
  SQuaPol(planner, Words(1, 0), QuadCoeffs{});
  const CorrelationCounts c = planner.requirements().Counts();
  EXPECT_EQ(c.asym_scalar, 4u);
  EXPECT_EQ(c.drelu + c.bitxa + c.trunc + c.asym_matrix, 0u);
}

TEST(Plan, ReluNeedsOneKeyAndOneBitXa) {
  Session planner = Session::Planner(Party::kClient, kRing, kSec);
  const Bits b = SDRelu(planner, Words(1, 0));
  SBitXa(planner, b, Words(1, 0));
  const CorrelationCounts c = planner.requirements().Counts();
  EXPECT_EQ(c.drelu, 1u);
  EXPECT_EQ(c.bitxa, 1u);
}

TEST(Plan, CountsAggregate) {
  const CorrelationCounts c = MixedPlan().Counts();
  EXPECT_EQ(c.asym_matrix, 1u);
  EXPECT_EQ(c.asym_scalar, 10u);
  EXPECT_EQ(c.shared_scalar, 6u);
  EXPECT_EQ(c.shared_matrix, 1u);
  EXPECT_EQ(c.drelu, 4u);
  EXPECT_EQ(c.bitxa, 7u);
  EXPECT_EQ(c.trunc, 3u);
  EXPECT_EQ(c.power_mask, 5u);
}

TEST(Deal, ScalarTriplesAreCorrect) {
  Requirements plan;
  plan.requests.push_back({CorrelationKind::kAsymTriple, TripleShape::Elementwise(10000), 0, 0});
  plan.requests.push_back({CorrelationKind::kSharedTriple, TripleShape::Elementwise(10000), 0, 0});
  auto [c, s] = Deal(plan, kRing, kSec, 1, 42);
  const auto& a = c.asym[0];
  const auto& b = s.asym[0];
  EXPECT_EQ(Add(a.c, b.c, kRing), Hadamard(a.factor, b.factor, kRing));
  const auto& x = c.shared[0];
  const auto& y = s.shared[0];
  EXPECT_EQ(Add(x.c, y.c, kRing),
            Hadamard(Add(x.a, y.a, kRing), Add(x.b, y.b, kRing), kRing));
}

TEST(Deal, MatrixTripleIsCorrect) {
  Requirements plan;
  plan.requests.push_back({CorrelationKind::kAsymTriple, TripleShape::Matrix(8, 8, 8), 0, 0});
  auto [c, s] = Deal(plan, kRing, kSec, 1, 42);
  EXPECT_EQ(Add(c.asym[0].c, s.asym[0].c, kRing),
            MatMul(c.asym[0].factor, s.asym[0].factor, 8, 8, 8, kRing));
}

TEST(Deal, BitXaAndPowerMaskAreConsistent) {
  auto [c, s] = Deal(MixedPlan(), kRing, kSec, 1, 5);
  const BitXaShare& x = c.bitxa[0];
  const BitXaShare& y = s.bitxa[0];
  for (std::size_t i = 0; i < x.n; ++i) {
    const Word beta = kRing.Reduce(x.beta[i] + y.beta[i]);
    EXPECT_EQ(beta, Word(x.beta_bool[i] ^ y.beta_bool[i]));
    EXPECT_EQ(kRing.Reduce(x.beta_m[i] + y.beta_m[i]),
              kRing.Reduce(beta * (x.m[i] + y.m[i])));
  }
  const PowerMaskShare& p = c.power[0];
  const PowerMaskShare& q = s.power[0];
  for (std::size_t i = 0; i < p.n; ++i) {
    const Word a = kRing.Reduce(p.powers[0][i] + q.powers[0][i]);
    Word pw = a;
    for (int k = 1; k < p.degree; ++k) {
      pw = kRing.Reduce(pw * a);
      EXPECT_EQ(kRing.Reduce(p.powers[k][i] + q.powers[k][i]), pw);
    }
  }
}

// Every mask value at l = 8: the DReLU material must satisfy
// z~0 ^ z~1 ^ r = 1{x < 2^(l-1)} for every opened x^ = x + a.
TEST(Deal, DreluBundleExhaustiveL8) {
  const RingParams ring{8, 2};
  Requirements plan;
  plan.requests.push_back({CorrelationKind::kDrelu, {}, 256, 0});
  auto [c, s] = Deal(plan, ring, kSec, 1, 77);
  Prg prg(kSec);
  const DreluKeyShare& k0 = c.drelu[0];
  const DreluKeyShare& k1 = s.drelu[0];
  for (std::size_t i = 0; i < 256; ++i) {
    const Word a = ring.Reduce(k0.a[i] + k1.a[i]);
    for (Word x = 0; x < 256; ++x) {
      const Word xhat = ring.Reduce(x + a);
      const Word in = ring.half() - (xhat & (ring.half() - 1)) - 1;
      const Word z = EvalDcf(k0.keys[i], in, prg) ^ EvalDcf(k1.keys[i], in, prg) ^
                     k0.r[i] ^ k1.r[i] ^ Msb(xhat, ring);
      ASSERT_EQ(z, x < 128 ? 1u : 0u) << "a=" << a << " x=" << x;
    }
  }
}

TEST(Deal, DeterministicInSeed) {
  auto [c1, s1] = Deal(MixedPlan(), kRing, kSec, 1, 5);
  auto [c2, s2] = Deal(MixedPlan(), kRing, kSec, 1, 5);
  auto [c3, s3] = Deal(MixedPlan(), kRing, kSec, 1, 6);
  EXPECT_EQ(c1.Serialize(), c2.Serialize());
  EXPECT_EQ(s1.Serialize(), s2.Serialize());
  EXPECT_NE(c1.Serialize(), c3.Serialize());
}

TEST(Bundle, SerializationRoundTrips) {
  auto [c, s] = Deal(MixedPlan(), kRing, kSec, 9, 5);
  for (const DealerBundle* b : {&c, &s}) {
    const auto bytes = b->Serialize();
    EXPECT_EQ(bytes.size(), b->MaterialBytes());
    const DealerBundle back = DealerBundle::Deserialize(bytes);
    EXPECT_EQ(back.Serialize(), bytes);
    EXPECT_EQ(back.party(), b->party());
    EXPECT_EQ(back.session(), 9u);
    EXPECT_EQ(back.Available(), b->Available());
  }
}

TEST(Bundle, RoundTripsAtEveryRingWidth) {
  for (int bits : {8, 16, 32, 64}) {
    const RingParams ring{bits, 2};
    Requirements plan = MixedPlan();
    plan.requests[6].param = 2;
    auto [c, s] = Deal(plan, ring, kSec, 1, 5);
    const DealerBundle back = DealerBundle::Deserialize(s.Serialize());
    EXPECT_EQ(back.Serialize(), s.Serialize()) << bits;
    EXPECT_EQ(back.asym[0].c, s.asym[0].c);
  }
}

TEST(Bundle, FileRoundTrip) {
  auto [c, s] = Deal(MixedPlan(), kRing, kSec, 1, 5);
  const std::string path =
      (std::filesystem::temp_directory_path() / "ssinfer_bundle_test.bin").string();
  c.Save(path);
  EXPECT_EQ(DealerBundle::Load(path).Serialize(), c.Serialize());
  std::remove(path.c_str());
  EXPECT_EQ(KindOf([&] { DealerBundle::Load(path); }), ErrorKind::kIo);
}

TEST(Bundle, CorruptionIsDetected) {
  auto [c, s] = Deal(MixedPlan(), kRing, kSec, 1, 5);
  const auto bytes = c.Serialize();
  for (std::size_t pos : {std::size_t{0}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
    auto bad = bytes;
    bad[pos] ^= 0x40;
    EXPECT_EQ(KindOf([&] { DealerBundle::Deserialize(bad); }), ErrorKind::kIntegrity) << pos;
  }
  auto truncated = bytes;
  truncated.resize(bytes.size() - 9);
  EXPECT_EQ(KindOf([&] { DealerBundle::Deserialize(truncated); }), ErrorKind::kIntegrity);
}

TEST(Bundle, ConsumptionInOrder) {
  auto [c, s] = Deal(MixedPlan(), kRing, kSec, 1, 5);
  EXPECT_EQ(KindOf([&] { c.TakeAsym(TripleShape::Elementwise(10)); }), ErrorKind::kShape);
  c.TakeAsym(TripleShape::Matrix(3, 4, 5));
  c.TakeAsym(TripleShape::Elementwise(10));
  EXPECT_EQ(KindOf([&] { c.TakeAsym(TripleShape::Elementwise(10)); }),
            ErrorKind::kExhaustion);
  c.TakeDrelu(4);
  EXPECT_EQ(KindOf([&] { c.TakeDrelu(4); }), ErrorKind::kExhaustion);
  EXPECT_EQ(KindOf([&] { c.TakeTrunc(3, 7); }), ErrorKind::kShape);
  EXPECT_EQ(c.Consumed().asym_scalar, 10u);
  EXPECT_EQ(c.Consumed().drelu, 4u);
  EXPECT_EQ(c.Available().drelu, 0u);
  EXPECT_EQ(c.Available().bitxa, 7u);
}

TEST(Deal, RejectsBadTruncShift) {
  Requirements plan;
  plan.requests.push_back({CorrelationKind::kTrunc, {}, 1, 31});
  EXPECT_EQ(KindOf([&] { Deal(plan, kRing, kSec, 1, 1); }), ErrorKind::kConfig);
}

// Each party's share of a fixed secret is uniform, and its distribution does
// not depend on the secret.
TEST(Deal, SharesAreUniformAndSecretIndependent) {
  const RingParams ring{8, 2};
  Requirements plan;
  plan.requests.push_back({CorrelationKind::kAsymTriple, TripleShape::Elementwise(100000), 0, 0});
  plan.requests.push_back({CorrelationKind::kBitXa, {}, 100000, 0});
  auto [c, s] = Deal(plan, ring, kSec, 1, 3);
  std::vector<std::uint64_t> ha(256), hc(256), hm0(256), hm1(256);
  for (std::size_t i = 0; i < 100000; ++i) {
    ++ha[c.asym[0].factor[i]];
    ++hc[c.asym[0].c[i]];
    const std::uint8_t beta = c.bitxa[0].beta_bool[i] ^ s.bitxa[0].beta_bool[i];
    (beta ? hm1 : hm0)[c.bitxa[0].beta_m[i]]++;
  }
  EXPECT_GT(testing::UniformChiSquareP(ha), 1e-3);
  EXPECT_GT(testing::UniformChiSquareP(hc), 1e-3);
  EXPECT_GT(testing::HomogeneityChiSquareP(hm0, hm1), 1e-3);
}

}  // namespace
}  // namespace ssinfer
