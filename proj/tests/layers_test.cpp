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

#include "ssinfer/layers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "json.hpp"
#include "ssinfer/error.hpp"
#include "ssinfer/twoparty.hpp"

namespace ssinfer {
namespace {

const RingParams kRing{32, 8};
const double kUlp = 1.0 / 256;

struct Shared {
  Words x0, x1;
  const Words& of(const Session& s) const { return s.is_client() ? x0 : x1; }
};

Shared Split(const Words& x, const RingParams& ring = kRing, std::uint64_t seed = 7) {
  Rng rng(seed, "layer-shares");
  auto [a, b] = ShareVector(x, rng, ring);
  return {std::move(a), std::move(b)};
}

Words Open(const TwoPartyRun<Words>& run, const RingParams& ring = kRing) {
  return Add(run.client, run.server, ring);
}

Words Encode(const std::vector<double>& v, const RingParams& ring = kRing) {
  Words out;
  for (double x : v) out.push_back(FxEncode(x, ring).value);
  return out;
}

double Decode(Word v, const RingParams& ring = kRing) { return FxDecode({v}, ring); }

std::vector<double> RandomReals(std::size_t n, double lo, double hi, std::uint64_t seed) {
  Rng rng(seed, "reals");
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> out(n);
  for (double& v : out) v = dist(rng);
  return out;
}

ErrorKind KindOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kConfig;
}

// --- splines -------------------------------------------------------------------------

TEST(FitSpline, SigmoidTwelvePieces) {
  const PiecewisePoly p = FitSpline(SplineTarget::kSigmoid, 12, -6, 6);
  EXPECT_EQ(p.pieces(), 12);
  EXPECT_EQ(p.knots.size(), 11u);
  EXPECT_LT(p.max_error, 0.01);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const double x = -6 + 12.0 * i / 9999;
    worst = std::max(worst, std::abs(p.Eval(x) - Sigmoid(x)));
  }
  EXPECT_LE(worst, p.max_error + 1e-12);
  EXPECT_NEAR(p.Eval(0), 0.5, p.max_error);
  EXPECT_EQ(p.Eval(-50), 0.0);
  EXPECT_EQ(p.Eval(50), 1.0);
}

TEST(FitSpline, TanhIsOdd) {
  const PiecewisePoly p = FitSpline(SplineTarget::kTanh, 12, -6, 6);
  EXPECT_LT(p.max_error, 0.01);
  for (int i = 0; i < 10000; ++i) {
    const double x = 6.0 * i / 9999;
    EXPECT_LT(std::abs(p.Eval(x) + p.Eval(-x)), 2 * p.max_error) << x;
  }
  EXPECT_EQ(p.Eval(-7), -1.0);
  EXPECT_EQ(p.Eval(7), 1.0);
}

TEST(FitSpline, TailsAreConstant) {
  const PiecewisePoly p = FitSpline(SplineTarget::kSigmoid, 8, -4, 4);
  EXPECT_EQ(p.coeffs.front()[1], 0.0);
  EXPECT_EQ(p.coeffs.front()[2], 0.0);
  EXPECT_EQ(p.coeffs.back()[1], 0.0);
  EXPECT_EQ(p.coeffs.back()[2], 0.0);
}

TEST(FitSpline, MorePiecesFitBetter) {
  EXPECT_LT(FitSpline(SplineTarget::kSigmoid, 16, -6, 6).max_error,
            FitSpline(SplineTarget::kSigmoid, 6, -6, 6).max_error);
}

TEST(FitSpline, RejectsTooFewPieces) {
  EXPECT_EQ(KindOf([] { FitSpline(SplineTarget::kSigmoid, 3, -6, 6); }), ErrorKind::kConfig);
}

TEST(FitSpline, CustomTarget) {
  const PiecewisePoly p = FitSpline([](double x) { return x * x / 36; }, 6, -6, 6);
  EXPECT_LT(p.max_error, 1e-9);
  EXPECT_EQ(p.target, SplineTarget::kCustom);
}

TEST(PlainSpline, TracksRealPolynomial) {
  const PiecewisePoly p = FitSpline(SplineTarget::kSigmoid, 12, -6, 6);
  const EncodedPieces e = p.Encode(kRing);
  const auto xs = RandomReals(2000, -8, 8, 1);
  const Words z = PlainSpline(Encode(xs), e, kRing);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = Decode(Encode({xs[i]})[0]);
    EXPECT_NEAR(Decode(z[i]), p.Eval(x), 3 * kUlp) << x;
  }
}

// --- fc and conv --------------------------------------------------------------------

TEST(SecFc, IdentityWeightsReturnInput) {
  std::vector<double> w(16, 0.0);
  for (int i = 0; i < 4; ++i) w[i * 4 + i] = 1.0;
  const FcParams p = FcParams::Encode(4, 4, w, {}, kRing);
  const Words x = Encode({1.5, -2.25, 0.0390625, -7});
  const Shared sx = Split(x);
  auto run = RunTwoParty(kRing, [&](Session& s) {
    return SecFc(s, sx.of(s), 1, s.is_server() ? p : p.Public());
  });
  const Words z = Open(run);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_LE(std::abs(ToSigned(z[i], kRing) - ToSigned(x[i], kRing)), 1);
  }
}

TEST(SecFc, RandomLayerMatchesPlaintext) {
  const auto w = RandomReals(16 * 8, -1, 1, 2);
  const auto b = RandomReals(8, -1, 1, 3);
  const FcParams p = FcParams::Encode(16, 8, w, b, kRing);
  const auto xr = RandomReals(3 * 16, -2, 2, 4);
  const Words x = Encode(xr);
  const Shared sx = Split(x);
  for (TruncMode mode : {TruncMode::kExact, TruncMode::kLocal}) {
    TwoPartyOptions opt;
    opt.mode = mode;
    auto run = RunTwoParty(
        kRing, [&](Session& s) { return SecFc(s, sx.of(s), 3, s.is_server() ? p : p.Public()); },
        opt);
    const Words z = Open(run);
    const Words want = PlainFc(x, 3, p, kRing);
    for (std::size_t i = 0; i < z.size(); ++i) {
      EXPECT_LE(std::abs(ToSigned(z[i], kRing) - ToSigned(want[i], kRing)),
                mode == TruncMode::kExact ? 0 : 2);
    }
    EXPECT_EQ(run.Rounds(Phase::kOnline), mode == TruncMode::kExact ? 2u : 1u);
  }
  // The fixed-point layer tracks real arithmetic.
  const Words plain = PlainFc(x, 3, p, kRing);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t j = 0; j < 8; ++j) {
      double acc = b[j];
      for (std::size_t i = 0; i < 16; ++i) acc += xr[r * 16 + i] * w[i * 8 + j];
      EXPECT_NEAR(Decode(plain[r * 8 + j]), acc, 0.1);
    }
  }
}

TEST(SecFc, ZeroInputGivesBias) {
  const FcParams p = FcParams::Encode(3, 2, RandomReals(6, -1, 1, 5), {0.5, -1.25}, kRing);
  const Words x(3, 0);
  auto run = RunTwoParty(
      kRing, [&](Session& s) { return SecFc(s, x, 1, s.is_server() ? p : p.Public()); });
  const Words z = Open(run);
  EXPECT_EQ(Decode(z[0]), 0.5);
  EXPECT_EQ(Decode(z[1]), -1.25);
}

TEST(SecFc, ShapeMismatch) {
  const FcParams p = FcParams::Encode(3, 2, std::vector<double>(6, 0), {}, kRing);
  Session planner = Session::Planner(Party::kServer, kRing, SecurityParams{});
  EXPECT_EQ(KindOf([&] { SecFc(planner, Words(4, 0), 1, p); }), ErrorKind::kShape);
}

TEST(SecFc, OverflowBudgetCheckedAtPlanTime) {
  const RingParams narrow{16, 8};
  const FcParams p = FcParams::Encode(2, 2, {0, 0, 0, 0}, {}, narrow);
  Session planner = Session::Planner(Party::kClient, narrow, SecurityParams{});
  EXPECT_EQ(KindOf([&] { SecFc(planner, Words(2, 0), 1, p.Public()); }), ErrorKind::kConfig);
}

TEST(Im2col, PlainConvMatchesDirectConvolution) {
  const ConvGeometry g{2, 6, 5, 3, 3, 2, 1};
  const auto f = RandomReals(3 * 2 * 9, -1, 1, 6);
  const auto b = RandomReals(3, -1, 1, 7);
  const auto xr = RandomReals(2 * 6 * 5, -2, 2, 8);
  const ConvParams p = ConvParams::Encode(g, f, b, kRing);
  const Words z = PlainConv(Encode(xr), p, kRing);
  const std::size_t oh = g.out_height(), ow = g.out_width();
  ASSERT_EQ(z.size(), 3 * oh * ow);
  for (std::size_t o = 0; o < 3; ++o) {
    for (std::size_t r = 0; r < oh; ++r) {
      for (std::size_t c = 0; c < ow; ++c) {
        double acc = b[o];
        for (std::size_t ch = 0; ch < 2; ++ch) {
          for (std::size_t kr = 0; kr < 3; ++kr) {
            for (std::size_t kc = 0; kc < 3; ++kc) {
              const long y = static_cast<long>(r * 2 + kr) - 1;
              const long x = static_cast<long>(c * 2 + kc) - 1;
              if (y < 0 || x < 0 || y >= 6 || x >= 5) continue;
              acc += xr[(ch * 6 + y) * 5 + x] * f[((o * 2 + ch) * 3 + kr) * 3 + kc];
            }
          }
        }
        EXPECT_NEAR(Decode(z[(o * oh + r) * ow + c]), acc, 0.1);
      }
    }
  }
}

TEST(SecConv, ThreeByThreeMatchesPlaintext) {
  const ConvGeometry g{1, 8, 8, 2, 3, 1, 0};
  const ConvParams p =
      ConvParams::Encode(g, RandomReals(18, -1, 1, 9), RandomReals(2, -1, 1, 10), kRing);
  const Words x = Encode(RandomReals(64, -2, 2, 11));
  const Shared sx = Split(x);
  auto run = RunTwoParty(
      kRing, [&](Session& s) { return SecConv(s, sx.of(s), s.is_server() ? p : p.Public()); });
  EXPECT_EQ(Open(run), PlainConv(x, p, kRing));
  EXPECT_EQ(run.plan.Counts().asym_matrix, 1u);
}

TEST(SecConv, OneByOneKernelIsPerPixelFc) {
  const ConvGeometry g{3, 4, 4, 2, 1, 1, 0};
  const auto f = RandomReals(6, -1, 1, 12);
  const ConvParams cp = ConvParams::Encode(g, f, {}, kRing);
  // The matching fc maps 3 channels to 2 for each of the 16 pixels.
  std::vector<double> w(6);
  for (int o = 0; o < 2; ++o) {
    for (int c = 0; c < 3; ++c) w[c * 2 + o] = f[o * 3 + c];
  }
  const FcParams fp = FcParams::Encode(3, 2, w, {}, kRing);
  const Words x = Encode(RandomReals(48, -2, 2, 13));
  Words rows(48);  // pixel-major
  for (int c = 0; c < 3; ++c) {
    for (int px = 0; px < 16; ++px) rows[px * 3 + c] = x[c * 16 + px];
  }
  const Shared sx = Split(x), sr = Split(rows);
  auto conv = RunTwoParty(
      kRing, [&](Session& s) { return SecConv(s, sx.of(s), s.is_server() ? cp : cp.Public()); });
  auto fc = RunTwoParty(
      kRing, [&](Session& s) { return SecFc(s, sr.of(s), 16, s.is_server() ? fp : fp.Public()); });
  const Words zc = Open(conv), zf = Open(fc);
  for (int o = 0; o < 2; ++o) {
    for (int px = 0; px < 16; ++px) EXPECT_EQ(zc[o * 16 + px], zf[px * 2 + o]);
  }
}

TEST(SecConv, ZeroFilterGivesZero) {
  const ConvGeometry g{1, 5, 5, 1, 3, 1, 1};
  const ConvParams p = ConvParams::Encode(g, std::vector<double>(9, 0), {}, kRing);
  const Words x = Encode(RandomReals(25, -2, 2, 14));
  const Shared sx = Split(x);
  auto run = RunTwoParty(
      kRing, [&](Session& s) { return SecConv(s, sx.of(s), s.is_server() ? p : p.Public()); });
  EXPECT_EQ(Open(run), Words(25, 0));
}

TEST(SecConv, BadGeometry) {
  const ConvGeometry g{1, 2, 2, 1, 3, 1, 0};
  EXPECT_EQ(KindOf([&] { g.Validate(); }), ErrorKind::kShape);
}

// --- relu and maxpool ---------------------------------------------------------------

TEST(SecRelu, Examples) {
  const Words x = Encode({-3.5, 2.25, 0});
  const Shared sx = Split(x);
  auto run = RunTwoParty(kRing, [&](Session& s) { return SecRelu(s, sx.of(s)); });
  const Words z = Open(run);
  EXPECT_EQ(Decode(z[0]), 0.0);
  EXPECT_EQ(Decode(z[1]), 2.25);
  EXPECT_EQ(Decode(z[2]), 0.0);
  EXPECT_EQ(run.Rounds(Phase::kOnline), 2u);
}

TEST(SecRelu, ExhaustiveL8) {
  const RingParams ring{8, 2};
  Words x;
  for (Word v = 0; v < 256; ++v) x.push_back(v);
  const Shared sx = Split(x, ring);
  auto run = RunTwoParty(ring, [&](Session& s) { return SecRelu(s, sx.of(s)); });
  const Words z = Open(run, ring);
  for (Word v = 0; v < 256; ++v) {
    ASSERT_EQ(ToSigned(z[v], ring), std::max<std::int64_t>(ToSigned(v, ring), 0)) << v;
  }
}

TEST(SecMaxPool, EqualWindow) {
  const PoolGeometry g{1, 2, 2, 2, 2};
  const Words x = Encode({1.75, 1.75, 1.75, 1.75});
  const Shared sx = Split(x);
  auto run = RunTwoParty(kRing, [&](Session& s) { return SecMaxPool(s, sx.of(s), g); });
  EXPECT_EQ(Open(run), Encode({1.75}));
}

TEST(SecMaxPool, RandomTensorsMatchMax) {
  const PoolGeometry g{2, 4, 4, 2, 2};
  for (int t = 0; t < 100; ++t) {
    const Words x = Encode(RandomReals(32, -50, 50, 100 + t));
    const Shared sx = Split(x, kRing, t);
    auto run = RunTwoParty(kRing, [&](Session& s) { return SecMaxPool(s, sx.of(s), g); });
    const Words z = Open(run);
    ASSERT_EQ(z.size(), 8u);
    for (std::size_t ch = 0; ch < 2; ++ch) {
      for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 2; ++c) {
          std::int64_t best = INT64_MIN;
          for (std::size_t dr = 0; dr < 2; ++dr) {
            for (std::size_t dc = 0; dc < 2; ++dc) {
              best = std::max(best, ToSigned(x[(ch * 4 + 2 * r + dr) * 4 + 2 * c + dc], kRing));
            }
          }
          ASSERT_EQ(ToSigned(z[(ch * 2 + r) * 2 + c], kRing), best);
        }
      }
    }
    if (t == 0) {
      // Two tournament levels of one SecReLU (two rounds) each.
      EXPECT_EQ(run.Rounds(Phase::kOnline), 4u);
      EXPECT_EQ(run.plan.Counts().drelu, 8u * 3);
    }
  }
}

TEST(SecMaxPool, OddWindowAndGlobalMax) {
  const PoolGeometry g{1, 3, 3, 3, 3};
  const auto xr = RandomReals(9, -5, 5, 15);
  const Words x = Encode(xr);
  const Shared sx = Split(x);
  auto run = RunTwoParty(kRing, [&](Session& s) { return SecMaxPool(s, sx.of(s), g); });
  EXPECT_EQ(Open(run)[0], *std::max_element(x.begin(), x.end(), [](Word a, Word b) {
    return ToSigned(a, kRing) < ToSigned(b, kRing);
  }));
  EXPECT_EQ(run.plan.Counts().drelu, 8u);
  EXPECT_EQ(Open(run), PlainMaxPool(x, g, kRing));
}

// --- activations ------------------------------------------------------------------

TEST(SecSig, Examples) {
  const PiecewisePoly p = FitSpline(SplineTarget::kSigmoid, 12, -6, 6);
  const Words x = Encode({-6, 0, 6, -20, 20});
  const Shared sx = Split(x);
  auto run = RunTwoParty(kRing, [&](Session& s) { return SecSpline(s, sx.of(s), p); });
  const Words z = Open(run);
  EXPECT_EQ(Decode(z[0]), 0.0);
  EXPECT_NEAR(Decode(z[1]), 0.5, p.max_error + 4 * kUlp);
  EXPECT_EQ(Decode(z[2]), 1.0);
  EXPECT_EQ(Decode(z[3]), 0.0);
  EXPECT_EQ(Decode(z[4]), 1.0);
}

TEST(SecSig, RandomInputsWithinFitError) {
  const PiecewisePoly p = FitSpline(SplineTarget::kSigmoid, 12, -6, 6);
  const Words x = Encode(RandomReals(1000, -8, 8, 16));
  const Shared sx = Split(x);
  auto run = RunTwoParty(kRing, [&](Session& s) { return SecSpline(s, sx.of(s), p); });
  const Words z = Open(run);
  EXPECT_EQ(z, PlainSpline(x, p.Encode(kRing), kRing));
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(Decode(z[i]), p.Eval(Decode(x[i])), 4 * kUlp);
    EXPECT_NEAR(Decode(z[i]), Sigmoid(Decode(x[i])), p.max_error + 4 * kUlp);
  }
}

TEST(SecSig, MonotoneOnSortedBatch) {
  const PiecewisePoly p = FitSpline(SplineTarget::kSigmoid, 12, -6, 6);
  auto xr = RandomReals(64, -7, 7, 17);
  std::sort(xr.begin(), xr.end());
  const Shared sx = Split(Encode(xr));
  auto run = RunTwoParty(kRing, [&](Session& s) { return SecSpline(s, sx.of(s), p); });
  const Words z = Open(run);
  for (std::size_t i = 1; i < z.size(); ++i) {
    EXPECT_GE(ToSigned(z[i], kRing) + 2, ToSigned(z[i - 1], kRing)) << i;
  }
}

TEST(SecTanh, RandomInputsWithinFitError) {
  const PiecewisePoly p = FitSpline(SplineTarget::kTanh, 12, -6, 6);
  const Words x = Encode(RandomReals(500, -8, 8, 18));
  const Shared sx = Split(x);
  auto run = RunTwoParty(kRing, [&](Session& s) { return SecSpline(s, sx.of(s), p); });
  const Words z = Open(run);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(Decode(z[i]), std::tanh(Decode(x[i])), p.max_error + 4 * kUlp);
  }
}

TEST(SecMulTrunc, MatchesPlaintext) {
  const Words a = Encode(RandomReals(200, -4, 4, 19));
  const Words b = Encode(RandomReals(200, -4, 4, 20));
  const Shared sa = Split(a, kRing, 1), sb = Split(b, kRing, 2);
  auto run = RunTwoParty(kRing, [&](Session& s) { return SecMulTrunc(s, sa.of(s), sb.of(s)); });
  EXPECT_EQ(Open(run), PlainMulTrunc(a, b, kRing));
}

// --- sequential model -------------------------------------------------------------

std::string TinyCnn() {
  using nlohmann::json;
  json m;
  m["input"] = {1, 8, 8};
  m["spline"] = {{"pieces", 12}, {"lo", -6}, {"hi", 6}};
  m["layers"] = json::array();
  m["layers"].push_back({{"type", "conv"}, {"out_channels", 2}, {"kernel", 3}, {"padding", 1},
                         {"weights", RandomReals(18, -0.5, 0.5, 21)},
                         {"bias", RandomReals(2, -0.5, 0.5, 22)}});
  m["layers"].push_back({{"type", "relu"}});
  m["layers"].push_back({{"type", "maxpool"}, {"window", 2}, {"stride", 2}});
  m["layers"].push_back({{"type", "conv"}, {"out_channels", 2}, {"kernel", 3},
                         {"weights", RandomReals(36, -0.5, 0.5, 23)}});
  m["layers"].push_back({{"type", "tanh"}});
  m["layers"].push_back({{"type", "fc"}, {"out", 3},
                         {"weights", RandomReals(8 * 3, -0.5, 0.5, 24)},
                         {"bias", RandomReals(3, -0.5, 0.5, 25)}});
  m["layers"].push_back({{"type", "sigmoid"}});
  return m.dump();
}

TEST(SequentialModel, TinyCnnSecureEqualsPlain) {
  const SequentialModel model = SequentialModel::FromJson(TinyCnn(), kRing);
  EXPECT_EQ(model.output_shape(), (std::vector<std::size_t>{3}));
  const SequentialModel pub = model.Public();
  EXPECT_TRUE(pub.layers()[0].conv.filters.empty());
  const Words x = Encode(RandomReals(64, -2, 2, 26));
  const Shared sx = Split(x);
  auto run = RunTwoParty(kRing, [&](Session& s) {
    return (s.is_server() ? model : pub).SecureForward(s, sx.of(s));
  });
  EXPECT_EQ(Open(run), model.PlainForward(x));
  ASSERT_EQ(run.client_layers.size(), model.layers().size());
  EXPECT_EQ(run.client_layers[0].name, "conv 1->2 k3");
  EXPECT_GT(run.client_layers[0].cost.online.bits_sent, 0u);
}

TEST(SequentialModel, RejectsMalformedInput) {
  EXPECT_EQ(KindOf([] { SequentialModel::FromJson("{", kRing); }), ErrorKind::kConfig);
  EXPECT_EQ(KindOf([] {
              SequentialModel::FromJson(R"({"input":[4],"layers":[{"type":"softmax"}]})", kRing);
            }),
            ErrorKind::kConfig);
  EXPECT_EQ(KindOf([] {
              SequentialModel::FromJson(
                  R"({"input":[4],"layers":[{"type":"fc","out":2,"weights":[1,2]}]})", kRing);
            }),
            ErrorKind::kShape);
}

}  // namespace
}  // namespace ssinfer
