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

// Secure layers over shared tensors, with bit-exact plaintext mirrors.
//
// Every secure layer has a Plain* twin that performs the same fixed-point
// arithmetic on reconstructed values. With exact truncation the two agree
// bit for bit, which is what the oracle tests rely on.

#ifndef SSINFER_LAYERS_HPP_
#define SSINFER_LAYERS_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ssinfer/protocols.hpp"
#include "ssinfer/ring.hpp"

namespace ssinfer {

// --- spline approximation -------------------------------------------------------

enum class SplineTarget : std::uint8_t { kSigmoid = 0, kTanh = 1, kCustom = 2 };
const char* SplineTargetName(SplineTarget target);

// Piece i evaluates c0 + c1 (x - center_i) + c2 (x - center_i)^2 on
// [knots[i-1], knots[i]); the first and last pieces are unbounded.
struct PiecewisePoly {
  SplineTarget target = SplineTarget::kCustom;
  double lo = 0, hi = 0;
  std::vector<double> knots;
  std::vector<double> centers;
  std::vector<std::array<double, 3>> coeffs;
  double max_error = 0;  // over a 10^4-point grid on [lo, hi]

  int pieces() const { return static_cast<int>(centers.size()); }
  std::size_t PieceOf(double x) const;
  double Eval(double x) const;
  // Knots and centers at scale f, c2 at f, c1 at 2f, c0 at 3f.
  EncodedPieces Encode(const RingParams& ring) const;
};

// Uniform knots over [lo, hi] (k - 1 of them, the outer two at lo and hi),
// least-squares quadratics inside, constant tails outside.
PiecewisePoly FitSpline(SplineTarget target, int k, double lo, double hi);
PiecewisePoly FitSpline(const std::function<double(double)>& fn, int k, double lo,
                        double hi);

double Sigmoid(double x);

// --- tensors --------------------------------------------------------------------

struct TensorShares {
  std::vector<std::size_t> shape;
  Words data;
  int scale = 0;

  std::size_t size() const;
  void CheckConsistent() const;
};

// Raises kConfig when a value at `scale` fraction bits plus the integer
// headroom would not fit in l - 1 bits.
inline constexpr int kIntegerHeadroomBits = 6;
void CheckScaleBudget(const RingParams& ring, int scale, const std::string& what);

// --- layer parameters -----------------------------------------------------------

// y = x W + b. Weights (in x out, row-major) at scale f, bias at 2f. The
// client passes in/out with empty data.
struct FcParams {
  std::size_t in = 0, out = 0;
  Words weights;
  Words bias;
  static FcParams Encode(std::size_t in, std::size_t out, const std::vector<double>& w,
                         const std::vector<double>& b, const RingParams& ring);
  FcParams Public() const { return {in, out, {}, {}}; }
};

struct ConvGeometry {
  std::size_t in_channels = 0, height = 0, width = 0;
  std::size_t out_channels = 0, kernel = 0, stride = 1, padding = 0;
  std::size_t out_height() const;
  std::size_t out_width() const;
  std::size_t patch() const { return in_channels * kernel * kernel; }
  void Validate() const;
};

// Filters laid out [out][in][kh][kw] at scale f, bias per output channel at 2f.
struct ConvParams {
  ConvGeometry geom;
  Words filters;
  Words bias;
  static ConvParams Encode(const ConvGeometry& g, const std::vector<double>& filters,
                           const std::vector<double>& bias, const RingParams& ring);
  ConvParams Public() const { return {geom, {}, {}}; }
};

struct PoolGeometry {
  std::size_t channels = 0, height = 0, width = 0;
  std::size_t window = 2, stride = 2;
  std::size_t out_height() const;
  std::size_t out_width() const;
  void Validate() const;
};

// im2col on a CHW tensor: rows are output positions, columns the patch.
Words ReshapeInput(std::span<const Word> x, const ConvGeometry& g);
// [out][in][kh][kw] -> (in*kh*kw) x out.
Words ReshapeFilter(std::span<const Word> filters, const ConvGeometry& g);
// (positions x out) -> CHW.
Words ReshapeOutput(std::span<const Word> y, const ConvGeometry& g);

// --- secure layers ----------------------------------------------------------------

// x is rows x in at scale f; output rows x out at scale f.
Words SecFc(Session& s, std::span<const Word> x, std::size_t rows, const FcParams& p);
Words SecConv(Session& s, std::span<const Word> x, const ConvParams& p);
Words SecRelu(Session& s, std::span<const Word> x);
Words SecMaxPool(Session& s, std::span<const Word> x, const PoolGeometry& g);
// Elementwise max of two shared vectors, one SecReLU.
Words SecMax(Session& s, std::span<const Word> a, std::span<const Word> b);
Words SecSpline(Session& s, std::span<const Word> x, const PiecewisePoly& poly);
// Shared x shared at scale f, truncated back to f.
Words SecMulTrunc(Session& s, std::span<const Word> a, std::span<const Word> b);

// --- plaintext mirrors --------------------------------------------------------------

Words PlainFc(std::span<const Word> x, std::size_t rows, const FcParams& p,
              const RingParams& ring);
Words PlainConv(std::span<const Word> x, const ConvParams& p, const RingParams& ring);
Words PlainRelu(std::span<const Word> x, const RingParams& ring);
Words PlainMaxPool(std::span<const Word> x, const PoolGeometry& g, const RingParams& ring);
Words PlainSpline(std::span<const Word> x, const EncodedPieces& pieces,
                  const RingParams& ring);
Words PlainMulTrunc(std::span<const Word> a, std::span<const Word> b,
                    const RingParams& ring);

// --- sequential models ---------------------------------------------------------------

enum class LayerKind : std::uint8_t { kFc, kConv, kRelu, kMaxPool, kSigmoid, kTanh };

struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  FcParams fc;
  ConvParams conv;
  PoolGeometry pool;
  std::vector<std::size_t> in_shape, out_shape;
  std::string Name() const;
};

// A feed-forward network read from JSON:
//   {"input": [C, H, W] or [n], "spline": {"pieces": 12, "lo": -6, "hi": 6},
//    "layers": [{"type": "conv", "out_channels": 4, "kernel": 3, "stride": 1,
//                "padding": 0, "weights": [...], "bias": [...]},
//               {"type": "relu"}, {"type": "maxpool", "window": 2, "stride": 2},
//               {"type": "fc", "out": 10, "weights": [...], "bias": [...]},
//               {"type": "sigmoid"}, {"type": "tanh"}]}
// Weights are real numbers encoded at load time.
class SequentialModel {
 public:
  static SequentialModel FromJson(const std::string& text, const RingParams& ring);
  static SequentialModel Load(const std::string& path, const RingParams& ring);

  // Copy without weights, as known to the client.
  SequentialModel Public() const;

  const std::vector<LayerSpec>& layers() const { return layers_; }
  const std::vector<std::size_t>& input_shape() const { return input_shape_; }
  std::vector<std::size_t> output_shape() const;
  std::size_t input_size() const;
  const RingParams& ring() const { return ring_; }
  int spline_pieces() const { return sigmoid_.pieces(); }

  Words SecureForward(Session& s, std::span<const Word> x) const;
  Words PlainForward(std::span<const Word> x) const;

 private:
  RingParams ring_;
  std::vector<std::size_t> input_shape_;
  std::vector<LayerSpec> layers_;
  PiecewisePoly sigmoid_, tanh_;
};

}  // namespace ssinfer

#endif  // SSINFER_LAYERS_HPP_
