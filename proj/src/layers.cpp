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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "ssinfer/bytes.hpp"
#include "ssinfer/error.hpp"

namespace ssinfer {

// --- splines --------------------------------------------------------------------

const char* SplineTargetName(SplineTarget target) {
  switch (target) {
    case SplineTarget::kSigmoid: return "sigmoid";
    case SplineTarget::kTanh: return "tanh";
    case SplineTarget::kCustom: return "custom";
  }
  return "?";
}

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::size_t PiecewisePoly::PieceOf(double x) const {
  return static_cast<std::size_t>(std::upper_bound(knots.begin(), knots.end(), x) -
                                  knots.begin());
}

double PiecewisePoly::Eval(double x) const {
  const std::size_t i = PieceOf(x);
  const double t = x - centers[i];
  return coeffs[i][0] + t * (coeffs[i][1] + t * coeffs[i][2]);
}

EncodedPieces PiecewisePoly::Encode(const RingParams& ring) const {
  const int f = ring.frac;
  EncodedPieces e;
  for (double k : knots) e.knots.push_back(FxEncodeAt(k, f, ring).value);
  for (std::size_t i = 0; i < centers.size(); ++i) {
    e.centers.push_back(FxEncodeAt(centers[i], f, ring).value);
    e.q0.push_back(FxEncodeAt(coeffs[i][0], 3 * f, ring).value);
    e.q1.push_back(FxEncodeAt(coeffs[i][1], 2 * f, ring).value);
    e.q2.push_back(FxEncodeAt(coeffs[i][2], f, ring).value);
  }
  return e;
}

namespace {

constexpr int kFitSamplesPerPiece = 400;
constexpr int kErrorGridPoints = 10000;

// Least-squares quadratic in t = x - c over samples of fn on [a, b].
std::array<double, 3> FitQuadratic(const std::function<double(double)>& fn, double a,
                                   double b, double c) {
  double m[3][4] = {};
  for (int i = 0; i < kFitSamplesPerPiece; ++i) {
    const double x = a + (b - a) * i / (kFitSamplesPerPiece - 1);
    const double t = x - c;
    const double basis[3] = {1, t, t * t};
    const double y = fn(x);
    for (int r = 0; r < 3; ++r) {
      for (int col = 0; col < 3; ++col) m[r][col] += basis[r] * basis[col];
      m[r][3] += basis[r] * y;
    }
  }
  // Gaussian elimination with partial pivoting on the 3x3 normal equations.
  for (int p = 0; p < 3; ++p) {
    int best = p;
    for (int r = p + 1; r < 3; ++r) {
      if (std::abs(m[r][p]) > std::abs(m[best][p])) best = r;
    }
    std::swap(m[p], m[best]);
    for (int r = 0; r < 3; ++r) {
      if (r == p) continue;
      const double factor = m[r][p] / m[p][p];
      for (int col = p; col < 4; ++col) m[r][col] -= factor * m[p][col];
    }
  }
  return {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

PiecewisePoly Fit(const std::function<double(double)>& fn, double left, double right,
                  int k, double lo, double hi) {
  Require(k >= 4, ErrorKind::kConfig, "spline needs at least 4 pieces");
  Require(lo < hi, ErrorKind::kConfig, "spline span must be non-empty");
  PiecewisePoly p;
  p.lo = lo;
  p.hi = hi;
  const double step = (hi - lo) / (k - 2);
  for (int i = 0; i <= k - 2; ++i) p.knots.push_back(lo + step * i);
  p.knots.back() = hi;
  p.centers.push_back(0);
  p.coeffs.push_back({left, 0, 0});
  for (int i = 1; i <= k - 2; ++i) {
    const double a = p.knots[i - 1], b = p.knots[i];
    const double c = 0.5 * (a + b);
    p.centers.push_back(c);
    p.coeffs.push_back(FitQuadratic(fn, a, b, c));
  }
  p.centers.push_back(0);
  p.coeffs.push_back({right, 0, 0});
  for (int i = 0; i < kErrorGridPoints; ++i) {
    const double x = lo + (hi - lo) * i / (kErrorGridPoints - 1);
    p.max_error = std::max(p.max_error, std::abs(p.Eval(x) - fn(x)));
  }
  // Piece endpoints, where a least-squares fit errs most, approached from inside.
  for (int i = 1; i <= k - 2; ++i) {
    for (double x : {p.knots[i - 1], p.knots[i]}) {
      const auto& c = p.coeffs[i];
      const double t = x - p.centers[i];
      p.max_error = std::max(p.max_error, std::abs(c[0] + t * (c[1] + t * c[2]) - fn(x)));
    }
  }
  return p;
}

}  // namespace

PiecewisePoly FitSpline(SplineTarget target, int k, double lo, double hi) {
  PiecewisePoly p;
  switch (target) {
    case SplineTarget::kSigmoid:
      p = Fit(Sigmoid, 0.0, 1.0, k, lo, hi);
      break;
    case SplineTarget::kTanh:
      p = Fit([](double x) { return std::tanh(x); }, -1.0, 1.0, k, lo, hi);
      break;
    case SplineTarget::kCustom:
      Fail(ErrorKind::kConfig, "custom splines need a target function");
  }
  p.target = target;
  return p;
}

PiecewisePoly FitSpline(const std::function<double(double)>& fn, int k, double lo,
                        double hi) {
  PiecewisePoly p = Fit(fn, fn(lo), fn(hi), k, lo, hi);
  p.target = SplineTarget::kCustom;
  return p;
}

// --- tensors and budgets ------------------------------------------------------------

std::size_t TensorShares::size() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

void TensorShares::CheckConsistent() const {
  Require(data.size() == size(), ErrorKind::kShape, "tensor payload does not match shape");
}

void CheckScaleBudget(const RingParams& ring, int scale, const std::string& what) {
  Require(scale + kIntegerHeadroomBits <= ring.bits - 2, ErrorKind::kConfig,
          what + ": values at scale " + std::to_string(scale) +
              " leave too little headroom in a " + std::to_string(ring.bits) +
              "-bit ring");
}

namespace {

Words EncodeAll(const std::vector<double>& v, int scale, const RingParams& ring) {
  Words out;
  out.reserve(v.size());
  for (double x : v) out.push_back(FxEncodeAt(x, scale, ring).value);
  return out;
}

}  // namespace

FcParams FcParams::Encode(std::size_t in, std::size_t out, const std::vector<double>& w,
                          const std::vector<double>& b, const RingParams& ring) {
  Require(w.size() == in * out, ErrorKind::kShape, "fc weight count must be in * out");
  Require(b.empty() || b.size() == out, ErrorKind::kShape, "fc bias count must be out");
  FcParams p{in, out, EncodeAll(w, ring.frac, ring), EncodeAll(b, 2 * ring.frac, ring)};
  if (p.bias.empty()) p.bias.assign(out, 0);
  return p;
}

std::size_t ConvGeometry::out_height() const {
  return (height + 2 * padding - kernel) / stride + 1;
}
std::size_t ConvGeometry::out_width() const {
  return (width + 2 * padding - kernel) / stride + 1;
}

void ConvGeometry::Validate() const {
  Require(in_channels > 0 && out_channels > 0 && kernel > 0 && stride > 0,
          ErrorKind::kShape, "conv geometry has a zero dimension");
  Require(kernel <= height + 2 * padding && kernel <= width + 2 * padding,
          ErrorKind::kShape, "conv kernel larger than padded input");
}

ConvParams ConvParams::Encode(const ConvGeometry& g, const std::vector<double>& filters,
                              const std::vector<double>& bias, const RingParams& ring) {
  g.Validate();
  Require(filters.size() == g.out_channels * g.patch(), ErrorKind::kShape,
          "conv filter count does not match geometry");
  Require(bias.empty() || bias.size() == g.out_channels, ErrorKind::kShape,
          "conv bias count must equal out_channels");
  ConvParams p{g, EncodeAll(filters, ring.frac, ring), EncodeAll(bias, 2 * ring.frac, ring)};
  if (p.bias.empty()) p.bias.assign(g.out_channels, 0);
  return p;
}

std::size_t PoolGeometry::out_height() const { return (height - window) / stride + 1; }
std::size_t PoolGeometry::out_width() const { return (width - window) / stride + 1; }

void PoolGeometry::Validate() const {
  Require(channels > 0 && window > 0 && stride > 0, ErrorKind::kShape,
          "pool geometry has a zero dimension");
  Require(window <= height && window <= width, ErrorKind::kShape,
          "pool window larger than input");
}

// --- im2col -------------------------------------------------------------------------

Words ReshapeInput(std::span<const Word> x, const ConvGeometry& g) {
  g.Validate();
  Require(x.size() == g.in_channels * g.height * g.width, ErrorKind::kShape,
          "conv input size does not match geometry");
  const std::size_t oh = g.out_height(), ow = g.out_width(), patch = g.patch();
  Words out(oh * ow * patch, 0);
  for (std::size_t r = 0; r < oh; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      Word* row = &out[(r * ow + c) * patch];
      std::size_t col = 0;
      for (std::size_t ch = 0; ch < g.in_channels; ++ch) {
        for (std::size_t kr = 0; kr < g.kernel; ++kr) {
          for (std::size_t kc = 0; kc < g.kernel; ++kc, ++col) {
            const auto y = static_cast<std::ptrdiff_t>(r * g.stride + kr) -
                           static_cast<std::ptrdiff_t>(g.padding);
            const auto x_ = static_cast<std::ptrdiff_t>(c * g.stride + kc) -
                            static_cast<std::ptrdiff_t>(g.padding);
            if (y < 0 || x_ < 0 || y >= static_cast<std::ptrdiff_t>(g.height) ||
                x_ >= static_cast<std::ptrdiff_t>(g.width)) {
              continue;
            }
            row[col] = x[(ch * g.height + y) * g.width + x_];
          }
        }
      }
    }
  }
  return out;
}

Words ReshapeFilter(std::span<const Word> filters, const ConvGeometry& g) {
  const std::size_t patch = g.patch();
  Require(filters.size() == g.out_channels * patch, ErrorKind::kShape,
          "conv filter size does not match geometry");
  Words out(patch * g.out_channels);
  for (std::size_t o = 0; o < g.out_channels; ++o) {
    for (std::size_t p = 0; p < patch; ++p) out[p * g.out_channels + o] = filters[o * patch + p];
  }
  return out;
}

Words ReshapeOutput(std::span<const Word> y, const ConvGeometry& g) {
  const std::size_t positions = g.out_height() * g.out_width();
  Require(y.size() == positions * g.out_channels, ErrorKind::kShape,
          "conv output size does not match geometry");
  Words out(y.size());
  for (std::size_t p = 0; p < positions; ++p) {
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      out[o * positions + p] = y[p * g.out_channels + o];
    }
  }
  return out;
}

// --- secure layers ----------------------------------------------------------------

namespace {

// Adds a per-column bias to a rows x cols matrix.
Words AddBiasRows(Words z, std::span<const Word> bias, std::size_t cols,
                  const RingParams& ring) {
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = ring.Reduce(z[i] + bias[i % cols]);
  return z;
}

// Windows of a CHW tensor, window-major: entry [w * n^2 + j].
Words GatherWindows(std::span<const Word> x, const PoolGeometry& g) {
  g.Validate();
  Require(x.size() == g.channels * g.height * g.width, ErrorKind::kShape,
          "pool input size does not match geometry");
  const std::size_t oh = g.out_height(), ow = g.out_width();
  Words out;
  out.reserve(g.channels * oh * ow * g.window * g.window);
  for (std::size_t ch = 0; ch < g.channels; ++ch) {
    for (std::size_t r = 0; r < oh; ++r) {
      for (std::size_t c = 0; c < ow; ++c) {
        for (std::size_t wr = 0; wr < g.window; ++wr) {
          for (std::size_t wc = 0; wc < g.window; ++wc) {
            out.push_back(x[(ch * g.height + r * g.stride + wr) * g.width + c * g.stride + wc]);
          }
        }
      }
    }
  }
  return out;
}

// Balanced tournament over `per` candidates in each of `windows` groups;
// max_fn reduces two equal-length vectors elementwise.
template <typename MaxFn>
Words Tournament(Words cur, std::size_t windows, std::size_t per, MaxFn&& max_fn) {
  while (per > 1) {
    const std::size_t pairs = per / 2;
    const std::size_t next = per - pairs;
    Words a, b;
    a.reserve(windows * pairs);
    b.reserve(windows * pairs);
    for (std::size_t w = 0; w < windows; ++w) {
      for (std::size_t p = 0; p < pairs; ++p) {
        a.push_back(cur[w * per + 2 * p]);
        b.push_back(cur[w * per + 2 * p + 1]);
      }
    }
    const Words m = max_fn(a, b);
    Words out(windows * next);
    for (std::size_t w = 0; w < windows; ++w) {
      for (std::size_t p = 0; p < pairs; ++p) out[w * next + p] = m[w * pairs + p];
      if (per % 2 == 1) out[w * next + pairs] = cur[w * per + per - 1];
    }
    cur = std::move(out);
    per = next;
  }
  return cur;
}

void CheckSplineBudget(const RingParams& ring) {
  Require(3 * ring.frac + 2 <= ring.bits - 2, ErrorKind::kConfig,
          "spline evaluation at scale 3f does not fit the ring");
}

}  // namespace

Words SecFc(Session& s, std::span<const Word> x, std::size_t rows, const FcParams& p) {
  const RingParams& ring = s.ring();
  CheckScaleBudget(ring, 2 * ring.frac, "fc layer");
  Require(x.size() == rows * p.in, ErrorKind::kShape, "fc input size mismatch");
  Words z = SMatMul(s, x, p.weights, {rows, p.in, p.out});
  if (s.is_server()) z = AddBiasRows(std::move(z), p.bias, p.out, ring);
  return Truncate(s, z, ring.frac);
}

Words SecConv(Session& s, std::span<const Word> x, const ConvParams& p) {
  const RingParams& ring = s.ring();
  const ConvGeometry& g = p.geom;
  CheckScaleBudget(ring, 2 * ring.frac, "conv layer");
  const Words patches = ReshapeInput(x, g);
  const std::size_t positions = g.out_height() * g.out_width();
  const Words filter = s.is_server() ? ReshapeFilter(p.filters, g) : Words{};
  Words z = SMatMul(s, patches, filter, {positions, g.patch(), g.out_channels});
  if (s.is_server()) z = AddBiasRows(std::move(z), p.bias, g.out_channels, ring);
  return ReshapeOutput(Truncate(s, z, ring.frac), g);
}

Words SecRelu(Session& s, std::span<const Word> x) {
  const Bits d = SDRelu(s, x);
  return SBitXa(s, d, x);
}

Words SecMax(Session& s, std::span<const Word> a, std::span<const Word> b) {
  const RingParams& ring = s.ring();
  return Add(SecRelu(s, Sub(a, b, ring)), b, ring);
}

Words SecMaxPool(Session& s, std::span<const Word> x, const PoolGeometry& g) {
  const Words windows = GatherWindows(x, g);
  const std::size_t per = g.window * g.window;
  return Tournament(windows, windows.size() / per, per,
                    [&](const Words& a, const Words& b) { return SecMax(s, a, b); });
}

Words SecSpline(Session& s, std::span<const Word> x, const PiecewisePoly& poly) {
  CheckSplineBudget(s.ring());
  const EncodedPieces pieces = s.is_server() ? poly.Encode(s.ring()) : EncodedPieces{};
  return SPiePol(s, x, poly.pieces(), pieces);
}

Words SecMulTrunc(Session& s, std::span<const Word> a, std::span<const Word> b) {
  CheckScaleBudget(s.ring(), 2 * s.ring().frac, "shared multiplication");
  return Truncate(s, SSharedMul(s, a, b), s.ring().frac);
}

// --- plaintext mirrors --------------------------------------------------------------

namespace {

Words ShiftAll(Words v, int shift, const RingParams& ring) {
  for (Word& w : v) w = ArithShift(w, shift, ring);
  return v;
}

}  // namespace

Words PlainFc(std::span<const Word> x, std::size_t rows, const FcParams& p,
              const RingParams& ring) {
  Require(x.size() == rows * p.in, ErrorKind::kShape, "fc input size mismatch");
  Words z = AddBiasRows(MatMul(x, p.weights, rows, p.in, p.out, ring), p.bias, p.out, ring);
  return ShiftAll(std::move(z), ring.frac, ring);
}

Words PlainConv(std::span<const Word> x, const ConvParams& p, const RingParams& ring) {
  const ConvGeometry& g = p.geom;
  const std::size_t positions = g.out_height() * g.out_width();
  Words z = MatMul(ReshapeInput(x, g), ReshapeFilter(p.filters, g), positions, g.patch(),
                   g.out_channels, ring);
  z = AddBiasRows(std::move(z), p.bias, g.out_channels, ring);
  return ReshapeOutput(ShiftAll(std::move(z), ring.frac, ring), g);
}

Words PlainRelu(std::span<const Word> x, const RingParams& ring) {
  Words out(x.begin(), x.end());
  for (Word& v : out) {
    if (Msb(v, ring)) v = 0;
  }
  return out;
}

Words PlainMaxPool(std::span<const Word> x, const PoolGeometry& g, const RingParams& ring) {
  const Words windows = GatherWindows(x, g);
  const std::size_t per = g.window * g.window;
  return Tournament(windows, windows.size() / per, per, [&](const Words& a, const Words& b) {
    return Add(PlainRelu(Sub(a, b, ring), ring), b, ring);
  });
}

Words PlainSpline(std::span<const Word> x, const EncodedPieces& pieces,
                  const RingParams& ring) {
  Words out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const std::int64_t xs = ToSigned(x[j], ring);
    std::size_t i = 0;
    while (i < pieces.knots.size() && xs >= ToSigned(pieces.knots[i], ring)) ++i;
    const Word u = ring.Reduce(x[j] - pieces.centers[i]);
    const Word v = ring.Reduce(pieces.q2[i] * u * u + pieces.q1[i] * u + pieces.q0[i]);
    out[j] = ArithShift(v, 2 * ring.frac, ring);
  }
  return out;
}

Words PlainMulTrunc(std::span<const Word> a, std::span<const Word> b,
                    const RingParams& ring) {
  return ShiftAll(Hadamard(a, b, ring), ring.frac, ring);
}

// --- sequential model -----------------------------------------------------------------

std::string LayerSpec::Name() const {
  std::ostringstream os;
  switch (kind) {
    case LayerKind::kFc: os << "fc " << fc.in << "->" << fc.out; break;
    case LayerKind::kConv:
      os << "conv " << conv.geom.in_channels << "->" << conv.geom.out_channels << " k"
         << conv.geom.kernel;
      break;
    case LayerKind::kRelu: os << "relu"; break;
    case LayerKind::kMaxPool: os << "maxpool " << pool.window << "x" << pool.window; break;
    case LayerKind::kSigmoid: os << "sigmoid"; break;
    case LayerKind::kTanh: os << "tanh"; break;
  }
  return os.str();
}

namespace {

using nlohmann::json;

void Flatten(const json& j, std::vector<double>& out) {
  if (j.is_array()) {
    for (const auto& e : j) Flatten(e, out);
  } else {
    Require(j.is_number(), ErrorKind::kConfig, "weights must be numbers");
    out.push_back(j.get<double>());
  }
}

std::vector<double> Numbers(const json& layer, const char* key) {
  std::vector<double> out;
  if (layer.contains(key)) Flatten(layer.at(key), out);
  return out;
}

std::size_t Product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

SequentialModel SequentialModel::FromJson(const std::string& text, const RingParams& ring) {
  ring.Validate();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfig, std::string("model is not valid JSON: ") + e.what());
  }
  SequentialModel m;
  m.ring_ = ring;
  try {
    m.input_shape_ = doc.at("input").get<std::vector<std::size_t>>();
    Require(!m.input_shape_.empty() && Product(m.input_shape_) > 0, ErrorKind::kConfig,
            "model input shape must be non-empty");
    int pieces = 12;
    double lo = -6, hi = 6;
    if (doc.contains("spline")) {
      const json& sp = doc.at("spline");
      pieces = sp.value("pieces", pieces);
      lo = sp.value("lo", lo);
      hi = sp.value("hi", hi);
    }
    m.sigmoid_ = FitSpline(SplineTarget::kSigmoid, pieces, lo, hi);
    m.tanh_ = FitSpline(SplineTarget::kTanh, pieces, lo, hi);

    std::vector<std::size_t> shape = m.input_shape_;
    for (const json& layer : doc.at("layers")) {
      LayerSpec spec;
      spec.in_shape = shape;
      const std::string type = layer.at("type").get<std::string>();
      if (type == "fc") {
        spec.kind = LayerKind::kFc;
        const std::size_t in = Product(shape);
        const std::size_t out = layer.at("out").get<std::size_t>();
        spec.fc = FcParams::Encode(in, out, Numbers(layer, "weights"), Numbers(layer, "bias"),
                                   ring);
        shape = {out};
      } else if (type == "conv") {
        spec.kind = LayerKind::kConv;
        Require(shape.size() == 3, ErrorKind::kShape, "conv needs a CHW input");
        ConvGeometry g;
        g.in_channels = shape[0];
        g.height = shape[1];
        g.width = shape[2];
        g.out_channels = layer.at("out_channels").get<std::size_t>();
        g.kernel = layer.at("kernel").get<std::size_t>();
        g.stride = layer.value("stride", std::size_t{1});
        g.padding = layer.value("padding", std::size_t{0});
        spec.conv = ConvParams::Encode(g, Numbers(layer, "weights"), Numbers(layer, "bias"), ring);
        shape = {g.out_channels, g.out_height(), g.out_width()};
      } else if (type == "relu" || type == "sigmoid" || type == "tanh") {
        spec.kind = type == "relu"      ? LayerKind::kRelu
                    : type == "sigmoid" ? LayerKind::kSigmoid
                                        : LayerKind::kTanh;
      } else if (type == "maxpool") {
        spec.kind = LayerKind::kMaxPool;
        Require(shape.size() == 3, ErrorKind::kShape, "maxpool needs a CHW input");
        PoolGeometry g{shape[0], shape[1], shape[2], layer.value("window", std::size_t{2}),
                       layer.value("stride", std::size_t{2})};
        g.Validate();
        spec.pool = g;
        shape = {g.channels, g.out_height(), g.out_width()};
      } else {
        Fail(ErrorKind::kConfig, "unknown layer type '" + type + "'");
      }
      spec.out_shape = shape;
      m.layers_.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfig, std::string("malformed model: ") + e.what());
  }
  return m;
}

SequentialModel SequentialModel::Load(const std::string& path, const RingParams& ring) {
  const auto bytes = ReadFileBytes(path);
  return FromJson(std::string(bytes.begin(), bytes.end()), ring);
}

SequentialModel SequentialModel::Public() const {
  SequentialModel m = *this;
  for (LayerSpec& l : m.layers_) {
    l.fc = l.fc.Public();
    l.conv = l.conv.Public();
  }
  return m;
}

std::vector<std::size_t> SequentialModel::output_shape() const {
  return layers_.empty() ? input_shape_ : layers_.back().out_shape;
}

std::size_t SequentialModel::input_size() const { return Product(input_shape_); }

Words SequentialModel::SecureForward(Session& s, std::span<const Word> x) const {
  Require(x.size() == input_size(), ErrorKind::kShape, "model input size mismatch");
  Words cur(x.begin(), x.end());
  for (const LayerSpec& l : layers_) {
    LayerScope scope(s, l.Name());
    switch (l.kind) {
      case LayerKind::kFc: cur = SecFc(s, cur, 1, l.fc); break;
      case LayerKind::kConv: cur = SecConv(s, cur, l.conv); break;
      case LayerKind::kRelu: cur = SecRelu(s, cur); break;
      case LayerKind::kMaxPool: cur = SecMaxPool(s, cur, l.pool); break;
      case LayerKind::kSigmoid: cur = SecSpline(s, cur, sigmoid_); break;
      case LayerKind::kTanh: cur = SecSpline(s, cur, tanh_); break;
    }
  }
  return cur;
}

Words SequentialModel::PlainForward(std::span<const Word> x) const {
  Require(x.size() == input_size(), ErrorKind::kShape, "model input size mismatch");
  Words cur(x.begin(), x.end());
  for (const LayerSpec& l : layers_) {
    switch (l.kind) {
      case LayerKind::kFc: cur = PlainFc(cur, 1, l.fc, ring_); break;
      case LayerKind::kConv: cur = PlainConv(cur, l.conv, ring_); break;
      case LayerKind::kRelu: cur = PlainRelu(cur, ring_); break;
      case LayerKind::kMaxPool: cur = PlainMaxPool(cur, l.pool, ring_); break;
      case LayerKind::kSigmoid: cur = PlainSpline(cur, sigmoid_.Encode(ring_), ring_); break;
      case LayerKind::kTanh: cur = PlainSpline(cur, tanh_.Encode(ring_), ring_); break;
    }
  }
  return cur;
}

}  // namespace ssinfer
