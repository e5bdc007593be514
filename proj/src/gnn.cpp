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

#include "ssinfer/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "json.hpp"
#include "ssinfer/bytes.hpp"
#include "ssinfer/error.hpp"

namespace ssinfer {

using nlohmann::json;

// --- graphs -------------------------------------------------------------------------

GraphData GraphData::Empty(std::size_t n, std::size_t m, std::size_t edge_dim) {
  GraphData d;
  d.n = n;
  d.m = m;
  d.edge_dim = edge_dim;
  d.adjacency.assign(n * n, 0);
  d.edges.assign(n * n * edge_dim, 0.0);
  d.features.assign(n * m, 0.0);
  return d;
}

void GraphData::AddEdge(std::size_t u, std::size_t v, const std::vector<double>& attr) {
  Require(u < n && v < n && u != v, ErrorKind::kShape, "edge endpoints out of range");
  Require(attr.size() == edge_dim, ErrorKind::kShape, "edge attribute width mismatch");
  for (auto [a, b] : {std::pair{u, v}, std::pair{v, u}}) {
    adjacency[a * n + b] = 1;
    std::copy(attr.begin(), attr.end(), edges.begin() + (a * n + b) * edge_dim);
  }
}

void GraphData::Validate() const {
  Require(n > 0 && m > 0 && edge_dim > 0, ErrorKind::kShape, "graph dimensions must be positive");
  Require(adjacency.size() == n * n && edges.size() == n * n * edge_dim &&
              features.size() == n * m,
          ErrorKind::kShape, "graph tensors do not match (n, m, edge_dim)");
  for (std::size_t i = 0; i < n; ++i) {
    Require(adjacency[i * n + i] == 0, ErrorKind::kShape, "adjacency diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      Require(adjacency[i * n + j] <= 1, ErrorKind::kShape, "adjacency entries must be 0/1");
    }
  }
}

GraphData GraphData::Permuted(const std::vector<std::size_t>& perm) const {
  Require(perm.size() == n, ErrorKind::kShape, "permutation length must equal n");
  GraphData out = Empty(n, m, edge_dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.adjacency[perm[i] * n + perm[j]] = adjacency[i * n + j];
      for (std::size_t k = 0; k < edge_dim; ++k) {
        out.edges[(perm[i] * n + perm[j]) * edge_dim + k] = edges[(i * n + j) * edge_dim + k];
      }
    }
    for (std::size_t k = 0; k < m; ++k) out.features[perm[i] * m + k] = features[i * m + k];
  }
  return out;
}

GraphData GraphData::FromJson(const std::string& text) {
  try {
    const json doc = json::parse(text);
    const std::size_t n = doc.at("n").get<std::size_t>();
    const std::size_t m = doc.at("m").get<std::size_t>();
    GraphData d = Empty(n, m, doc.value("edge_dim", std::size_t{1}));
    const auto features = doc.at("features").get<std::vector<std::vector<double>>>();
    Require(features.size() == n, ErrorKind::kShape, "features must have n rows");
    for (std::size_t i = 0; i < n; ++i) {
      Require(features[i].size() == m, ErrorKind::kShape, "feature rows must have m entries");
      std::copy(features[i].begin(), features[i].end(), d.features.begin() + i * m);
    }
    if (doc.contains("edges")) {
      for (const json& e : doc.at("edges")) {
        const auto u = e.at(0).get<std::size_t>(), v = e.at(1).get<std::size_t>();
        std::vector<double> attr(d.edge_dim, 1.0);
        if (e.size() > 2) {
          Require(e.size() == 2 + d.edge_dim, ErrorKind::kShape, "edge attribute width mismatch");
          for (std::size_t k = 0; k < d.edge_dim; ++k) attr[k] = e.at(2 + k).get<double>();
        }
        d.AddEdge(u, v, attr);
      }
    }
    if (doc.contains("adjacency")) {
      const auto adj = doc.at("adjacency").get<std::vector<std::vector<int>>>();
      Require(adj.size() == n, ErrorKind::kShape, "adjacency must be n x n");
      for (std::size_t i = 0; i < n; ++i) {
        Require(adj[i].size() == n, ErrorKind::kShape, "adjacency must be n x n");
        for (std::size_t j = 0; j < n; ++j) {
          if (adj[i][j] == 0) continue;
          d.adjacency[i * n + j] = 1;
          if (!doc.contains("edges")) {
            for (std::size_t k = 0; k < d.edge_dim; ++k) d.edges[(i * n + j) * d.edge_dim + k] = 1.0;
          }
        }
      }
    }
    d.Validate();
    return d;
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfig, std::string("malformed graph: ") + e.what());
  }
}

GraphData GraphData::Load(const std::string& path) {
  const auto bytes = ReadFileBytes(path);
  return FromJson(std::string(bytes.begin(), bytes.end()));
}

std::string GraphData::ToJson() const {
  json doc;
  doc["n"] = n;
  doc["m"] = m;
  doc["edge_dim"] = edge_dim;
  json feats = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    feats.push_back(std::vector<double>(features.begin() + i * m, features.begin() + (i + 1) * m));
  }
  doc["features"] = feats;
  json edge_list = json::array();
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (!adjacency[u * n + v]) continue;
      json e = {u, v};
      for (std::size_t k = 0; k < edge_dim; ++k) e.push_back(edges[(u * n + v) * edge_dim + k]);
      edge_list.push_back(e);
    }
  }
  doc["edges"] = edge_list;
  return doc.dump(1);
}

// --- shares -------------------------------------------------------------------------

namespace {

constexpr char kShareMagic[4] = {'P', 'G', 'S', 'H'};
constexpr std::uint8_t kShareVersion = 1;

}  // namespace

std::vector<std::uint8_t> GraphShares::Serialize() const {
  ByteWriter w;
  w.Raw(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(kShareMagic), 4));
  w.U8(kShareVersion);
  w.U8(static_cast<std::uint8_t>(Index(party)));
  w.U8(static_cast<std::uint8_t>(ring.bits));
  w.U8(static_cast<std::uint8_t>(ring.frac));
  w.U32(static_cast<std::uint32_t>(n));
  w.U32(static_cast<std::uint32_t>(m));
  w.U32(static_cast<std::uint32_t>(edge_dim));
  w.RingWords(g, ring);
  w.RingWords(e, ring);
  w.RingWords(h, ring);
  w.U32(Crc32(w.bytes()));
  return std::move(w.bytes());
}

GraphShares GraphShares::Deserialize(std::span<const std::uint8_t> bytes) {
  Require(bytes.size() >= 24, ErrorKind::kIntegrity, "share file too short");
  const std::size_t body = bytes.size() - 4;
  Require(ByteReader(bytes.subspan(body)).U32() == Crc32(bytes.first(body)),
          ErrorKind::kIntegrity, "share file checksum mismatch");
  ByteReader r(bytes.first(body));
  const auto magic = r.Raw(4);
  Require(std::equal(magic.begin(), magic.end(), kShareMagic), ErrorKind::kIntegrity,
          "not a graph share file (bad magic)");
  Require(r.U8() == kShareVersion, ErrorKind::kIntegrity, "unsupported share file version");
  GraphShares s;
  const std::uint8_t party = r.U8();
  Require(party <= 1, ErrorKind::kIntegrity, "bad party byte");
  s.party = static_cast<Party>(party);
  s.ring.bits = r.U8();
  s.ring.frac = r.U8();
  s.ring.Validate();
  s.n = r.U32();
  s.m = r.U32();
  s.edge_dim = r.U32();
  s.g = r.RingWords(s.n * s.n, s.ring);
  s.e = r.RingWords(s.n * s.n * s.edge_dim, s.ring);
  s.h = r.RingWords(s.n * s.m, s.ring);
  Require(r.remaining() == 0, ErrorKind::kIntegrity, "trailing bytes in share file");
  return s;
}

void GraphShares::Save(const std::string& path) const { WriteFileBytes(path, Serialize()); }

GraphShares GraphShares::Load(const std::string& path) { return Deserialize(ReadFileBytes(path)); }

GraphShares EncodeGraph(const GraphData& d, const RingParams& ring) {
  d.Validate();
  GraphShares s;
  s.party = Party::kClient;
  s.ring = ring;
  s.n = d.n;
  s.m = d.m;
  s.edge_dim = d.edge_dim;
  for (std::uint8_t a : d.adjacency) s.g.push_back(a);
  for (double v : d.edges) s.e.push_back(FxEncode(v, ring).value);
  for (double v : d.features) s.h.push_back(FxEncode(v, ring).value);
  return s;
}

std::pair<GraphShares, GraphShares> SplitGraph(const GraphData& d, const RingParams& ring,
                                               std::uint64_t seed) {
  const GraphShares plain = EncodeGraph(d, ring);
  Rng rng(seed, "graph-split");
  GraphShares a = plain, b = plain;
  a.party = Party::kClient;
  b.party = Party::kServer;
  for (auto [src, x, y] : {std::tuple{&plain.g, &a.g, &b.g}, std::tuple{&plain.e, &a.e, &b.e},
                           std::tuple{&plain.h, &a.h, &b.h}}) {
    std::tie(*x, *y) = ShareVector(*src, rng, ring);
  }
  return {std::move(a), std::move(b)};
}

GraphShares ReconstructGraph(const GraphShares& a, const GraphShares& b) {
  Require(a.n == b.n && a.m == b.m && a.edge_dim == b.edge_dim && a.ring == b.ring,
          ErrorKind::kShape, "share metadata differs");
  Require(a.party != b.party, ErrorKind::kPartyMismatch, "need one share from each party");
  GraphShares out = a;
  out.g = Add(a.g, b.g, a.ring);
  out.e = Add(a.e, b.e, a.ring);
  out.h = Add(a.h, b.h, a.ring);
  return out;
}

// --- model -------------------------------------------------------------------------

void MpnnConfig::Validate() const {
  Require(m > 0 && edge_dim > 0 && hidden > 0 && out > 0, ErrorKind::kConfig,
          "MPNN widths must be positive");
  Require(steps >= 1, ErrorKind::kConfig, "MPNN needs at least one message-passing step");
  Require(iota >= 1, ErrorKind::kConfig, "message net needs at least one FC+ReLU block");
}

MpnnConfig MpnnConfig::FromJson(const std::string& text) {
  MpnnConfig c;
  try {
    const json doc = json::parse(text);
    c.m = doc.at("feature_dim").get<std::size_t>();
    c.edge_dim = doc.value("edge_dim", std::size_t{1});
    c.hidden = doc.at("hidden").get<std::size_t>();
    c.out = doc.at("out").get<std::size_t>();
    c.steps = doc.value("T", 3);
    c.iota = doc.value("iota", 1);
    if (doc.contains("spline")) {
      const json& sp = doc.at("spline");
      c.spline_pieces = sp.value("pieces", c.spline_pieces);
      c.spline_lo = sp.value("lo", c.spline_lo);
      c.spline_hi = sp.value("hi", c.spline_hi);
    }
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfig, std::string("malformed MPNN model: ") + e.what());
  }
  c.Validate();
  return c;
}

namespace {

RealFc RandomFc(std::size_t in, std::size_t out, double scale, Rng& rng) {
  RealFc fc{in, out, std::vector<double>(in * out), std::vector<double>(out)};
  const double bound = scale / std::sqrt(static_cast<double>(in));
  for (double& v : fc.w) v = rng.Uniform(-bound, bound);
  for (double& v : fc.b) v = rng.Uniform(-scale / 4, scale / 4);
  return fc;
}

std::vector<RealFc> RandomMlp(std::size_t in, std::size_t hidden, std::size_t out, int blocks,
                              double scale, Rng& rng) {
  std::vector<RealFc> layers;
  std::size_t width = in;
  for (int i = 0; i < blocks; ++i) {
    layers.push_back(RandomFc(width, hidden, scale, rng));
    width = hidden;
  }
  layers.push_back(RandomFc(width, out, scale, rng));
  return layers;
}

void CheckFc(const RealFc& fc, std::size_t in, std::size_t out, const char* what) {
  Require(fc.in == in && fc.out == out && fc.w.size() == in * out && fc.b.size() == out,
          ErrorKind::kShape, std::string(what) + " has the wrong shape");
}

void CheckMlp(const std::vector<RealFc>& mlp, std::size_t in, std::size_t out,
              const char* what) {
  Require(!mlp.empty(), ErrorKind::kShape, std::string(what) + " is empty");
  std::size_t width = in;
  for (const RealFc& fc : mlp) {
    Require(fc.in == width && fc.w.size() == fc.in * fc.out && fc.b.size() == fc.out,
            ErrorKind::kShape, std::string(what) + " layers do not chain");
    width = fc.out;
  }
  Require(width == out, ErrorKind::kShape, std::string(what) + " has the wrong output width");
}

json FcToJson(const RealFc& fc) {
  return {{"in", fc.in}, {"out", fc.out}, {"weights", fc.w}, {"bias", fc.b}};
}

RealFc FcFromJson(const json& j) {
  RealFc fc;
  fc.in = j.at("in").get<std::size_t>();
  fc.out = j.at("out").get<std::size_t>();
  fc.w = j.at("weights").get<std::vector<double>>();
  fc.b = j.contains("bias") ? j.at("bias").get<std::vector<double>>()
                            : std::vector<double>(fc.out, 0.0);
  return fc;
}

json MlpToJson(const std::vector<RealFc>& mlp) {
  json out = json::array();
  for (const RealFc& fc : mlp) out.push_back(FcToJson(fc));
  return out;
}

std::vector<RealFc> MlpFromJson(const json& j) {
  std::vector<RealFc> out;
  for (const json& fc : j) out.push_back(FcFromJson(fc));
  return out;
}

}  // namespace

MpnnWeights MpnnWeights::Random(const MpnnConfig& cfg, std::uint64_t seed, double scale) {
  cfg.Validate();
  Rng rng(seed, "mpnn-weights");
  MpnnWeights w;
  w.config = cfg;
  w.message = RandomMlp(cfg.m + cfg.edge_dim, cfg.hidden, cfg.m, cfg.iota, scale, rng);
  w.update_m = RandomFc(cfg.m, 3 * cfg.m, scale, rng);
  w.update_h = RandomFc(cfg.m, 3 * cfg.m, scale, rng);
  w.readout_r = RandomMlp(2 * cfg.m, cfg.hidden, cfg.out, 1, scale, rng);
  w.readout_z = RandomMlp(cfg.m, cfg.hidden, cfg.out, 1, scale, rng);
  return w;
}

void MpnnWeights::Validate() const {
  config.Validate();
  CheckMlp(message, config.m + config.edge_dim, config.m, "message net");
  Require(message.size() == static_cast<std::size_t>(config.iota) + 1, ErrorKind::kShape,
          "message net must have iota + 1 layers");
  CheckFc(update_m, config.m, 3 * config.m, "update_m");
  CheckFc(update_h, config.m, 3 * config.m, "update_h");
  CheckMlp(readout_r, 2 * config.m, config.out, "readout_r");
  CheckMlp(readout_z, config.m, config.out, "readout_z");
}

MpnnWeights MpnnWeights::FromJson(const std::string& text) {
  MpnnWeights w;
  w.config = MpnnConfig::FromJson(text);
  try {
    const json doc = json::parse(text);
    const json& ws = doc.at("weights");
    w.message = MlpFromJson(ws.at("message"));
    w.update_m = FcFromJson(ws.at("update_m"));
    w.update_h = FcFromJson(ws.at("update_h"));
    w.readout_r = MlpFromJson(ws.at("readout_r"));
    w.readout_z = MlpFromJson(ws.at("readout_z"));
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfig, std::string("malformed MPNN model: ") + e.what());
  }
  w.Validate();
  return w;
}

MpnnWeights MpnnWeights::Load(const std::string& path) {
  const auto bytes = ReadFileBytes(path);
  return FromJson(std::string(bytes.begin(), bytes.end()));
}

std::string MpnnWeights::ToJson() const {
  json doc;
  doc["type"] = "mpnn";
  doc["feature_dim"] = config.m;
  doc["edge_dim"] = config.edge_dim;
  doc["hidden"] = config.hidden;
  doc["out"] = config.out;
  doc["T"] = config.steps;
  doc["iota"] = config.iota;
  doc["spline"] = {{"pieces", config.spline_pieces},
                   {"lo", config.spline_lo},
                   {"hi", config.spline_hi}};
  doc["weights"] = {{"message", MlpToJson(message)},
                    {"update_m", FcToJson(update_m)},
                    {"update_h", FcToJson(update_h)},
                    {"readout_r", MlpToJson(readout_r)},
                    {"readout_z", MlpToJson(readout_z)}};
  return doc.dump();
}

namespace {

FcParams EncodeFc(const RealFc& fc, const RingParams& ring) {
  return FcParams::Encode(fc.in, fc.out, fc.w, fc.b, ring);
}

std::vector<FcParams> EncodeMlp(const std::vector<RealFc>& mlp, const RingParams& ring) {
  std::vector<FcParams> out;
  for (const RealFc& fc : mlp) out.push_back(EncodeFc(fc, ring));
  return out;
}

std::vector<FcParams> MlpShapes(std::size_t in, std::size_t hidden, std::size_t out,
                                int blocks) {
  std::vector<FcParams> layers;
  std::size_t width = in;
  for (int i = 0; i < blocks; ++i) {
    layers.push_back({width, hidden, {}, {}});
    width = hidden;
  }
  layers.push_back({width, out, {}, {}});
  return layers;
}

void FitActivations(EncodedMpnn& e) {
  const MpnnConfig& c = e.config;
  e.sigmoid = FitSpline(SplineTarget::kSigmoid, c.spline_pieces, c.spline_lo, c.spline_hi);
  e.tanh = FitSpline(SplineTarget::kTanh, c.spline_pieces, c.spline_lo, c.spline_hi);
}

}  // namespace

EncodedMpnn EncodedMpnn::Encode(const MpnnWeights& w, const RingParams& ring) {
  w.Validate();
  EncodedMpnn e;
  e.config = w.config;
  e.ring = ring;
  e.message = EncodeMlp(w.message, ring);
  e.update_m = EncodeFc(w.update_m, ring);
  e.update_h = EncodeFc(w.update_h, ring);
  e.readout_r = EncodeMlp(w.readout_r, ring);
  e.readout_z = EncodeMlp(w.readout_z, ring);
  FitActivations(e);
  return e;
}

EncodedMpnn EncodedMpnn::Shapes(const MpnnConfig& cfg, const RingParams& ring) {
  cfg.Validate();
  EncodedMpnn e;
  e.config = cfg;
  e.ring = ring;
  e.message = MlpShapes(cfg.m + cfg.edge_dim, cfg.hidden, cfg.m, cfg.iota);
  e.update_m = {cfg.m, 3 * cfg.m, {}, {}};
  e.update_h = {cfg.m, 3 * cfg.m, {}, {}};
  e.readout_r = MlpShapes(2 * cfg.m, cfg.hidden, cfg.out, 1);
  e.readout_z = MlpShapes(cfg.m, cfg.hidden, cfg.out, 1);
  FitActivations(e);
  return e;
}

EncodedMpnn EncodedMpnn::Public() const { return Shapes(config, ring); }

// --- shared plumbing ------------------------------------------------------------------
//
// The secure and plaintext pipelines share their data movement; only the
// nonlinear steps differ. Ops abstracts those steps so both paths run the
// same code.

namespace {

struct SecureOps {
  Session& s;
  const RingParams& ring() const { return s.ring(); }
  Words Fc(std::span<const Word> x, std::size_t rows, const FcParams& p) {
    return SecFc(s, x, rows, p);
  }
  Words Relu(std::span<const Word> x) { return SecRelu(s, x); }
  Words Spline(std::span<const Word> x, const PiecewisePoly& p) { return SecSpline(s, x, p); }
  Words MulTrunc(std::span<const Word> a, std::span<const Word> b) {
    return SecMulTrunc(s, a, b);
  }
  // Products of integer-scale G with f-scale messages need no truncation.
  Words MulNoTrunc(std::span<const Word> a, std::span<const Word> b) {
    return SSharedMul(s, a, b);
  }
  // Sum of two shared products, truncated once.
  Words Blend(std::span<const Word> a1, std::span<const Word> b1, std::span<const Word> a2,
              std::span<const Word> b2) {
    const std::size_t n = a1.size();
    Words a(a1.begin(), a1.end()), b(b1.begin(), b1.end());
    a.insert(a.end(), a2.begin(), a2.end());
    b.insert(b.end(), b2.begin(), b2.end());
    const Words p = SSharedMul(s, a, b);
    Words sum(n);
    for (std::size_t i = 0; i < n; ++i) sum[i] = ring().Reduce(p[i] + p[n + i]);
    return Truncate(s, sum, ring().frac);
  }
  Words OneMinus(std::span<const Word> x) {
    return AddPublic(s, Negate(x, ring()), Word{1} << ring().frac);
  }
  // q = 1{z >= 0} * p.
  Words Gate(std::span<const Word> z, std::span<const Word> p) {
    return SBitXa(s, SDRelu(s, z), p);
  }
};

struct PlainOps {
  RingParams ring_;
  const RingParams& ring() const { return ring_; }
  Words Fc(std::span<const Word> x, std::size_t rows, const FcParams& p) {
    return PlainFc(x, rows, p, ring_);
  }
  Words Relu(std::span<const Word> x) { return PlainRelu(x, ring_); }
  Words Spline(std::span<const Word> x, const PiecewisePoly& p) {
    return PlainSpline(x, p.Encode(ring_), ring_);
  }
  Words MulTrunc(std::span<const Word> a, std::span<const Word> b) {
    return PlainMulTrunc(a, b, ring_);
  }
  Words MulNoTrunc(std::span<const Word> a, std::span<const Word> b) {
    return Hadamard(a, b, ring_);
  }
  Words Blend(std::span<const Word> a1, std::span<const Word> b1, std::span<const Word> a2,
              std::span<const Word> b2) {
    Words out = Add(Hadamard(a1, b1, ring_), Hadamard(a2, b2, ring_), ring_);
    for (Word& v : out) v = ArithShift(v, ring_.frac, ring_);
    return out;
  }
  Words OneMinus(std::span<const Word> x) {
    Words out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      out[i] = ring_.Reduce((Word{1} << ring_.frac) - x[i]);
    }
    return out;
  }
  Words Gate(std::span<const Word> z, std::span<const Word> p) {
    Words out(p.begin(), p.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (Msb(z[i], ring_)) out[i] = 0;
    }
    return out;
  }
};

template <typename Ops>
Words Mlp(Ops& ops, Words x, std::size_t rows, const std::vector<FcParams>& layers) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    x = ops.Fc(x, rows, layers[i]);
    if (i + 1 < layers.size()) x = ops.Relu(x);
  }
  return x;
}

// Columns [c0, c0 + w) of a rows x cols matrix.
Words Columns(std::span<const Word> x, std::size_t rows, std::size_t cols, std::size_t c0,
              std::size_t w) {
  Words out;
  out.reserve(rows * w);
  for (std::size_t r = 0; r < rows; ++r) {
    out.insert(out.end(), x.begin() + r * cols + c0, x.begin() + r * cols + c0 + w);
  }
  return out;
}

// Row-wise concatenation [a | b].
Words HStack(std::span<const Word> a, std::size_t wa, std::span<const Word> b, std::size_t wb,
             std::size_t rows) {
  Words out;
  out.reserve(rows * (wa + wb));
  for (std::size_t r = 0; r < rows; ++r) {
    out.insert(out.end(), a.begin() + r * wa, a.begin() + (r + 1) * wa);
    out.insert(out.end(), b.begin() + r * wb, b.begin() + (r + 1) * wb);
  }
  return out;
}

template <typename Ops>
Words MessageStep(Ops& ops, const GraphShares& d, std::span<const Word> h,
                  const EncodedMpnn& w) {
  const RingParams& ring = ops.ring();
  const std::size_t n = d.n, m = d.m, de = d.edge_dim;
  Require(h.size() == n * m, ErrorKind::kShape, "node state size mismatch");
  // Row v * n + u holds [h_u | e_vu].
  Words x;
  x.reserve(n * n * (m + de));
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t u = 0; u < n; ++u) {
      x.insert(x.end(), h.begin() + u * m, h.begin() + (u + 1) * m);
      x.insert(x.end(), d.e.begin() + (v * n + u) * de, d.e.begin() + (v * n + u + 1) * de);
    }
  }
  const Words msg = Mlp(ops, std::move(x), n * n, w.message);
  Words g(n * n * m);
  for (std::size_t i = 0; i < n * n; ++i) std::fill_n(g.begin() + i * m, m, d.g[i]);
  const Words weighted = ops.MulNoTrunc(g, msg);
  Words agg(n * m, 0);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t j = 0; j < m; ++j) {
        agg[v * m + j] = ring.Reduce(agg[v * m + j] + weighted[(v * n + u) * m + j]);
      }
    }
  }
  return agg;
}

template <typename Ops>
Words UpdateStep(Ops& ops, std::span<const Word> msg, std::span<const Word> h,
                 const EncodedMpnn& w, std::size_t n) {
  const RingParams& ring = ops.ring();
  const std::size_t m = w.config.m;
  Require(msg.size() == n * m && h.size() == n * m, ErrorKind::kShape,
          "update inputs size mismatch");
  const Words a = ops.Fc(msg, n, w.update_m);  // n x 3m
  const Words b = ops.Fc(h, n, w.update_h);
  Words ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  const Words r = ops.Relu(ab);
  const std::span<const Word> ar(r.data(), 3 * n * m), br(r.data() + 3 * n * m, 3 * n * m);

  const Words gates =
      ops.Spline(Add(Columns(ar, n, 3 * m, 0, 2 * m), Columns(br, n, 3 * m, 0, 2 * m), ring),
                 w.sigmoid);  // n x 2m: [phi | eta]
  const Words phi = Columns(gates, n, 2 * m, 0, m);
  const Words eta = Columns(gates, n, 2 * m, m, m);
  const Words cand = Add(Columns(ar, n, 3 * m, 2 * m, m),
                         ops.MulTrunc(eta, Columns(br, n, 3 * m, 2 * m, m)), ring);
  const Words theta = ops.Spline(cand, w.tanh);
  return ops.Blend(ops.OneMinus(phi), theta, phi, h);
}

template <typename Ops>
Words ReadoutStep(Ops& ops, std::span<const Word> h1, std::span<const Word> ht,
                  const EncodedMpnn& w, std::size_t n) {
  const RingParams& ring = ops.ring();
  const std::size_t m = w.config.m, out = w.config.out;
  const Words hh = Mlp(ops, HStack(h1, m, ht, m, n), n, w.readout_r);
  const Words hz = Mlp(ops, Words(ht.begin(), ht.end()), n, w.readout_z);
  const Words gated = ops.MulTrunc(ops.Spline(hh, w.sigmoid), hz);
  const Words q = ops.Gate(hz, gated);
  Words r(out, 0);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t j = 0; j < out; ++j) r[j] = ring.Reduce(r[j] + q[v * out + j]);
  }
  return r;
}

void CheckCompatible(const GraphShares& d, const EncodedMpnn& w) {
  Require(d.m == w.config.m && d.edge_dim == w.config.edge_dim, ErrorKind::kShape,
          "graph widths do not match the model");
  Require(d.g.size() == d.n * d.n && d.e.size() == d.n * d.n * d.edge_dim &&
              d.h.size() == d.n * d.m,
          ErrorKind::kShape, "graph share sizes do not match (n, m, edge_dim)");
}

}  // namespace

// --- secure pipeline -------------------------------------------------------------------

GraphShares UploadGraph(Session& s, const GraphShares* server_share, std::size_t n,
                        std::size_t m, std::size_t edge_dim) {
  const RingParams& ring = s.ring();
  GraphShares out;
  out.party = Party::kServer;
  out.ring = ring;
  out.n = n;
  out.m = m;
  out.edge_dim = edge_dim;
  const std::size_t sizes[3] = {n * n, n * n * edge_dim, n * m};
  const std::size_t total = sizes[0] + sizes[1] + sizes[2];
  if (s.is_client()) {
    Require(server_share != nullptr, ErrorKind::kConfig, "client must supply the server share");
    Require(server_share->words() == total, ErrorKind::kShape, "server share size mismatch");
    PayloadWriter w(ring);
    w.Words(server_share->g).Words(server_share->e).Words(server_share->h);
    s.Send(Tag::kInputShares, w.Finish());
    return out;
  }
  const Payload p = s.Recv(Tag::kInputShares, total);
  PayloadReader r(p, ring);
  out.g = r.Words(sizes[0]);
  out.e = r.Words(sizes[1]);
  out.h = r.Words(sizes[2]);
  return out;
}

Words PrivMf(Session& s, const GraphShares& d, std::span<const Word> h, const EncodedMpnn& w) {
  SecureOps ops{s};
  return MessageStep(ops, d, h, w);
}

Words PrivUf(Session& s, std::span<const Word> msg, std::span<const Word> h,
             const EncodedMpnn& w, std::size_t n) {
  SecureOps ops{s};
  return UpdateStep(ops, msg, h, w, n);
}

Words PrivRf(Session& s, std::span<const Word> h1, std::span<const Word> ht,
             const EncodedMpnn& w, std::size_t n) {
  SecureOps ops{s};
  return ReadoutStep(ops, h1, ht, w, n);
}

Words SecureForward(Session& s, const GraphShares& d, const EncodedMpnn& w) {
  CheckCompatible(d, w);
  Words h = d.h, h1;
  for (int t = 1; t <= w.config.steps; ++t) {
    Words msg;
    {
      LayerScope scope(s, "PrivMF[" + std::to_string(t) + "]");
      msg = PrivMf(s, d, h, w);
    }
    {
      LayerScope scope(s, "PrivUF[" + std::to_string(t) + "]");
      h = PrivUf(s, msg, h, w, d.n);
    }
    if (t == 1) h1 = h;
  }
  LayerScope scope(s, "PrivRF");
  return PrivRf(s, h1, h, w, d.n);
}

std::vector<double> SecureInfer(Session& s, const GraphShares& d, const EncodedMpnn& w) {
  const Words r = SecureForward(s, d, w);
  Words opened;
  {
    LayerScope scope(s, "output");
    opened = RevealTo(s, r, Party::kClient);
  }
  std::vector<double> out;
  for (Word v : opened) out.push_back(FxDecode({v}, s.ring()));
  return out;
}

Requirements PlanMpnn(const MpnnConfig& cfg, const RingParams& ring, std::size_t n,
                      TruncMode mode) {
  const EncodedMpnn shapes = EncodedMpnn::Shapes(cfg, ring);
  Session planner = Session::Planner(Party::kClient, ring, SecurityParams{}, mode);
  GraphShares d;
  d.ring = ring;
  d.n = n;
  d.m = cfg.m;
  d.edge_dim = cfg.edge_dim;
  d.g.assign(n * n, 0);
  d.e.assign(n * n * cfg.edge_dim, 0);
  d.h.assign(n * cfg.m, 0);
  SecureInfer(planner, d, shapes);
  return planner.requirements();
}

// --- references ------------------------------------------------------------------------

PlainTrace PlaintextTrace(const GraphShares& encoded, const EncodedMpnn& w) {
  CheckCompatible(encoded, w);
  PlainOps ops{w.ring};
  PlainTrace trace;
  Words h = encoded.h;
  trace.states.push_back(h);
  for (int t = 1; t <= w.config.steps; ++t) {
    const Words msg = MessageStep(ops, encoded, h, w);
    h = UpdateStep(ops, msg, h, w, encoded.n);
    trace.states.push_back(h);
  }
  trace.readout = ReadoutStep(ops, trace.states[1], h, w, encoded.n);
  return trace;
}

Words PlaintextForward(const GraphShares& encoded, const EncodedMpnn& w) {
  return PlaintextTrace(encoded, w).readout;
}

std::vector<double> PlaintextInfer(const GraphData& d, const MpnnWeights& w,
                                   const RingParams& ring) {
  const Words r = PlaintextForward(EncodeGraph(d, ring), EncodedMpnn::Encode(w, ring));
  std::vector<double> out;
  for (Word v : r) out.push_back(FxDecode({v}, ring));
  return out;
}

namespace {

using Real = std::vector<double>;

Real FcReal(const Real& x, std::size_t rows, const RealFc& fc) {
  Real y(rows * fc.out);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < fc.out; ++j) {
      double acc = fc.b[j];
      for (std::size_t i = 0; i < fc.in; ++i) acc += x[r * fc.in + i] * fc.w[i * fc.out + j];
      y[r * fc.out + j] = acc;
    }
  }
  return y;
}

Real MlpReal(Real x, std::size_t rows, const std::vector<RealFc>& layers) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    x = FcReal(x, rows, layers[i]);
    if (i + 1 < layers.size()) {
      for (double& v : x) v = std::max(v, 0.0);
    }
  }
  return x;
}

}  // namespace

std::vector<double> FloatInfer(const GraphData& d, const MpnnWeights& w) {
  d.Validate();
  w.Validate();
  const std::size_t n = d.n, m = d.m, de = d.edge_dim, out = w.config.out;
  auto relu = [](double v) { return std::max(v, 0.0); };
  Real h = d.features, h1;
  for (int t = 1; t <= w.config.steps; ++t) {
    Real x;
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t u = 0; u < n; ++u) {
        x.insert(x.end(), h.begin() + u * m, h.begin() + (u + 1) * m);
        x.insert(x.end(), d.edges.begin() + (v * n + u) * de,
                 d.edges.begin() + (v * n + u + 1) * de);
      }
    }
    const Real msg = MlpReal(x, n * n, w.message);
    Real agg(n * m, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t u = 0; u < n; ++u) {
        if (!d.adjacency[v * n + u]) continue;
        for (std::size_t j = 0; j < m; ++j) agg[v * m + j] += msg[(v * n + u) * m + j];
      }
    }
    const Real a = FcReal(agg, n, w.update_m), b = FcReal(h, n, w.update_h);
    Real next(n * m);
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t j = 0; j < m; ++j) {
        auto at = [&](const Real& z, std::size_t block) { return relu(z[v * 3 * m + block * m + j]); };
        const double phi = Sigmoid(at(a, 0) + at(b, 0));
        const double eta = Sigmoid(at(a, 1) + at(b, 1));
        const double theta = std::tanh(at(a, 2) + eta * at(b, 2));
        next[v * m + j] = (1 - phi) * theta + phi * h[v * m + j];
      }
    }
    h = std::move(next);
    if (t == 1) h1 = h;
  }
  Real cat;
  for (std::size_t v = 0; v < n; ++v) {
    cat.insert(cat.end(), h1.begin() + v * m, h1.begin() + (v + 1) * m);
    cat.insert(cat.end(), h.begin() + v * m, h.begin() + (v + 1) * m);
  }
  const Real hh = MlpReal(cat, n, w.readout_r);
  const Real hz = MlpReal(h, n, w.readout_z);
  std::vector<double> r(out, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t j = 0; j < out; ++j) {
      const double z = hz[v * out + j];
      if (z >= 0) r[j] += Sigmoid(hh[v * out + j]) * z;
    }
  }
  return r;
}

}  // namespace ssinfer
