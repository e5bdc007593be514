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

// Message-passing GNN inference over a secret-shared graph.
//
// Per step t = 1..T:
//   message  m_vu = MLP([h_u | e_vu]) for every ordered pair (v, u)
//   M_v      = sum_u G_vu m_vu                      (G shared, so degrees stay hidden)
//   phi, eta = Sig(ReLU(FC m) + ReLU(FC h))
//   theta    = Tanh(ReLU(FC m) + eta o ReLU(FC h))
//   h'       = (1 - phi) o theta + phi o h
// Readout on H1 = H^(1) and HT = H^(T):
//   R = sum_v DReLU(z_v) * (Sig(r_v) o z_v),  r = MLP_R([H1 | HT]), z = MLP_Z(HT)
//
// Node count n and widths are public; adjacency, edge attributes and
// features are not.

#ifndef SSINFER_GNN_HPP_
#define SSINFER_GNN_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ssinfer/layers.hpp"
#include "ssinfer/protocols.hpp"

namespace ssinfer {

// --- graphs -----------------------------------------------------------------------

struct GraphData {
  std::size_t n = 0;         // nodes
  std::size_t m = 0;         // feature width
  std::size_t edge_dim = 1;  // attributes per ordered pair
  std::vector<std::uint8_t> adjacency;  // n x n
  std::vector<double> edges;            // n x n x edge_dim
  std::vector<double> features;         // n x m

  static GraphData Empty(std::size_t n, std::size_t m, std::size_t edge_dim = 1);
  void AddEdge(std::size_t u, std::size_t v, const std::vector<double>& attr);
  void Validate() const;
  // Applies a node relabeling: new node perm[i] is old node i.
  GraphData Permuted(const std::vector<std::size_t>& perm) const;

  // {"n": 3, "m": 2, "edge_dim": 1, "features": [[...], ...],
  //  "edges": [[u, v, attr...], ...]} with edges undirected, or a dense
  //  "adjacency" matrix.
  static GraphData FromJson(const std::string& text);
  static GraphData Load(const std::string& path);
  std::string ToJson() const;
};

// One party's additive share of an encoded graph. G is encoded as the
// integers 0/1, E and H at scale f.
struct GraphShares {
  Party party = Party::kClient;
  RingParams ring;
  std::size_t n = 0, m = 0, edge_dim = 1;
  Words g, e, h;

  std::size_t words() const { return g.size() + e.size() + h.size(); }
  std::vector<std::uint8_t> Serialize() const;
  static GraphShares Deserialize(std::span<const std::uint8_t> bytes);
  void Save(const std::string& path) const;
  static GraphShares Load(const std::string& path);
};

// Encoded plaintext graph, as both parties' shares sum to.
GraphShares EncodeGraph(const GraphData& d, const RingParams& ring);
std::pair<GraphShares, GraphShares> SplitGraph(const GraphData& d, const RingParams& ring,
                                               std::uint64_t seed);
GraphShares ReconstructGraph(const GraphShares& a, const GraphShares& b);

// --- model ------------------------------------------------------------------------

struct MpnnConfig {
  std::size_t m = 4;         // node feature width (also the message width)
  std::size_t edge_dim = 1;
  std::size_t hidden = 8;
  std::size_t out = 2;
  int steps = 3;             // T
  int iota = 1;              // FC + ReLU blocks in the message net
  int spline_pieces = 12;
  double spline_lo = -6, spline_hi = 6;
  void Validate() const;
  // Architecture fields of a model file; "weights" may be absent.
  static MpnnConfig FromJson(const std::string& text);
};

struct RealFc {
  std::size_t in = 0, out = 0;
  std::vector<double> w;  // in x out
  std::vector<double> b;  // out
};

struct MpnnWeights {
  MpnnConfig config;
  std::vector<RealFc> message;  // iota + 1 layers, ReLU between
  RealFc update_m, update_h;    // m -> 3m, columns [phi | eta | theta]
  std::vector<RealFc> readout_r, readout_z;

  // Uniform in +-scale / sqrt(in), biases in +-scale / 4.
  static MpnnWeights Random(const MpnnConfig& cfg, std::uint64_t seed, double scale = 1.0);
  void Validate() const;

  static MpnnWeights FromJson(const std::string& text);
  static MpnnWeights Load(const std::string& path);
  std::string ToJson() const;
};

// Ring-encoded weights plus fitted activations. Public() drops the weights,
// leaving only what the client needs.
struct EncodedMpnn {
  MpnnConfig config;
  RingParams ring;
  std::vector<FcParams> message;
  FcParams update_m, update_h;
  std::vector<FcParams> readout_r, readout_z;
  PiecewisePoly sigmoid, tanh;

  static EncodedMpnn Encode(const MpnnWeights& w, const RingParams& ring);
  static EncodedMpnn Shapes(const MpnnConfig& cfg, const RingParams& ring);
  EncodedMpnn Public() const;
};

// --- secure pipeline ------------------------------------------------------------------

// Client sends the server its share; the server learns nothing but (n, m,
// edge_dim). The client passes the server's share, the server nullptr. Only
// the server's return value is populated.
GraphShares UploadGraph(Session& s, const GraphShares* server_share, std::size_t n,
                        std::size_t m, std::size_t edge_dim);

Words PrivMf(Session& s, const GraphShares& d, std::span<const Word> h,
             const EncodedMpnn& w);
Words PrivUf(Session& s, std::span<const Word> msg, std::span<const Word> h,
             const EncodedMpnn& w, std::size_t n);
Words PrivRf(Session& s, std::span<const Word> h1, std::span<const Word> ht,
             const EncodedMpnn& w, std::size_t n);

// Shares of the readout vector (length config.out, scale f).
Words SecureForward(Session& s, const GraphShares& d, const EncodedMpnn& w);
// Full run: forward pass, then the server returns its share. The client gets
// the decoded output; the server gets an empty vector.
std::vector<double> SecureInfer(Session& s, const GraphShares& d, const EncodedMpnn& w);

// Dealer plan for one inference on graphs with n nodes.
Requirements PlanMpnn(const MpnnConfig& cfg, const RingParams& ring, std::size_t n,
                      TruncMode mode = TruncMode::kExact);

// --- references ------------------------------------------------------------------------

struct PlainTrace {
  std::vector<Words> states;  // H^(0..T), n x m each
  Words readout;
};

// Bit-exact mirror of SecureForward under exact truncation.
PlainTrace PlaintextTrace(const GraphShares& encoded, const EncodedMpnn& w);
Words PlaintextForward(const GraphShares& encoded, const EncodedMpnn& w);
std::vector<double> PlaintextInfer(const GraphData& d, const MpnnWeights& w,
                                   const RingParams& ring);
// Same network in double precision with exact activations.
std::vector<double> FloatInfer(const GraphData& d, const MpnnWeights& w);

}  // namespace ssinfer

#endif  // SSINFER_GNN_HPP_
