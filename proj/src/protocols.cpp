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

#include "ssinfer/protocols.hpp"

#include <string>
#include <utility>

#include "ssinfer/error.hpp"

namespace ssinfer {

// --- session ------------------------------------------------------------------

Session::Session(Party party, const RingParams& ring, const SecurityParams& sec,
                 std::uint64_t local_seed, TruncMode mode)
    : party_(party),
      ring_(ring),
      sec_(sec),
      rng_(local_seed, party == Party::kClient ? "client-local" : "server-local"),
      prg_(std::make_unique<Prg>(sec)),
      trunc_mode_(mode) {
  ring_.Validate();
}

Session::Session(Party party, Endpoint& endpoint, DealerBundle& bundle,
                 std::uint64_t local_seed, TruncMode mode)
    : Session(party, bundle.ring(), bundle.security(), local_seed, mode) {
  Require(bundle.party() == party, ErrorKind::kPartyMismatch,
          "dealer bundle was issued to the other party");
  Require(endpoint.ring() == bundle.ring(), ErrorKind::kConfig,
          "channel and bundle disagree on ring parameters");
  Require(endpoint.session_id() == bundle.session(), ErrorKind::kConfig,
          "channel session id does not match the bundle");
  endpoint_ = &endpoint;
  bundle_ = &bundle;
}

Session Session::Planner(Party party, const RingParams& ring,
                         const SecurityParams& sec, TruncMode mode) {
  return Session(party, ring, sec, 0, mode);
}

Session::Session(Session&&) noexcept = default;
Session::~Session() = default;

void Session::Send(Tag tag, const Payload& payload) {
  if (planning()) return;
  endpoint_->set_phase(phase_);
  endpoint_->Send(tag, payload);
}

Payload Session::Recv(Tag tag, std::size_t words, std::size_t bits) {
  if (planning()) {
    return Payload{Bytes(PayloadBytes(ring_, words, bits), 0), words * ring_.bits + bits};
  }
  endpoint_->set_phase(phase_);
  return endpoint_->Recv(tag, words, bits);
}

Payload Session::Exchange(Tag tag, const Payload& payload, std::size_t words,
                          std::size_t bits) {
  Send(tag, payload);
  return Recv(tag, words, bits);
}

AsymTripleShare Session::TakeAsym(const TripleShape& shape) {
  if (planning()) {
    requirements_.requests.push_back({CorrelationKind::kAsymTriple, shape, 0, 0});
    return PlaceholderAsym(shape);
  }
  return bundle_->TakeAsym(shape);
}

SharedTripleShare Session::TakeShared(const TripleShape& shape) {
  if (planning()) {
    requirements_.requests.push_back({CorrelationKind::kSharedTriple, shape, 0, 0});
    return PlaceholderShared(shape);
  }
  return bundle_->TakeShared(shape);
}

DreluKeyShare Session::TakeDrelu(std::size_t n) {
  if (planning()) {
    requirements_.requests.push_back({CorrelationKind::kDrelu, {}, n, 0});
    return PlaceholderDrelu(n, ring_, sec_);
  }
  return bundle_->TakeDrelu(n);
}

BitXaShare Session::TakeBitXa(std::size_t n) {
  if (planning()) {
    requirements_.requests.push_back({CorrelationKind::kBitXa, {}, n, 0});
    return PlaceholderBitXa(n);
  }
  return bundle_->TakeBitXa(n);
}

TruncKeyShare Session::TakeTrunc(std::size_t n, int shift) {
  if (planning()) {
    requirements_.requests.push_back({CorrelationKind::kTrunc, {}, n, shift});
    return PlaceholderTrunc(n, shift, ring_, sec_);
  }
  return bundle_->TakeTrunc(n, shift);
}

PowerMaskShare Session::TakePowerMask(std::size_t n, int degree) {
  if (planning()) {
    requirements_.requests.push_back({CorrelationKind::kPowerMask, {}, n, degree});
    return PlaceholderPowerMask(n, degree);
  }
  return bundle_->TakePowerMask(n, degree);
}

MeterReading Session::meter() const {
  return planning() ? MeterReading{} : endpoint_->meter().Read();
}

void Session::BeginSegment() {
  if (!planning()) endpoint_->meter().BeginSegment();
}

void Session::BeginLayer(const std::string& name) {
  if (layer_depth_++ == 0) {
    layer_name_ = name;
    layer_start_ = meter();
  }
}

void Session::EndLayer() {
  if (--layer_depth_ == 0) layer_log_.push_back({layer_name_, meter() - layer_start_});
}

// --- helpers --------------------------------------------------------------------

namespace {

Payload Pack(const RingParams& ring, std::span<const Word> words) {
  return PayloadWriter(ring).Words(words).Finish();
}

Words Unpack(const RingParams& ring, const Payload& p, std::size_t n) {
  return PayloadReader(p, ring).Words(n);
}

Words Concat(std::initializer_list<std::span<const Word>> parts) {
  Words out;
  for (auto p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::span<const Word> Slice(const Words& v, std::size_t offset, std::size_t n) {
  return std::span<const Word>(v).subspan(offset, n);
}

// Per-element coefficient with broadcast.
Word At(const Words& v, std::size_t i) { return v.size() == 1 ? v[0] : v[i]; }

void CheckCoeffs(const Session& s, const Words& v, std::size_t n, const char* what) {
  if (!s.is_server()) return;
  Require(v.size() == 1 || v.size() == n, ErrorKind::kShape,
          std::string(what) + " must have one entry or one per element");
}

}  // namespace

Words AddPublic(const Session& s, std::span<const Word> x, Word c) {
  Words out(x.begin(), x.end());
  if (s.is_server()) {
    for (Word& v : out) v = s.ring().Reduce(v + c);
  }
  return out;
}

Words AddPublicVec(const Session& s, std::span<const Word> x, std::span<const Word> c) {
  if (!s.is_server()) return Words(x.begin(), x.end());
  return Add(x, c, s.ring());
}

Words Reveal(Session& s, std::span<const Word> x) {
  const RingParams& ring = s.ring();
  const Payload peer = s.Exchange(Tag::kOutputShares, Pack(ring, x), x.size());
  return Add(x, Unpack(ring, peer, x.size()), ring);
}

Words RevealTo(Session& s, std::span<const Word> x, Party to) {
  const RingParams& ring = s.ring();
  if (s.party() != to) {
    s.Send(Tag::kOutputShares, Pack(ring, x));
    return {};
  }
  return Add(x, Unpack(ring, s.Recv(Tag::kOutputShares, x.size()), x.size()), ring);
}

// --- SMatMul / SEleMul ------------------------------------------------------------

namespace {

Words AsymProduct(Session& s, std::span<const Word> x, std::span<const Word> y,
                  const TripleShape& ts) {
  const RingParams& ring = s.ring();
  const bool matrix = ts.kind == TripleShape::Kind::kMatrix;
  Require(x.size() == ts.a_size(), ErrorKind::kShape, "left operand size mismatch");
  if (s.is_server()) {
    Require(y.size() == ts.b_size(), ErrorKind::kShape, "right operand size mismatch");
  }
  auto product = [&](std::span<const Word> a, std::span<const Word> b) {
    return matrix ? MatMul(a, b, ts.m1, ts.m2, ts.m3, ring) : Hadamard(a, b, ring);
  };
  AsymTripleShare t = s.TakeAsym(ts);

  Words y_minus_b;
  {
    SessionPhase offline(s, Phase::kOffline);
    if (s.is_server()) {
      s.Send(Tag::kSmatmulYB, Pack(ring, Sub(y, t.factor, ring)));
    } else {
      y_minus_b = Unpack(ring, s.Recv(Tag::kSmatmulYB, ts.b_size()), ts.b_size());
    }
  }
  if (s.is_client()) {
    const std::span<const Word> a(t.factor.data(), ts.a_size());
    s.Send(Tag::kSmatmulMaskedX, Pack(ring, Sub(x, a, ring)));
    return Add(product(a, y_minus_b), t.c, ring);
  }
  const Words masked =
      Unpack(ring, s.Recv(Tag::kSmatmulMaskedX, ts.a_size()), ts.a_size());
  return Add(product(Add(masked, x, ring), y), t.c, ring);
}

}  // namespace

Words SMatMul(Session& s, std::span<const Word> x, std::span<const Word> y,
              MatShape shape) {
  return AsymProduct(s, x, y, TripleShape::Matrix(shape.m1, shape.m2, shape.m3));
}

Words SEleMul(Session& s, std::span<const Word> x, std::span<const Word> y) {
  return AsymProduct(s, x, y, TripleShape::Elementwise(x.size()));
}

// --- shared x shared ------------------------------------------------------------

namespace {

Words SharedProduct(Session& s, std::span<const Word> x, std::span<const Word> y,
                    const TripleShape& ts) {
  const RingParams& ring = s.ring();
  Require(x.size() == ts.a_size() && y.size() == ts.b_size(), ErrorKind::kShape,
          "shared multiplication operand size mismatch");
  const bool matrix = ts.kind == TripleShape::Kind::kMatrix;
  auto product = [&](std::span<const Word> a, std::span<const Word> b) {
    return matrix ? MatMul(a, b, ts.m1, ts.m2, ts.m3, ring) : Hadamard(a, b, ring);
  };
  SharedTripleShare t = s.TakeShared(ts);
  const Words e = Sub(x, t.a, ring);
  const Words f = Sub(y, t.b, ring);
  const std::size_t na = ts.a_size(), nb = ts.b_size();
  const Words peer =
      Unpack(ring, s.Exchange(Tag::kSharedMulEF, Pack(ring, Concat({e, f})), na + nb),
             na + nb);
  const Words E = Add(e, Slice(peer, 0, na), ring);
  const Words F = Add(f, Slice(peer, na, nb), ring);
  Words z = Add(Add(product(E, t.b), product(t.a, F), ring), t.c, ring);
  if (s.is_server()) z = Add(z, product(E, F), ring);
  return z;
}

}  // namespace

Words SSharedMul(Session& s, std::span<const Word> x, std::span<const Word> y) {
  return SharedProduct(s, x, y, TripleShape::Elementwise(x.size()));
}

Words SSharedMatMul(Session& s, std::span<const Word> x, std::span<const Word> y,
                    MatShape shape) {
  return SharedProduct(s, x, y, TripleShape::Matrix(shape.m1, shape.m2, shape.m3));
}

// --- SQuaPol ----------------------------------------------------------------------

SquapolState SQuaPolPrepare(Session& s, std::size_t n, const QuadCoeffs& coeffs) {
  const RingParams& ring = s.ring();
  CheckCoeffs(s, coeffs.p0, n, "p0");
  CheckCoeffs(s, coeffs.p1, n, "p1");
  CheckCoeffs(s, coeffs.p2, n, "p2");
  SquapolState st;
  st.n = n;
  for (auto& t : st.t) t = s.TakeAsym(TripleShape::Elementwise(n));
  st.p1a.resize(n);
  st.p2a.resize(n);
  st.p2a2.resize(n);

  SessionPhase offline(s, Phase::kOffline);
  if (s.is_server()) {
    st.coeffs = coeffs;
    Words e(3 * n);
    for (std::size_t j = 0; j < n; ++j) {
      e[j] = ring.Reduce(At(coeffs.p1, j) - st.t[0].factor[j]);
      e[n + j] = ring.Reduce(At(coeffs.p2, j) - st.t[1].factor[j]);
      e[2 * n + j] = ring.Reduce(At(coeffs.p2, j) - st.t[2].factor[j]);
    }
    s.Send(Tag::kSquapolE, Pack(ring, e));
    const Words f = Unpack(ring, s.Recv(Tag::kSquapolF, 4 * n), 4 * n);
    st.f4.assign(f.begin() + 3 * n, f.end());
    for (std::size_t j = 0; j < n; ++j) {
      const Word p1 = At(coeffs.p1, j), p2 = At(coeffs.p2, j);
      st.p1a[j] = ring.Reduce(f[j] * p1 + st.t[0].c[j]);
      st.p2a[j] = ring.Reduce(f[n + j] * p2 + st.t[1].c[j]);
      st.p2a2[j] = ring.Reduce(f[2 * n + j] * p2 + st.t[2].c[j]);
    }
  } else {
    st.mask = UniformVector(n, s.local_rng(), ring);
    const Words e = Unpack(ring, s.Recv(Tag::kSquapolE, 3 * n), 3 * n);
    Words f(4 * n);
    for (std::size_t j = 0; j < n; ++j) {
      const Word a = st.mask[j];
      st.p1a[j] = ring.Reduce(st.t[0].factor[j] * e[j] + st.t[0].c[j]);
      st.p2a[j] = ring.Reduce(st.t[1].factor[j] * e[n + j] + st.t[1].c[j]);
      st.p2a2[j] = ring.Reduce(st.t[2].factor[j] * e[2 * n + j] + st.t[2].c[j]);
      f[j] = ring.Reduce(a - st.t[0].factor[j]);
      f[n + j] = ring.Reduce(a - st.t[1].factor[j]);
      f[2 * n + j] = ring.Reduce(a * a - st.t[2].factor[j]);
      f[3 * n + j] = ring.Reduce(st.p2a[j] - st.t[3].factor[j]);
    }
    s.Send(Tag::kSquapolF, Pack(ring, f));
  }
  return st;
}

void SQuaPolSend(Session& s, SquapolState& st, std::span<const Word> x) {
  const RingParams& ring = s.ring();
  Require(x.size() == st.n, ErrorKind::kShape, "SQuaPol input size mismatch");
  if (s.is_server()) {
    st.online_out = Sub(x, st.t[3].factor, ring);  // e4
    s.Send(Tag::kSquapolE, Pack(ring, st.online_out));
  } else {
    st.online_out = Sub(x, st.mask, ring);  // f5
    s.Send(Tag::kSquapolF, Pack(ring, st.online_out));
  }
}

Words SQuaPolFinish(Session& s, SquapolState& st, std::span<const Word> x) {
  const RingParams& ring = s.ring();
  const std::size_t n = st.n;
  Words z(n);
  if (s.is_client()) {
    const Words e4 = Unpack(ring, s.Recv(Tag::kSquapolE, n), n);
    for (std::size_t j = 0; j < n; ++j) {
      const Word cross = st.t[3].factor[j] * (e4[j] + st.online_out[j]) + st.t[3].c[j];
      z[j] = ring.Reduce(st.p2a2[j] + 2 * cross + st.p1a[j]);
    }
    return z;
  }
  const Words f5 = Unpack(ring, s.Recv(Tag::kSquapolF, n), n);
  const QuadCoeffs& c = st.coeffs;
  for (std::size_t j = 0; j < n; ++j) {
    const Word F = f5[j] + x[j];  // x - a
    const Word p2 = At(c.p2, j);
    const Word cross = F * st.f4[j] + st.t[3].c[j] + F * st.p2a[j];
    z[j] = ring.Reduce(p2 * F * F + st.p2a2[j] + 2 * cross + At(c.p1, j) * F + st.p1a[j] +
                       At(c.p0, j));
  }
  return z;
}

Words SQuaPol(Session& s, std::span<const Word> x, const QuadCoeffs& coeffs) {
  SquapolState st = SQuaPolPrepare(s, x.size(), coeffs);
  SQuaPolSend(s, st, x);
  return SQuaPolFinish(s, st, x);
}

// --- degree-d polynomial ------------------------------------------------------------

Words SPolyD(Session& s, std::span<const Word> x, const std::vector<Words>& coeffs,
             int degree) {
  const RingParams& ring = s.ring();
  Require(degree >= 1, ErrorKind::kConfig, "polynomial degree must be >= 1");
  const std::size_t n = x.size();
  if (s.is_server()) {
    Require(coeffs.size() == static_cast<std::size_t>(degree) + 1, ErrorKind::kShape,
            "need d + 1 coefficient vectors");
    for (const Words& c : coeffs) CheckCoeffs(s, c, n, "polynomial coefficient");
  }
  // binom[i][k] mod 2^64.
  std::vector<Words> binom(degree + 1, Words(degree + 1, 0));
  for (int i = 0; i <= degree; ++i) {
    binom[i][0] = 1;
    for (int k = 1; k <= i; ++k) binom[i][k] = binom[i - 1][k - 1] + (k < i ? binom[i - 1][k] : 0);
  }
  std::vector<std::pair<int, int>> pairs;  // (i, k), 1 <= k <= i <= d
  for (int i = 1; i <= degree; ++i) {
    for (int k = 1; k <= i; ++k) pairs.emplace_back(i, k);
  }
  const std::size_t np = pairs.size();

  PowerMaskShare pm = s.TakePowerMask(n, degree);
  AsymTripleShare t = s.TakeAsym(TripleShape::Elementwise(n * np));

  // q[(pair, j)] = share of binom(i,k) p_i a^k.
  Words q(n * np);
  {
    SessionPhase offline(s, Phase::kOffline);
    Words mine(n * np);
    Words v;  // server: binom(i,k) p_i
    if (s.is_server()) v.resize(n * np);
    for (std::size_t p = 0; p < np; ++p) {
      const auto [i, k] = pairs[p];
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t idx = p * n + j;
        if (s.is_server()) {
          v[idx] = ring.Reduce(binom[i][k] * At(coeffs[i], j));
          mine[idx] = ring.Reduce(v[idx] - t.factor[idx]);
        } else {
          mine[idx] = ring.Reduce(pm.powers[k - 1][j] - t.factor[idx]);
        }
      }
    }
    const Words peer =
        Unpack(ring, s.Exchange(Tag::kSpolyOffline, Pack(ring, mine), n * np), n * np);
    for (std::size_t p = 0; p < np; ++p) {
      const int k = pairs[p].second;
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t idx = p * n + j;
        if (s.is_server()) {
          // peer = <a^k>_0 - A
          q[idx] = ring.Reduce(peer[idx] * v[idx] + t.c[idx] + v[idx] * pm.powers[k - 1][j]);
        } else {
          // peer = v - B
          q[idx] = ring.Reduce(t.factor[idx] * peer[idx] + t.c[idx]);
        }
      }
    }
  }

  const Words open_mine = Sub(x, pm.powers[0], ring);
  const Words f = Add(open_mine,
                      Unpack(ring, s.Exchange(Tag::kSpolyOpen, Pack(ring, open_mine), n), n),
                      ring);
  Words z(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Word> fpow(degree + 1, 1);
    for (int e = 1; e <= degree; ++e) fpow[e] = fpow[e - 1] * f[j];
    Word acc = 0;
    for (std::size_t p = 0; p < np; ++p) {
      const auto [i, k] = pairs[p];
      acc += q[p * n + j] * fpow[i - k];
    }
    if (s.is_server()) {
      for (int i = 0; i <= degree; ++i) acc += At(coeffs[i], j) * fpow[i];
    }
    z[j] = ring.Reduce(acc);
  }
  return z;
}

// --- SDReLU -------------------------------------------------------------------------

DreluState SDReluSend(Session& s, std::span<const Word> x) {
  const RingParams& ring = s.ring();
  DreluState st;
  st.key = s.TakeDrelu(x.size());
  st.f = Add(x, st.key.a, ring);
  s.Send(Tag::kDreluF, Pack(ring, st.f));
  return st;
}

Bits SDReluFinish(Session& s, DreluState& st) {
  const RingParams& ring = s.ring();
  const std::size_t n = st.key.n;
  const Words peer = Unpack(ring, s.Recv(Tag::kDreluF, n), n);
  const Word half = ring.half();
  Bits z(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Word xhat = ring.Reduce(st.f[j] + peer[j]);
    const Word y = xhat & (half - 1);
    const std::uint8_t zt =
        s.planning() ? 0
                     : static_cast<std::uint8_t>(EvalDcf(st.key.keys[j], half - y - 1, s.prg()));
    const std::uint8_t msb = s.is_server() ? Msb(xhat, ring) : 0;
    z[j] = static_cast<std::uint8_t>(msb ^ st.key.r[j] ^ zt);
  }
  return z;
}

Bits SDRelu(Session& s, std::span<const Word> x) {
  DreluState st = SDReluSend(s, x);
  return SDReluFinish(s, st);
}

// --- SBitXA -----------------------------------------------------------------------

Words SBitXa(Session& s, const Bits& b, std::span<const Word> x) {
  const RingParams& ring = s.ring();
  const std::size_t n = x.size();
  Require(b.size() == n, ErrorKind::kShape, "BitXA bit and value counts differ");
  BitXaShare c = s.TakeBitXa(n);
  Bits delta(n);
  for (std::size_t j = 0; j < n; ++j) delta[j] = (b[j] ^ c.beta_bool[j]) & 1;
  const Words eps = Sub(x, c.m, ring);
  const Payload peer = s.Exchange(
      Tag::kBitxaDE, PayloadWriter(ring).Words(eps).Bits(delta).Finish(), n, n);
  PayloadReader reader(peer, ring);
  const Words peer_eps = reader.Words(n);
  const Bits peer_delta = reader.Bits(n);
  Words z(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Word d = delta[j] ^ peer_delta[j];
    const Word e = eps[j] + peer_eps[j];
    Word v = d * c.m[j] + (1 - 2 * d) * (e * c.beta[j] + c.beta_m[j]);
    if (s.is_server()) v += d * e;
    z[j] = ring.Reduce(v);
  }
  return z;
}

Bits BoolNot(const Session& s, const Bits& b) {
  Bits out = b;
  if (s.is_server()) {
    for (auto& v : out) v ^= 1;
  }
  return out;
}

// --- truncation -----------------------------------------------------------------------

Words TruncateExact(Session& s, std::span<const Word> x, int shift) {
  const RingParams& ring = s.ring();
  const std::size_t n = x.size();
  TruncKeyShare tk = s.TakeTrunc(n, shift);
  const Word offset = Word{1} << (ring.bits - 2);
  Words masked = Add(x, tk.r, ring);
  if (s.is_server()) {
    for (Word& v : masked) v = ring.Reduce(v + offset);
  }
  const Words peer =
      Unpack(ring, s.Exchange(Tag::kTruncMasked, Pack(ring, masked), n), n);
  const Word low_mask = (Word{1} << shift) - 1;
  const Word wrap_scale = Word{1} << (ring.bits - shift);
  Words z(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Word xhat = ring.Reduce(masked[j] + peer[j]);
    Word v = Word{0} - tk.r_hi[j];
    if (!s.planning()) {
      v += wrap_scale * EvalDcf(tk.wrap[j], xhat, s.prg());
      v -= EvalDcf(tk.low[j], xhat & low_mask, s.prg());
    }
    if (s.is_server()) v += (xhat >> shift) - (offset >> shift);
    z[j] = ring.Reduce(v);
  }
  return z;
}

Words Truncate(Session& s, std::span<const Word> x, int shift) {
  if (s.trunc_mode() == TruncMode::kExact) return TruncateExact(s, x, shift);
  Words z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    z[j] = TruncateShareValue(s.party(), x[j], shift, s.ring());
  }
  return z;
}

// --- SPiePol --------------------------------------------------------------------------

Words SPiePol(Session& s, std::span<const Word> x, int k, const EncodedPieces& pieces) {
  const RingParams& ring = s.ring();
  Require(k >= 2, ErrorKind::kConfig, "piecewise polynomial needs at least two pieces");
  const std::size_t n = x.size();
  const std::size_t kk = static_cast<std::size_t>(k);
  if (s.is_server()) {
    Require(pieces.knots.size() == kk - 1 && pieces.centers.size() == kk &&
                pieces.q0.size() == kk && pieces.q1.size() == kk && pieces.q2.size() == kk,
            ErrorKind::kShape, "piece table does not match k");
    for (std::size_t i = 1; i + 1 < kk; ++i) {
      Require(ToSigned(pieces.knots[i - 1], ring) < ToSigned(pieces.knots[i], ring),
              ErrorKind::kConfig, "knots must be strictly increasing");
    }
  }

  // Piece-major layouts: u[i*n + j] = x_j - c_i, w[i*n + j] = (e_i - 1) - x_j.
  Words u(kk * n), w((kk - 1) * n);
  QuadCoeffs qc;
  if (s.is_server()) {
    qc.p0.resize(kk * n);
    qc.p1.resize(kk * n);
    qc.p2.resize(kk * n);
  } else {
    qc.p0 = qc.p1 = qc.p2 = {0};
  }
  for (std::size_t i = 0; i < kk; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t idx = i * n + j;
      if (s.is_server()) {
        u[idx] = ring.Reduce(x[j] - pieces.centers[i]);
        qc.p0[idx] = pieces.q0[i];
        qc.p1[idx] = pieces.q1[i];
        qc.p2[idx] = pieces.q2[i];
        if (i + 1 < kk) w[idx] = ring.Reduce(pieces.knots[i] - 1 - x[j]);
      } else {
        u[idx] = x[j];
        if (i + 1 < kk) w[idx] = ring.Reduce(Word{0} - x[j]);
      }
    }
  }

  SquapolState sq = SQuaPolPrepare(s, kk * n, qc);
  // Round 1: comparisons and piece values together.
  DreluState dr = SDReluSend(s, w);
  SQuaPolSend(s, sq, u);
  const Bits c = SDReluFinish(s, dr);
  const Words f = SQuaPolFinish(s, sq, u);

  // Round 2: c_i * f_i for i < k, and (not c_{k-1}) * f_k.
  Bits sel(kk * n);
  std::copy(c.begin(), c.end(), sel.begin());
  const Bits not_last = BoolNot(s, Bits(c.end() - n, c.end()));
  std::copy(not_last.begin(), not_last.end(), sel.begin() + (kk - 1) * n);
  const Words g = SBitXa(s, sel, f);

  // Round 3: middle pieces also need not c_{i-1}.
  Words z(g.begin(), g.begin() + n);
  if (kk > 2) {
    const std::size_t mid = (kk - 2) * n;
    const Bits outer = BoolNot(s, Bits(c.begin(), c.begin() + mid));
    const Words h = SBitXa(s, outer, Slice(g, n, mid));
    for (std::size_t i = 0; i < kk - 2; ++i) {
      for (std::size_t j = 0; j < n; ++j) z[j] += h[i * n + j];
    }
  }
  for (std::size_t j = 0; j < n; ++j) z[j] = ring.Reduce(z[j] + g[(kk - 1) * n + j]);

  // Round 4: scale 3f back to f.
  return Truncate(s, z, 2 * ring.frac);
}

}  // namespace ssinfer
