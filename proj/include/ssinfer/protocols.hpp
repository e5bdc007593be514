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

// Two-party protocols over additive shares. Every function is called by both
// parties with their own share; plaintext operands owned by the server are
// ignored at the client. All protocols are batched: one call on n elements
// costs the same number of rounds as one call on a single element.

#ifndef SSINFER_PROTOCOLS_HPP_
#define SSINFER_PROTOCOLS_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ssinfer/dealer.hpp"
#include "ssinfer/fss.hpp"
#include "ssinfer/rng.hpp"
#include "ssinfer/transport.hpp"

namespace ssinfer {

using Bits = std::vector<std::uint8_t>;

enum class TruncMode : std::uint8_t {
  kLocal = 0,  // non-interactive share shift; one-ulp error, rare wrap failure
  kExact = 1,  // one exchange plus two DCF evaluations; exact for |x| < 2^(l-2)
};

struct LayerStat {
  std::string name;
  MeterReading cost;
};

// Per-party protocol context: channel, dealer bundle cursor and local
// randomness. A planning session has neither channel nor bundle; it records
// every material request and answers receives with zeros, so running a
// computation on it yields the exact dealer plan.
class Session {
 public:
  Session(Party party, Endpoint& endpoint, DealerBundle& bundle,
          std::uint64_t local_seed, TruncMode mode = TruncMode::kExact);
  static Session Planner(Party party, const RingParams& ring,
                         const SecurityParams& sec, TruncMode mode = TruncMode::kExact);

  Session(Session&&) noexcept;
  ~Session();

  Party party() const { return party_; }
  bool is_client() const { return party_ == Party::kClient; }
  bool is_server() const { return party_ == Party::kServer; }
  int gamma() const { return Index(party_); }
  const RingParams& ring() const { return ring_; }
  const SecurityParams& security() const { return sec_; }
  bool planning() const { return endpoint_ == nullptr; }
  TruncMode trunc_mode() const { return trunc_mode_; }
  void set_trunc_mode(TruncMode mode) { trunc_mode_ = mode; }

  void Send(Tag tag, const Payload& payload);
  Payload Recv(Tag tag, std::size_t words, std::size_t bits = 0);
  Payload Exchange(Tag tag, const Payload& payload, std::size_t words,
                   std::size_t bits = 0);
  Phase phase() const { return phase_; }
  void set_phase(Phase phase) { phase_ = phase; }

  AsymTripleShare TakeAsym(const TripleShape& shape);
  SharedTripleShare TakeShared(const TripleShape& shape);
  DreluKeyShare TakeDrelu(std::size_t n);
  BitXaShare TakeBitXa(std::size_t n);
  TruncKeyShare TakeTrunc(std::size_t n, int shift);
  PowerMaskShare TakePowerMask(std::size_t n, int degree);

  Rng& local_rng() { return rng_; }
  Prg& prg() { return *prg_; }

  const Requirements& requirements() const { return requirements_; }
  MeterReading meter() const;
  void BeginSegment();

  void BeginLayer(const std::string& name);
  void EndLayer();
  const std::vector<LayerStat>& layer_log() const { return layer_log_; }

 private:
  Session(Party party, const RingParams& ring, const SecurityParams& sec,
          std::uint64_t local_seed, TruncMode mode);

  Party party_;
  Endpoint* endpoint_ = nullptr;
  DealerBundle* bundle_ = nullptr;
  RingParams ring_;
  SecurityParams sec_;
  Rng rng_;
  std::unique_ptr<Prg> prg_;
  TruncMode trunc_mode_;
  Phase phase_ = Phase::kOnline;
  Requirements requirements_;
  int layer_depth_ = 0;
  std::string layer_name_;
  MeterReading layer_start_;
  std::vector<LayerStat> layer_log_;
};

class SessionPhase {
 public:
  SessionPhase(Session& s, Phase phase) : s_(s), saved_(s.phase()) { s_.set_phase(phase); }
  ~SessionPhase() { s_.set_phase(saved_); }
  SessionPhase(const SessionPhase&) = delete;
  SessionPhase& operator=(const SessionPhase&) = delete;

 private:
  Session& s_;
  Phase saved_;
};

// Records the metered cost of the outermost enclosed layer.
class LayerScope {
 public:
  LayerScope(Session& s, const std::string& name) : s_(s) { s_.BeginLayer(name); }
  ~LayerScope() { s_.EndLayer(); }
  LayerScope(const LayerScope&) = delete;
  LayerScope& operator=(const LayerScope&) = delete;

 private:
  Session& s_;
};

struct MatShape {
  std::size_t m1 = 0, m2 = 0, m3 = 0;
};

// Z = X x Y with X shared (m1 x m2) and Y the server's plaintext (m2 x m3).
// Offline: server sends Y - B. Online: client sends <X>_0 - A.
Words SMatMul(Session& s, std::span<const Word> x, std::span<const Word> y,
              MatShape shape);
// Z = X o Y, elementwise, Y the server's plaintext.
Words SEleMul(Session& s, std::span<const Word> x, std::span<const Word> y);

// Beaver multiplication of two shared operands; one exchange.
Words SSharedMul(Session& s, std::span<const Word> x, std::span<const Word> y);
Words SSharedMatMul(Session& s, std::span<const Word> x, std::span<const Word> y,
                    MatShape shape);

// Server-held coefficients for z = p2 x^2 + p1 x + p0, one entry per element
// or a single broadcast entry.
struct QuadCoeffs {
  Words p0, p1, p2;
};

struct SquapolState {
  std::size_t n = 0;
  AsymTripleShare t[4];
  Words mask;   // client: its mask a
  Words f4;     // server: <p2 a>_0 - a4 from the client
  Words p1a, p2a, p2a2;  // this party's shares of p1 a, p2 a, p2 a^2
  Words online_out;      // this party's online message
  QuadCoeffs coeffs;
};

// Offline phase: four asymmetric triples, server sends e1..e3, client
// answers with f1..f4.
SquapolState SQuaPolPrepare(Session& s, std::size_t n, const QuadCoeffs& coeffs);
// Online send: server e4 = <x>_1 - b4, client f5 = <x>_0 - a.
void SQuaPolSend(Session& s, SquapolState& st, std::span<const Word> x);
Words SQuaPolFinish(Session& s, SquapolState& st, std::span<const Word> x);
Words SQuaPol(Session& s, std::span<const Word> x, const QuadCoeffs& coeffs);

// sum_i p_i x^i with server-held coeffs[i] (per element or broadcast),
// i = 0..d. One online round.
Words SPolyD(Session& s, std::span<const Word> x, const std::vector<Words>& coeffs,
             int degree);

struct DreluState {
  DreluKeyShare key;
  Words f;  // this party's <x> + <a>
};
DreluState SDReluSend(Session& s, std::span<const Word> x);
Bits SDReluFinish(Session& s, DreluState& st);
// Boolean shares of 1{x < 2^(l-1)}.
Bits SDRelu(Session& s, std::span<const Word> x);

// Arithmetic shares of b * x.
Words SBitXa(Session& s, const Bits& b, std::span<const Word> x);
// NOT on Boolean shares: the server flips its share.
Bits BoolNot(const Session& s, const Bits& b);

// Arithmetic shift right by `shift` in the session's truncation mode.
Words Truncate(Session& s, std::span<const Word> x, int shift);
Words TruncateExact(Session& s, std::span<const Word> x, int shift);

// Ring-encoded piecewise quadratic, server side. Piece i evaluates
// q2 (x - c)^2 + q1 (x - c) + q0 with c = centers[i]; q2 at scale f, q1 at
// 2f, q0 at 3f. Piece i covers [knots[i-1], knots[i]).
struct EncodedPieces {
  Words knots;    // k - 1, scale f, strictly increasing (signed)
  Words centers;  // k, scale f
  Words q0, q1, q2;
};

// Shares of P(x) at scale f for x at scale f. The client passes pieces with
// empty vectors and the piece count k.
Words SPiePol(Session& s, std::span<const Word> x, int k, const EncodedPieces& pieces);

// Opens shares to both parties. Used at the interface boundary only.
Words Reveal(Session& s, std::span<const Word> x);
// One-way opening: `to` learns x, the other party gets an empty vector.
Words RevealTo(Session& s, std::span<const Word> x, Party to);

// Local share helpers.
Words AddPublic(const Session& s, std::span<const Word> x, Word c);
Words AddPublicVec(const Session& s, std::span<const Word> x, std::span<const Word> c);

}  // namespace ssinfer

#endif  // SSINFER_PROTOCOLS_HPP_
