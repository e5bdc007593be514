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

// Trusted dealer: correlated randomness for the offline phase.
//
// A computation is described by Requirements, an ordered list of requests.
// Deal() turns it into one DealerBundle per party; each bundle keeps one list
// per correlation kind, consumed front to back through a cursor.

#ifndef SSINFER_DEALER_HPP_
#define SSINFER_DEALER_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ssinfer/fss.hpp"
#include "ssinfer/ring.hpp"

namespace ssinfer {

enum class CorrelationKind : std::uint8_t {
  kAsymTriple = 0,    // client holds A, server holds B, C = A o B shared
  kSharedTriple = 1,  // A, B, C = A o B all shared
  kDrelu = 2,
  kBitXa = 3,
  kTrunc = 4,
  kPowerMask = 5,
};
inline constexpr int kNumCorrelationKinds = 6;
const char* CorrelationName(CorrelationKind kind);

struct TripleShape {
  enum class Kind : std::uint8_t { kElementwise = 0, kMatrix = 1 };
  Kind kind = Kind::kElementwise;
  std::size_t m1 = 0, m2 = 0, m3 = 0;  // elementwise uses m1 only

  static TripleShape Elementwise(std::size_t n) { return {Kind::kElementwise, n, 0, 0}; }
  static TripleShape Matrix(std::size_t m1, std::size_t m2, std::size_t m3) {
    return {Kind::kMatrix, m1, m2, m3};
  }
  std::size_t a_size() const { return kind == Kind::kMatrix ? m1 * m2 : m1; }
  std::size_t b_size() const { return kind == Kind::kMatrix ? m2 * m3 : m1; }
  std::size_t c_size() const { return kind == Kind::kMatrix ? m1 * m3 : m1; }
  std::string ToString() const;
  friend bool operator==(const TripleShape&, const TripleShape&) = default;
};

struct Request {
  CorrelationKind kind = CorrelationKind::kAsymTriple;
  TripleShape shape;  // triples only
  std::size_t n = 0;  // batch size for the other kinds
  int param = 0;      // truncation shift or mask degree
  friend bool operator==(const Request&, const Request&) = default;
};

// Totals in scalar instances: an elementwise triple of length n counts n;
// matrix triples count one per record.
struct CorrelationCounts {
  std::uint64_t asym_scalar = 0;
  std::uint64_t asym_matrix = 0;
  std::uint64_t shared_scalar = 0;
  std::uint64_t shared_matrix = 0;
  std::uint64_t drelu = 0;
  std::uint64_t bitxa = 0;
  std::uint64_t trunc = 0;
  std::uint64_t power_mask = 0;

  void Add(const Request& r);
  std::string ToString() const;
  friend bool operator==(const CorrelationCounts&, const CorrelationCounts&) = default;
};

struct Requirements {
  std::vector<Request> requests;
  CorrelationCounts Counts() const;
  friend bool operator==(const Requirements&, const Requirements&) = default;
};

// --- per-party material -------------------------------------------------------

struct AsymTripleShare {
  TripleShape shape;
  Words factor;  // A at the client, B at the server
  Words c;
};

struct SharedTripleShare {
  TripleShape shape;
  Words a, b, c;
};

// DReLU material for n instances: mask share, DCF key on the low l-1 bits
// of -a, and the Boolean rerandomizer share [r].
struct DreluKeyShare {
  std::size_t n = 0;
  Words a;
  std::vector<DcfKey> keys;
  std::vector<std::uint8_t> r;
};

struct BitXaShare {
  std::size_t n = 0;
  std::vector<std::uint8_t> beta_bool;
  Words beta, m, beta_m;
};

// Exact truncation by `shift`: mask r, r >> shift, and DCF keys for
// 1{X < r} over l bits and 1{X mod 2^s < r mod 2^s} over s bits.
struct TruncKeyShare {
  std::size_t n = 0;
  int shift = 0;
  Words r, r_hi;
  std::vector<DcfKey> wrap, low;
};

// Shares of a, a^2, ..., a^d for a dealer-chosen mask a.
struct PowerMaskShare {
  std::size_t n = 0;
  int degree = 0;
  std::vector<Words> powers;  // powers[k-1][j] = share of a_j^k
};

class DealerBundle {
 public:
  DealerBundle() = default;
  DealerBundle(Party party, std::uint32_t session, const RingParams& ring,
               const SecurityParams& sec)
      : party_(party), session_(session), ring_(ring), sec_(sec) {}

  Party party() const { return party_; }
  std::uint32_t session() const { return session_; }
  const RingParams& ring() const { return ring_; }
  const SecurityParams& security() const { return sec_; }

  // Consumption. kExhaustion when the list is empty, kShape when the next
  // record does not match the request.
  AsymTripleShare TakeAsym(const TripleShape& shape);
  SharedTripleShare TakeShared(const TripleShape& shape);
  DreluKeyShare TakeDrelu(std::size_t n);
  BitXaShare TakeBitXa(std::size_t n);
  TruncKeyShare TakeTrunc(std::size_t n, int shift);
  PowerMaskShare TakePowerMask(std::size_t n, int degree);

  CorrelationCounts Available() const;
  CorrelationCounts Consumed() const { return consumed_; }
  // Exact serialized size of the stored material, for offline accounting.
  std::size_t MaterialBytes() const;

  std::vector<std::uint8_t> Serialize() const;
  // kIntegrity on bad magic, version, or checksum.
  static DealerBundle Deserialize(std::span<const std::uint8_t> bytes);
  void Save(const std::string& path) const;
  static DealerBundle Load(const std::string& path);

  std::vector<AsymTripleShare> asym;
  std::vector<SharedTripleShare> shared;
  std::vector<DreluKeyShare> drelu;
  std::vector<BitXaShare> bitxa;
  std::vector<TruncKeyShare> trunc;
  std::vector<PowerMaskShare> power;

 private:
  Party party_ = Party::kClient;
  std::uint32_t session_ = 0;
  RingParams ring_;
  SecurityParams sec_;
  std::size_t cursor_[kNumCorrelationKinds] = {};
  CorrelationCounts consumed_;
};

// Generates both parties' bundles. Deterministic in `seed`.
std::pair<DealerBundle, DealerBundle> Deal(const Requirements& plan,
                                           const RingParams& ring,
                                           const SecurityParams& sec,
                                           std::uint32_t session, std::uint64_t seed);

// Zero-valued material of the right shape, used when planning.
AsymTripleShare PlaceholderAsym(const TripleShape& shape);
SharedTripleShare PlaceholderShared(const TripleShape& shape);
DreluKeyShare PlaceholderDrelu(std::size_t n, const RingParams& ring,
                               const SecurityParams& sec);
BitXaShare PlaceholderBitXa(std::size_t n);
TruncKeyShare PlaceholderTrunc(std::size_t n, int shift, const RingParams& ring,
                               const SecurityParams& sec);
PowerMaskShare PlaceholderPowerMask(std::size_t n, int degree);

}  // namespace ssinfer

#endif  // SSINFER_DEALER_HPP_
