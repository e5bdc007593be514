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

#include <algorithm>
#include <sstream>
#include <tuple>

#include "ssinfer/bytes.hpp"
#include "ssinfer/error.hpp"
#include "ssinfer/rng.hpp"

namespace ssinfer {

namespace {

constexpr char kMagic[4] = {'P', 'G', 'D', 'B'};
constexpr std::uint8_t kVersion = 1;

Words Zeros(std::size_t n) { return Words(n, 0); }

DcfKey PlaceholderKey(int in_bits, int out_bits, const SecurityParams& sec) {
  DcfKey k;
  k.kappa = sec.kappa;
  k.in_bits = in_bits;
  k.out_bits = out_bits;
  k.correction_words.resize(in_bits);
  return k;
}

void WriteShape(ByteWriter& w, const TripleShape& s) {
  w.U8(static_cast<std::uint8_t>(s.kind));
  w.U32(static_cast<std::uint32_t>(s.m1));
  w.U32(static_cast<std::uint32_t>(s.m2));
  w.U32(static_cast<std::uint32_t>(s.m3));
}

TripleShape ReadShape(ByteReader& r) {
  TripleShape s;
  const std::uint8_t kind = r.U8();
  Require(kind <= 1, ErrorKind::kIntegrity, "bad triple shape kind");
  s.kind = static_cast<TripleShape::Kind>(kind);
  s.m1 = r.U32();
  s.m2 = r.U32();
  s.m3 = r.U32();
  return s;
}

void WriteKeys(ByteWriter& w, const std::vector<DcfKey>& keys) {
  for (const DcfKey& k : keys) w.Raw(k.Serialize());
}

std::vector<DcfKey> ReadKeys(ByteReader& r, std::size_t n) {
  std::vector<DcfKey> keys;
  keys.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto header = r.Peek(5);
    DcfKey probe;
    probe.kappa = header[1] | (header[2] << 8);
    probe.in_bits = header[3];
    probe.out_bits = header[4];
    keys.push_back(DcfKey::Deserialize(r.Raw(probe.SerializedBytes())));
  }
  return keys;
}

void CheckParty(const DcfKey& k, Party p) {
  Require(k.party == p, ErrorKind::kIntegrity, "DCF key belongs to the other party");
}

}  // namespace

const char* CorrelationName(CorrelationKind kind) {
  switch (kind) {
    case CorrelationKind::kAsymTriple: return "asym_triple";
    case CorrelationKind::kSharedTriple: return "shared_triple";
    case CorrelationKind::kDrelu: return "drelu";
    case CorrelationKind::kBitXa: return "bitxa";
    case CorrelationKind::kTrunc: return "trunc";
    case CorrelationKind::kPowerMask: return "power_mask";
  }
  return "unknown";
}

std::string TripleShape::ToString() const {
  std::ostringstream os;
  if (kind == Kind::kMatrix) {
    os << m1 << "x" << m2 << "x" << m3;
  } else {
    os << "[" << m1 << "]";
  }
  return os.str();
}

void CorrelationCounts::Add(const Request& r) {
  switch (r.kind) {
    case CorrelationKind::kAsymTriple:
      if (r.shape.kind == TripleShape::Kind::kMatrix) {
        ++asym_matrix;
      } else {
        asym_scalar += r.shape.m1;
      }
      break;
    case CorrelationKind::kSharedTriple:
      if (r.shape.kind == TripleShape::Kind::kMatrix) {
        ++shared_matrix;
      } else {
        shared_scalar += r.shape.m1;
      }
      break;
    case CorrelationKind::kDrelu: drelu += r.n; break;
    case CorrelationKind::kBitXa: bitxa += r.n; break;
    case CorrelationKind::kTrunc: trunc += r.n; break;
    case CorrelationKind::kPowerMask: power_mask += r.n; break;
  }
}

std::string CorrelationCounts::ToString() const {
  std::ostringstream os;
  os << "asym_scalar_triples=" << asym_scalar << " asym_matrix_triples=" << asym_matrix
     << " shared_scalar_triples=" << shared_scalar
     << " shared_matrix_triples=" << shared_matrix << " drelu=" << drelu
     << " bitxa=" << bitxa << " trunc=" << trunc << " power_masks=" << power_mask;
  return os.str();
}

CorrelationCounts Requirements::Counts() const {
  CorrelationCounts c;
  for (const Request& r : requests) c.Add(r);
  return c;
}

// --- consumption --------------------------------------------------------------

namespace {

template <typename T>
T& Peek(std::vector<T>& list, std::size_t cursor, CorrelationKind kind) {
  Require(cursor < list.size(), ErrorKind::kExhaustion,
          std::string("no ") + CorrelationName(kind) + " material left (" +
              std::to_string(list.size()) + " dealt)");
  return list[cursor];
}

}  // namespace

AsymTripleShare DealerBundle::TakeAsym(const TripleShape& shape) {
  auto& rec = Peek(asym, cursor_[0], CorrelationKind::kAsymTriple);
  Require(rec.shape == shape, ErrorKind::kShape,
          "next triple has shape " + rec.shape.ToString() + ", requested " +
              shape.ToString());
  ++cursor_[0];
  consumed_.Add({CorrelationKind::kAsymTriple, shape, 0, 0});
  return std::move(rec);
}

SharedTripleShare DealerBundle::TakeShared(const TripleShape& shape) {
  auto& rec = Peek(shared, cursor_[1], CorrelationKind::kSharedTriple);
  Require(rec.shape == shape, ErrorKind::kShape,
          "next shared triple has shape " + rec.shape.ToString() + ", requested " +
              shape.ToString());
  ++cursor_[1];
  consumed_.Add({CorrelationKind::kSharedTriple, shape, 0, 0});
  return std::move(rec);
}

DreluKeyShare DealerBundle::TakeDrelu(std::size_t n) {
  auto& rec = Peek(drelu, cursor_[2], CorrelationKind::kDrelu);
  Require(rec.n == n, ErrorKind::kShape, "DReLU batch size mismatch");
  ++cursor_[2];
  consumed_.Add({CorrelationKind::kDrelu, {}, n, 0});
  return std::move(rec);
}

BitXaShare DealerBundle::TakeBitXa(std::size_t n) {
  auto& rec = Peek(bitxa, cursor_[3], CorrelationKind::kBitXa);
  Require(rec.n == n, ErrorKind::kShape, "BitXA batch size mismatch");
  ++cursor_[3];
  consumed_.Add({CorrelationKind::kBitXa, {}, n, 0});
  return std::move(rec);
}

TruncKeyShare DealerBundle::TakeTrunc(std::size_t n, int shift) {
  auto& rec = Peek(trunc, cursor_[4], CorrelationKind::kTrunc);
  Require(rec.n == n && rec.shift == shift, ErrorKind::kShape,
          "truncation batch size or shift mismatch");
  ++cursor_[4];
  consumed_.Add({CorrelationKind::kTrunc, {}, n, shift});
  return std::move(rec);
}

PowerMaskShare DealerBundle::TakePowerMask(std::size_t n, int degree) {
  auto& rec = Peek(power, cursor_[5], CorrelationKind::kPowerMask);
  Require(rec.n == n && rec.degree == degree, ErrorKind::kShape,
          "power mask batch size or degree mismatch");
  ++cursor_[5];
  consumed_.Add({CorrelationKind::kPowerMask, {}, n, degree});
  return std::move(rec);
}

CorrelationCounts DealerBundle::Available() const {
  CorrelationCounts c;
  for (std::size_t i = cursor_[0]; i < asym.size(); ++i) {
    c.Add({CorrelationKind::kAsymTriple, asym[i].shape, 0, 0});
  }
  for (std::size_t i = cursor_[1]; i < shared.size(); ++i) {
    c.Add({CorrelationKind::kSharedTriple, shared[i].shape, 0, 0});
  }
  for (std::size_t i = cursor_[2]; i < drelu.size(); ++i) c.drelu += drelu[i].n;
  for (std::size_t i = cursor_[3]; i < bitxa.size(); ++i) c.bitxa += bitxa[i].n;
  for (std::size_t i = cursor_[4]; i < trunc.size(); ++i) c.trunc += trunc[i].n;
  for (std::size_t i = cursor_[5]; i < power.size(); ++i) c.power_mask += power[i].n;
  return c;
}

// --- serialization ------------------------------------------------------------

std::vector<std::uint8_t> DealerBundle::Serialize() const {
  ByteWriter w;
  w.Raw(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(kMagic), 4));
  w.U8(kVersion);
  w.U8(static_cast<std::uint8_t>(Index(party_)));
  w.U8(static_cast<std::uint8_t>(ring_.bits));
  w.U8(static_cast<std::uint8_t>(ring_.frac));
  w.U16(static_cast<std::uint16_t>(sec_.kappa));
  w.U8(sec_.prg_id);
  w.U32(session_);
  for (std::size_t count : {asym.size(), shared.size(), drelu.size(), bitxa.size(),
                            trunc.size(), power.size()}) {
    w.U32(static_cast<std::uint32_t>(count));
  }
  for (const auto& t : asym) {
    WriteShape(w, t.shape);
    w.RingWords(t.factor, ring_);
    w.RingWords(t.c, ring_);
  }
  for (const auto& t : shared) {
    WriteShape(w, t.shape);
    w.RingWords(t.a, ring_);
    w.RingWords(t.b, ring_);
    w.RingWords(t.c, ring_);
  }
  for (const auto& d : drelu) {
    w.U32(static_cast<std::uint32_t>(d.n));
    w.RingWords(d.a, ring_);
    WriteKeys(w, d.keys);
    w.BitVector(d.r);
  }
  for (const auto& b : bitxa) {
    w.U32(static_cast<std::uint32_t>(b.n));
    w.BitVector(b.beta_bool);
    w.RingWords(b.beta, ring_);
    w.RingWords(b.m, ring_);
    w.RingWords(b.beta_m, ring_);
  }
  for (const auto& t : trunc) {
    w.U32(static_cast<std::uint32_t>(t.n));
    w.U8(static_cast<std::uint8_t>(t.shift));
    w.RingWords(t.r, ring_);
    w.RingWords(t.r_hi, ring_);
    WriteKeys(w, t.wrap);
    WriteKeys(w, t.low);
  }
  for (const auto& p : power) {
    w.U32(static_cast<std::uint32_t>(p.n));
    w.U8(static_cast<std::uint8_t>(p.degree));
    for (const Words& pw : p.powers) w.RingWords(pw, ring_);
  }
  w.U32(Crc32(w.bytes()));
  return std::move(w.bytes());
}

DealerBundle DealerBundle::Deserialize(std::span<const std::uint8_t> bytes) {
  Require(bytes.size() >= 4 + 4 + 1, ErrorKind::kIntegrity, "bundle too short");
  const std::size_t body = bytes.size() - 4;
  ByteReader trailer(bytes.subspan(body));
  Require(trailer.U32() == Crc32(bytes.first(body)), ErrorKind::kIntegrity,
          "bundle checksum mismatch");
  ByteReader r(bytes.first(body));
  const auto magic = r.Raw(4);
  Require(std::equal(magic.begin(), magic.end(), kMagic), ErrorKind::kIntegrity,
          "not a dealer bundle (bad magic)");
  Require(r.U8() == kVersion, ErrorKind::kIntegrity, "unsupported bundle version");
  const std::uint8_t party = r.U8();
  Require(party <= 1, ErrorKind::kIntegrity, "bad party byte");
  RingParams ring;
  ring.bits = r.U8();
  ring.frac = r.U8();
  SecurityParams sec;
  sec.kappa = r.U16();
  sec.prg_id = r.U8();
  const std::uint32_t session = r.U32();
  DealerBundle b(static_cast<Party>(party), session, ring, sec);
  std::uint32_t counts[kNumCorrelationKinds];
  for (auto& c : counts) c = r.U32();
  const Party p = b.party_;

  for (std::uint32_t i = 0; i < counts[0]; ++i) {
    AsymTripleShare t;
    t.shape = ReadShape(r);
    t.factor = r.RingWords(p == Party::kClient ? t.shape.a_size() : t.shape.b_size(), ring);
    t.c = r.RingWords(t.shape.c_size(), ring);
    b.asym.push_back(std::move(t));
  }
  for (std::uint32_t i = 0; i < counts[1]; ++i) {
    SharedTripleShare t;
    t.shape = ReadShape(r);
    t.a = r.RingWords(t.shape.a_size(), ring);
    t.b = r.RingWords(t.shape.b_size(), ring);
    t.c = r.RingWords(t.shape.c_size(), ring);
    b.shared.push_back(std::move(t));
  }
  for (std::uint32_t i = 0; i < counts[2]; ++i) {
    DreluKeyShare d;
    d.n = r.U32();
    d.a = r.RingWords(d.n, ring);
    d.keys = ReadKeys(r, d.n);
    for (const DcfKey& k : d.keys) CheckParty(k, p);
    d.r = r.BitVector(d.n);
    b.drelu.push_back(std::move(d));
  }
  for (std::uint32_t i = 0; i < counts[3]; ++i) {
    BitXaShare x;
    x.n = r.U32();
    x.beta_bool = r.BitVector(x.n);
    x.beta = r.RingWords(x.n, ring);
    x.m = r.RingWords(x.n, ring);
    x.beta_m = r.RingWords(x.n, ring);
    b.bitxa.push_back(std::move(x));
  }
  for (std::uint32_t i = 0; i < counts[4]; ++i) {
    TruncKeyShare t;
    t.n = r.U32();
    t.shift = r.U8();
    t.r = r.RingWords(t.n, ring);
    t.r_hi = r.RingWords(t.n, ring);
    t.wrap = ReadKeys(r, t.n);
    t.low = ReadKeys(r, t.n);
    b.trunc.push_back(std::move(t));
  }
  for (std::uint32_t i = 0; i < counts[5]; ++i) {
    PowerMaskShare m;
    m.n = r.U32();
    m.degree = r.U8();
    for (int k = 0; k < m.degree; ++k) m.powers.push_back(r.RingWords(m.n, ring));
    b.power.push_back(std::move(m));
  }
  Require(r.remaining() == 0, ErrorKind::kIntegrity, "trailing bytes in bundle");
  return b;
}

std::size_t DealerBundle::MaterialBytes() const { return Serialize().size(); }

void DealerBundle::Save(const std::string& path) const {
  WriteFileBytes(path, Serialize());
}

DealerBundle DealerBundle::Load(const std::string& path) {
  return Deserialize(ReadFileBytes(path));
}

// --- dealing --------------------------------------------------------------------

namespace {

Words Product(const TripleShape& s, const Words& a, const Words& b,
              const RingParams& ring) {
  if (s.kind == TripleShape::Kind::kMatrix) return MatMul(a, b, s.m1, s.m2, s.m3, ring);
  return Hadamard(a, b, ring);
}

}  // namespace

std::pair<DealerBundle, DealerBundle> Deal(const Requirements& plan,
                                           const RingParams& ring,
                                           const SecurityParams& sec,
                                           std::uint32_t session, std::uint64_t seed) {
  ring.Validate();
  sec.Validate();
  DealerBundle client(Party::kClient, session, ring, sec);
  DealerBundle server(Party::kServer, session, ring, sec);
  Rng rng(seed, "dealer");
  Prg prg(sec);

  for (const Request& req : plan.requests) {
    switch (req.kind) {
      case CorrelationKind::kAsymTriple: {
        const TripleShape& s = req.shape;
        Words a = UniformVector(s.a_size(), rng, ring);
        Words b = UniformVector(s.b_size(), rng, ring);
        auto [c0, c1] = ShareVector(Product(s, a, b, ring), rng, ring);
        client.asym.push_back({s, std::move(a), std::move(c0)});
        server.asym.push_back({s, std::move(b), std::move(c1)});
        break;
      }
      case CorrelationKind::kSharedTriple: {
        const TripleShape& s = req.shape;
        const Words a = UniformVector(s.a_size(), rng, ring);
        const Words b = UniformVector(s.b_size(), rng, ring);
        auto [a0, a1] = ShareVector(a, rng, ring);
        auto [b0, b1] = ShareVector(b, rng, ring);
        auto [c0, c1] = ShareVector(Product(s, a, b, ring), rng, ring);
        client.shared.push_back({s, std::move(a0), std::move(b0), std::move(c0)});
        server.shared.push_back({s, std::move(a1), std::move(b1), std::move(c1)});
        break;
      }
      case CorrelationKind::kDrelu: {
        DreluKeyShare d0, d1;
        d0.n = d1.n = req.n;
        const Word half = ring.half();
        for (std::size_t i = 0; i < req.n; ++i) {
          const Word a = rng.Bits(ring.bits);
          const Word neg_a = ring.Reduce(Word{0} - a);
          const Word y1 = neg_a & (half - 1);
          auto [k0, k1] = GenDcf(sec, y1, 1, ring.bits - 1, 1, rng, prg);
          const std::uint8_t c = 0;
          const std::uint8_t r = static_cast<std::uint8_t>(c ^ Msb(neg_a, ring) ^ 1);
          const std::uint8_t r0 = rng.NextBit();
          const Word a0 = rng.Bits(ring.bits);
          d0.a.push_back(a0);
          d1.a.push_back(ring.Reduce(a - a0));
          d0.keys.push_back(std::move(k0));
          d1.keys.push_back(std::move(k1));
          d0.r.push_back(r0);
          d1.r.push_back(static_cast<std::uint8_t>(r ^ r0));
        }
        client.drelu.push_back(std::move(d0));
        server.drelu.push_back(std::move(d1));
        break;
      }
      case CorrelationKind::kBitXa: {
        BitXaShare x0, x1;
        x0.n = x1.n = req.n;
        for (std::size_t i = 0; i < req.n; ++i) {
          const std::uint8_t beta = rng.NextBit();
          const Word m = rng.Bits(ring.bits);
          const std::uint8_t beta0 = rng.NextBit();
          x0.beta_bool.push_back(beta0);
          x1.beta_bool.push_back(static_cast<std::uint8_t>(beta ^ beta0));
          for (auto [v, s0, s1] : {std::tuple{Word{beta}, &x0.beta, &x1.beta},
                                   std::tuple{m, &x0.m, &x1.m},
                                   std::tuple{ring.Reduce(Word{beta} * m), &x0.beta_m,
                                              &x1.beta_m}}) {
            const Word share = rng.Bits(ring.bits);
            s0->push_back(share);
            s1->push_back(ring.Reduce(v - share));
          }
        }
        client.bitxa.push_back(std::move(x0));
        server.bitxa.push_back(std::move(x1));
        break;
      }
      case CorrelationKind::kTrunc: {
        const int s = req.param;
        Require(s >= 1 && s <= ring.bits - 2, ErrorKind::kConfig,
                "truncation shift must be in [1, l-2]");
        TruncKeyShare t0, t1;
        t0.n = t1.n = req.n;
        t0.shift = t1.shift = s;
        const Word low_mask = (Word{1} << s) - 1;
        for (std::size_t i = 0; i < req.n; ++i) {
          const Word r = rng.Bits(ring.bits);
          auto [w0, w1] = GenDcf(sec, r, 1, ring.bits, ring.bits, rng, prg);
          auto [l0, l1] = GenDcf(sec, r & low_mask, 1, s, ring.bits, rng, prg);
          for (auto [v, s0, s1] : {std::tuple{r, &t0.r, &t1.r},
                                   std::tuple{r >> s, &t0.r_hi, &t1.r_hi}}) {
            const Word share = rng.Bits(ring.bits);
            s0->push_back(share);
            s1->push_back(ring.Reduce(v - share));
          }
          t0.wrap.push_back(std::move(w0));
          t1.wrap.push_back(std::move(w1));
          t0.low.push_back(std::move(l0));
          t1.low.push_back(std::move(l1));
        }
        client.trunc.push_back(std::move(t0));
        server.trunc.push_back(std::move(t1));
        break;
      }
      case CorrelationKind::kPowerMask: {
        const int d = req.param;
        Require(d >= 1, ErrorKind::kConfig, "power mask degree must be >= 1");
        PowerMaskShare p0, p1;
        p0.n = p1.n = req.n;
        p0.degree = p1.degree = d;
        p0.powers.assign(d, Words(req.n));
        p1.powers.assign(d, Words(req.n));
        for (std::size_t i = 0; i < req.n; ++i) {
          const Word a = rng.Bits(ring.bits);
          Word pw = 1;
          for (int k = 0; k < d; ++k) {
            pw = ring.Reduce(pw * a);
            const Word share = rng.Bits(ring.bits);
            p0.powers[k][i] = share;
            p1.powers[k][i] = ring.Reduce(pw - share);
          }
        }
        client.power.push_back(std::move(p0));
        server.power.push_back(std::move(p1));
        break;
      }
    }
  }
  return {std::move(client), std::move(server)};
}

// --- placeholders ---------------------------------------------------------------

AsymTripleShare PlaceholderAsym(const TripleShape& shape) {
  return {shape, Zeros(std::max(shape.a_size(), shape.b_size())), Zeros(shape.c_size())};
}

SharedTripleShare PlaceholderShared(const TripleShape& shape) {
  return {shape, Zeros(shape.a_size()), Zeros(shape.b_size()), Zeros(shape.c_size())};
}

DreluKeyShare PlaceholderDrelu(std::size_t n, const RingParams& ring,
                               const SecurityParams& sec) {
  DreluKeyShare d;
  d.n = n;
  d.a = Zeros(n);
  d.keys.assign(n, PlaceholderKey(ring.bits - 1, 1, sec));
  d.r.assign(n, 0);
  return d;
}

BitXaShare PlaceholderBitXa(std::size_t n) {
  return {n, std::vector<std::uint8_t>(n, 0), Zeros(n), Zeros(n), Zeros(n)};
}

TruncKeyShare PlaceholderTrunc(std::size_t n, int shift, const RingParams& ring,
                               const SecurityParams& sec) {
  TruncKeyShare t;
  t.n = n;
  t.shift = shift;
  t.r = Zeros(n);
  t.r_hi = Zeros(n);
  t.wrap.assign(n, PlaceholderKey(ring.bits, ring.bits, sec));
  t.low.assign(n, PlaceholderKey(shift, ring.bits, sec));
  return t;
}

PowerMaskShare PlaceholderPowerMask(std::size_t n, int degree) {
  return {n, degree, std::vector<Words>(degree, Zeros(n))};
}

}  // namespace ssinfer
