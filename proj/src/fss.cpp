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

#include "ssinfer/fss.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <string>

#include "ssinfer/error.hpp"

namespace ssinfer {

namespace {

// Fixed public AES key for the MMO construction.
constexpr std::uint8_t kPrgKey[16] = {0x73, 0x73, 0x69, 0x6e, 0x66, 0x65,
                                      0x72, 0x2d, 0x64, 0x63, 0x66, 0x2d,
                                      0x70, 0x72, 0x67, 0x31};

Word GroupMask(int bits) {
  return bits >= 64 ? ~Word{0} : (Word{1} << bits) - 1;
}

class BitWriter {
 public:
  void Put(uint128 v, int bits) {
    for (int i = 0; i < bits; ++i) {
      if (used_ % 8 == 0) bytes_.push_back(0);
      if ((v >> i) & 1) bytes_.back() |= static_cast<std::uint8_t>(1u << (used_ % 8));
      ++used_;
    }
  }
  Bytes Take() && { return std::move(bytes_); }

 private:
  Bytes bytes_;
  std::size_t used_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  uint128 Get(int bits) {
    Require(pos_ + static_cast<std::size_t>(bits) <= bytes_.size() * 8,
            ErrorKind::kIntegrity, "truncated DCF key");
    uint128 v = 0;
    for (int i = 0; i < bits; ++i, ++pos_) {
      if ((bytes_[pos_ / 8] >> (pos_ % 8)) & 1) v |= uint128{1} << i;
    }
    return v;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void SecurityParams::Validate() const {
  Require(kappa == 64 || kappa == 128, ErrorKind::kConfig,
          "kappa must be 64 or 128, got " + std::to_string(kappa));
  Require(prg_id == 1, ErrorKind::kConfig,
          "unknown PRG id " + std::to_string(prg_id));
}

struct Prg::Impl {
  EVP_CIPHER_CTX* ctx = nullptr;
  ~Impl() { EVP_CIPHER_CTX_free(ctx); }
};

Prg::Prg(const SecurityParams& sec) : impl_(std::make_unique<Impl>()) {
  sec.Validate();
  seed_mask_ = sec.kappa == 128 ? ~uint128{0} : ((uint128{1} << sec.kappa) - 1);
  impl_->ctx = EVP_CIPHER_CTX_new();
  Require(impl_->ctx != nullptr &&
              EVP_EncryptInit_ex(impl_->ctx, EVP_aes_128_ecb(), nullptr, kPrgKey,
                                 nullptr) == 1,
          ErrorKind::kConfig, "AES-ECB init failed");
  EVP_CIPHER_CTX_set_padding(impl_->ctx, 0);
}

Prg::~Prg() = default;

Prg::Children Prg::Expand(uint128 seed) {
  ++expansions_;
  // Block i is AES_k(s ^ i) ^ (s ^ i).
  uint128 in[4];
  for (int i = 0; i < 4; ++i) in[i] = seed ^ static_cast<uint128>(i);
  uint128 out[4];
  int len = 0;
  EVP_EncryptUpdate(impl_->ctx, reinterpret_cast<unsigned char*>(out), &len,
                    reinterpret_cast<const unsigned char*>(in), sizeof(in));
  for (int i = 0; i < 4; ++i) out[i] ^= in[i];
  Children c;
  c.seed[0] = out[0] & seed_mask_;
  c.seed[1] = out[1] & seed_mask_;
  c.t[0] = static_cast<std::uint8_t>(out[2] & 1);
  c.t[1] = static_cast<std::uint8_t>((out[2] >> 1) & 1);
  c.v[0] = static_cast<std::uint64_t>(out[3]);
  c.v[1] = static_cast<std::uint64_t>(out[3] >> 64);
  return c;
}

std::size_t DcfKey::BodyBits() const {
  return static_cast<std::size_t>(kappa) +
         static_cast<std::size_t>(in_bits) * (kappa + 2 + out_bits) + out_bits;
}

Bytes DcfKey::Serialize() const {
  Bytes out = {static_cast<std::uint8_t>(Index(party)),
               static_cast<std::uint8_t>(kappa & 0xff),
               static_cast<std::uint8_t>(kappa >> 8),
               static_cast<std::uint8_t>(in_bits),
               static_cast<std::uint8_t>(out_bits)};
  BitWriter w;
  w.Put(root_seed, kappa);
  for (const DcfCorrection& cw : correction_words) {
    w.Put(cw.seed, kappa);
    w.Put(cw.t_left, 1);
    w.Put(cw.t_right, 1);
    w.Put(cw.value, out_bits);
  }
  w.Put(final_correction, out_bits);
  const Bytes body = std::move(w).Take();
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

DcfKey DcfKey::Deserialize(std::span<const std::uint8_t> bytes) {
  Require(bytes.size() >= 5, ErrorKind::kIntegrity, "DCF key header truncated");
  DcfKey k;
  Require(bytes[0] <= 1, ErrorKind::kIntegrity, "bad DCF key party");
  k.party = static_cast<Party>(bytes[0]);
  k.kappa = bytes[1] | (bytes[2] << 8);
  k.in_bits = bytes[3];
  k.out_bits = bytes[4];
  Require((k.kappa == 64 || k.kappa == 128) && k.in_bits >= 1 && k.in_bits <= 64 &&
              k.out_bits >= 1 && k.out_bits <= 64,
          ErrorKind::kIntegrity, "bad DCF key parameters");
  Require(bytes.size() == k.SerializedBytes(), ErrorKind::kIntegrity,
          "DCF key length mismatch");
  BitReader r(bytes.subspan(5));
  k.root_seed = r.Get(k.kappa);
  k.correction_words.resize(k.in_bits);
  for (DcfCorrection& cw : k.correction_words) {
    cw.seed = r.Get(k.kappa);
    cw.t_left = static_cast<std::uint8_t>(r.Get(1));
    cw.t_right = static_cast<std::uint8_t>(r.Get(1));
    cw.value = static_cast<Word>(r.Get(k.out_bits));
  }
  k.final_correction = static_cast<Word>(r.Get(k.out_bits));
  return k;
}

std::pair<DcfKey, DcfKey> GenDcf(const SecurityParams& sec, Word alpha,
                                 Word beta, int in_bits, int out_bits, Rng& rng,
                                 Prg& prg) {
  sec.Validate();
  Require(in_bits >= 1 && in_bits <= 64, ErrorKind::kConfig, "DCF in_bits out of range");
  Require(out_bits >= 1 && out_bits <= 64, ErrorKind::kConfig,
          "DCF out_bits out of range");
  Require(in_bits == 64 || alpha < (Word{1} << in_bits), ErrorKind::kConfig,
          "DCF threshold does not fit in in_bits");
  const Word gmask = GroupMask(out_bits);
  const uint128 smask = sec.kappa == 128 ? ~uint128{0} : ((uint128{1} << sec.kappa) - 1);
  beta &= gmask;

  DcfKey k0, k1;
  k0.party = Party::kClient;
  k1.party = Party::kServer;
  for (DcfKey* k : {&k0, &k1}) {
    k->kappa = sec.kappa;
    k->in_bits = in_bits;
    k->out_bits = out_bits;
  }
  k0.root_seed = rng.NextU128() & smask;
  k1.root_seed = rng.NextU128() & smask;

  uint128 s[2] = {k0.root_seed, k1.root_seed};
  std::uint8_t t[2] = {0, 1};
  Word v_alpha = 0;
  auto conv = [&](uint128 x) { return static_cast<Word>(x) & gmask; };
  k0.correction_words.reserve(in_bits);

  for (int i = 0; i < in_bits; ++i) {
    const int a = static_cast<int>((alpha >> (in_bits - 1 - i)) & 1);
    const Prg::Children c0 = prg.Expand(s[0]);
    const Prg::Children c1 = prg.Expand(s[1]);
    const int keep = a;  // 0 = left, 1 = right
    const int lose = 1 - a;
    const Word sign = t[1] ? gmask : Word{1};  // (-1)^{t1}

    DcfCorrection cw;
    cw.seed = c0.seed[lose] ^ c1.seed[lose];
    Word v_cw = sign * (conv(c1.v[lose]) - conv(c0.v[lose]) - v_alpha);
    if (lose == 0) v_cw += sign * beta;  // left branch is x < alpha here
    cw.value = v_cw & gmask;
    v_alpha = (v_alpha - conv(c1.v[keep]) + conv(c0.v[keep]) + sign * cw.value) & gmask;
    cw.t_left = static_cast<std::uint8_t>(c0.t[0] ^ c1.t[0] ^ a ^ 1);
    cw.t_right = static_cast<std::uint8_t>(c0.t[1] ^ c1.t[1] ^ a);

    const std::uint8_t t_keep_cw = keep == 0 ? cw.t_left : cw.t_right;
    const Prg::Children* cs[2] = {&c0, &c1};
    for (int b = 0; b < 2; ++b) {
      const uint128 seed = cs[b]->seed[keep] ^ (t[b] ? cw.seed : uint128{0});
      const std::uint8_t tb = static_cast<std::uint8_t>(cs[b]->t[keep] ^ (t[b] & t_keep_cw));
      s[b] = seed;
      t[b] = tb;
    }
    k0.correction_words.push_back(cw);
  }
  const Word sign = t[1] ? gmask : Word{1};
  k0.final_correction = (sign * (conv(s[1]) - conv(s[0]) - v_alpha)) & gmask;
  k1.correction_words = k0.correction_words;
  k1.final_correction = k0.final_correction;
  return {std::move(k0), std::move(k1)};
}

std::pair<DcfKey, DcfKey> GenDcf(const SecurityParams& sec, Word alpha,
                                 Word beta, int in_bits, int out_bits, Rng& rng) {
  Prg prg(sec);
  return GenDcf(sec, alpha, beta, in_bits, out_bits, rng, prg);
}

Word EvalDcf(const DcfKey& key, Word x, Prg& prg) {
  const Word gmask = GroupMask(key.out_bits);
  const bool negate = key.party == Party::kServer;
  uint128 s = key.root_seed;
  std::uint8_t t = static_cast<std::uint8_t>(Index(key.party));
  Word v = 0;
  for (int i = 0; i < key.in_bits; ++i) {
    const DcfCorrection& cw = key.correction_words[i];
    const int xi = static_cast<int>((x >> (key.in_bits - 1 - i)) & 1);
    const Prg::Children c = prg.Expand(s);
    Word contrib = c.v[xi] + (t ? cw.value : 0);
    v += negate ? Word{0} - contrib : contrib;
    s = c.seed[xi] ^ (t ? cw.seed : uint128{0});
    t = static_cast<std::uint8_t>(c.t[xi] ^ (t & (xi == 0 ? cw.t_left : cw.t_right)));
  }
  const Word last = static_cast<Word>(s) + (t ? key.final_correction : 0);
  v += negate ? Word{0} - last : last;
  return v & gmask;
}

}  // namespace ssinfer
