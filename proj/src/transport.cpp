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

#include "ssinfer/transport.hpp"

#include <openssl/evp.h>

#include <condition_variable>
#include <cstdio>
#include <deque>
#include <mutex>

#include "ssinfer/error.hpp"

namespace ssinfer {

bool IsRegisteredTag(std::uint8_t tag) {
  return (tag >= 0x01 && tag <= 0x0A) || tag == 0x10 || tag == 0x11;
}

const char* TagName(Tag tag) {
  switch (tag) {
    case Tag::kSmatmulMaskedX: return "SMATMUL_MASKED_X";
    case Tag::kSmatmulYB: return "SMATMUL_YB";
    case Tag::kSquapolE: return "SQUAPOL_E";
    case Tag::kSquapolF: return "SQUAPOL_F";
    case Tag::kDreluF: return "DRELU_F";
    case Tag::kBitxaDE: return "BITXA_DE";
    case Tag::kSharedMulEF: return "SHAREDMUL_EF";
    case Tag::kTruncMasked: return "TRUNC_MASKED";
    case Tag::kSpolyOffline: return "SPOLY_OFFLINE";
    case Tag::kSpolyOpen: return "SPOLY_OPEN";
    case Tag::kInputShares: return "INPUT_SHARES";
    case Tag::kOutputShares: return "OUTPUT_SHARES";
  }
  return "UNKNOWN";
}

const char* PhaseName(Phase phase) {
  return phase == Phase::kOffline ? "offline" : "online";
}

namespace {

void PutU32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t GetU32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

Bytes Frame::Encode() const {
  Bytes out;
  out.reserve(kFrameHeaderBytes + payload.size());
  out.push_back(static_cast<std::uint8_t>(tag));
  PutU32(out, session);
  PutU32(out, static_cast<std::uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Frame Frame::Decode(std::span<const std::uint8_t> wire) {
  Require(wire.size() >= kFrameHeaderBytes, ErrorKind::kDesync, "short frame");
  Require(IsRegisteredTag(wire[0]), ErrorKind::kDesync,
          "unregistered frame tag " + std::to_string(wire[0]));
  Frame frame;
  frame.tag = static_cast<Tag>(wire[0]);
  frame.session = GetU32(wire.data() + 1);
  const std::uint32_t len = GetU32(wire.data() + 5);
  Require(wire.size() == kFrameHeaderBytes + len, ErrorKind::kDesync,
          "frame length field does not match payload");
  frame.payload.assign(wire.begin() + kFrameHeaderBytes, wire.end());
  return frame;
}

std::size_t PayloadBytes(const RingParams& ring, std::size_t words,
                         std::size_t bits) {
  return words * static_cast<std::size_t>(ring.bytes()) + (bits + 7) / 8;
}

PayloadWriter& PayloadWriter::Words(std::span<const Word> words) {
  Require(!bits_written_, ErrorKind::kConfig, "bit section must come last");
  const int nbytes = ring_.bytes();
  out_.bytes.reserve(out_.bytes.size() + words.size() * nbytes);
  for (Word w : words) {
    w = ring_.Reduce(w);
    for (int i = 0; i < nbytes; ++i) {
      out_.bytes.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
    }
  }
  out_.bits += words.size() * static_cast<std::size_t>(ring_.bits);
  return *this;
}

PayloadWriter& PayloadWriter::Bits(std::span<const std::uint8_t> bits) {
  Require(!bits_written_, ErrorKind::kConfig, "only one bit section allowed");
  bits_written_ = true;
  const std::size_t start = out_.bytes.size();
  out_.bytes.resize(start + (bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    out_.bytes[start + i / 8] |= static_cast<std::uint8_t>((bits[i] & 1) << (i % 8));
  }
  out_.bits += bits.size();
  return *this;
}

Payload PayloadWriter::Finish() { return std::move(out_); }

Words PayloadReader::Words(std::size_t n) {
  const int nbytes = ring_.bytes();
  Require(pos_ + n * nbytes <= payload_.bytes.size(), ErrorKind::kDesync,
          "short read");
  ssinfer::Words out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Word w = 0;
    for (int i = 0; i < nbytes; ++i) {
      w |= static_cast<Word>(payload_.bytes[pos_ + i]) << (8 * i);
    }
    out[k] = w;
    pos_ += nbytes;
  }
  return out;
}

std::vector<std::uint8_t> PayloadReader::Bits(std::size_t n) {
  Require(pos_ + (n + 7) / 8 <= payload_.bytes.size(), ErrorKind::kDesync,
          "short read");
  std::vector<std::uint8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (payload_.bytes[pos_ + i / 8] >> (i % 8)) & 1;
  }
  pos_ += (n + 7) / 8;
  return out;
}

PhaseCounters PhaseCounters::operator-(const PhaseCounters& o) const {
  return {bytes_sent - o.bytes_sent,         bytes_received - o.bytes_received,
          bits_sent - o.bits_sent,           bits_received - o.bits_received,
          messages_sent - o.messages_sent,   messages_received - o.messages_received,
          rounds - o.rounds};
}

void Meter::OnSend(Phase phase, std::size_t wire_bytes, std::size_t payload_bits) {
  PhaseCounters& c = At(phase);
  Last& last = last_[static_cast<int>(phase)];
  if (last != Last::kSend) ++c.rounds;
  last = Last::kSend;
  c.bytes_sent += wire_bytes;
  c.bits_sent += payload_bits;
  ++c.messages_sent;
}

void Meter::OnRecv(Phase phase, std::size_t wire_bytes, std::size_t payload_bits) {
  PhaseCounters& c = At(phase);
  Last& last = last_[static_cast<int>(phase)];
  if (last == Last::kNone) ++c.rounds;
  last = Last::kRecv;
  c.bytes_received += wire_bytes;
  c.bits_received += payload_bits;
  ++c.messages_received;
}

void Meter::BeginSegment() { last_[0] = last_[1] = Last::kNone; }

std::string Transcript::Digest() const {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  for (const Entry& e : entries_) {
    const std::uint8_t dir = e.sent ? 1 : 0;
    EVP_DigestUpdate(ctx, &dir, 1);
    const Bytes wire = e.frame.Encode();
    EVP_DigestUpdate(ctx, wire.data(), wire.size());
  }
  std::uint8_t digest[32];
  EVP_DigestFinal_ex(ctx, digest, nullptr);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char buf[3];
  for (std::uint8_t b : digest) {
    std::snprintf(buf, sizeof(buf), "%02x", b);
    hex += buf;
  }
  return hex;
}

std::vector<Frame> Transcript::Received() const {
  std::vector<Frame> out;
  for (const Entry& e : entries_) {
    if (!e.sent) out.push_back(e.frame);
  }
  return out;
}

// --- loopback ----------------------------------------------------------------

namespace {

struct Pipe {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Bytes> frames;
  bool closed = false;
};

class LoopbackLink final : public Link {
 public:
  LoopbackLink(std::shared_ptr<Pipe> out, std::shared_ptr<Pipe> in)
      : out_(std::move(out)), in_(std::move(in)) {}
  ~LoopbackLink() override { Close(); }

  void WriteFrame(Bytes wire) override {
    std::lock_guard<std::mutex> lock(out_->mu);
    Require(!out_->closed, ErrorKind::kClosed, "write on closed loopback");
    out_->frames.push_back(std::move(wire));
    out_->cv.notify_all();
  }

  Bytes ReadFrame(std::chrono::milliseconds timeout) override {
    std::unique_lock<std::mutex> lock(in_->mu);
    const bool ready = in_->cv.wait_for(
        lock, timeout, [&] { return !in_->frames.empty() || in_->closed; });
    if (!ready) Fail(ErrorKind::kTimeout, "no frame from peer within deadline");
    if (in_->frames.empty()) Fail(ErrorKind::kClosed, "peer closed the channel");
    Bytes wire = std::move(in_->frames.front());
    in_->frames.pop_front();
    return wire;
  }

  void Close() override {
    for (const auto& pipe : {out_, in_}) {
      std::lock_guard<std::mutex> lock(pipe->mu);
      pipe->closed = true;
      pipe->cv.notify_all();
    }
  }

 private:
  std::shared_ptr<Pipe> out_;
  std::shared_ptr<Pipe> in_;
};

}  // namespace

std::pair<std::unique_ptr<Link>, std::unique_ptr<Link>> MakeLoopbackPair() {
  auto a_to_b = std::make_shared<Pipe>();
  auto b_to_a = std::make_shared<Pipe>();
  return {std::make_unique<LoopbackLink>(a_to_b, b_to_a),
          std::make_unique<LoopbackLink>(b_to_a, a_to_b)};
}

// --- endpoint ----------------------------------------------------------------

Endpoint::Endpoint(std::unique_ptr<Link> link, std::uint32_t session_id,
                   const RingParams& ring)
    : link_(std::move(link)), session_(session_id), ring_(ring) {}

Endpoint::~Endpoint() = default;
Endpoint::Endpoint(Endpoint&&) noexcept = default;
Endpoint& Endpoint::operator=(Endpoint&&) noexcept = default;

void Endpoint::Send(Tag tag, const Payload& payload) {
  Require(link_ != nullptr, ErrorKind::kClosed, "endpoint is closed");
  Frame frame{tag, session_, payload.bytes};
  Bytes wire = frame.Encode();
  const std::size_t wire_bytes = wire.size();
  link_->WriteFrame(std::move(wire));
  meter_.OnSend(phase_, wire_bytes, payload.bits);
  if (record_) transcript_.Append(true, frame);
}

Payload Endpoint::Recv(Tag tag, std::size_t words, std::size_t bits) {
  Require(link_ != nullptr, ErrorKind::kClosed, "endpoint is closed");
  const Bytes wire = link_->ReadFrame(timeout_);
  Frame frame = Frame::Decode(wire);
  Require(frame.tag == tag, ErrorKind::kDesync,
          std::string("expected ") + TagName(tag) + " but received " +
              TagName(frame.tag));
  Require(frame.session == session_, ErrorKind::kDesync,
          "frame belongs to session " + std::to_string(frame.session));
  const std::size_t expected = PayloadBytes(ring_, words, bits);
  Require(frame.payload.size() == expected, ErrorKind::kDesync,
          std::string(TagName(tag)) + " payload is " +
              std::to_string(frame.payload.size()) + " bytes, expected " +
              std::to_string(expected));
  const std::size_t payload_bits = words * ring_.bits + bits;
  meter_.OnRecv(phase_, wire.size(), payload_bits);
  if (record_) transcript_.Append(false, frame);
  return Payload{std::move(frame.payload), payload_bits};
}

Payload Endpoint::Exchange(Tag send_tag, const Payload& payload, Tag recv_tag,
                           std::size_t words, std::size_t bits) {
  Send(send_tag, payload);
  return Recv(recv_tag, words, bits);
}

void Endpoint::Close() {
  if (link_) link_->Close();
}

}  // namespace ssinfer
