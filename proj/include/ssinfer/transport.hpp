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

// Framed, metered, full-duplex channel between the two parties.
//
// Wire frame: tag (1 byte) | session id (4 bytes LE) | payload length (4 bytes
// LE) | payload. Payloads pack ring elements little-endian at l/8 bytes each,
// followed by an optional bit section packed LSB-first.

#ifndef SSINFER_TRANSPORT_HPP_
#define SSINFER_TRANSPORT_HPP_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ssinfer/ring.hpp"

namespace ssinfer {

using Bytes = std::vector<std::uint8_t>;

enum class Tag : std::uint8_t {
  kSmatmulMaskedX = 0x01,
  kSmatmulYB = 0x02,
  kSquapolE = 0x03,
  kSquapolF = 0x04,
  kDreluF = 0x05,
  kBitxaDE = 0x06,
  kSharedMulEF = 0x07,
  kTruncMasked = 0x08,
  kSpolyOffline = 0x09,
  kSpolyOpen = 0x0A,
  kInputShares = 0x10,
  kOutputShares = 0x11,
};

bool IsRegisteredTag(std::uint8_t tag);
const char* TagName(Tag tag);

inline constexpr std::size_t kFrameHeaderBytes = 9;

struct Frame {
  Tag tag{};
  std::uint32_t session = 0;
  Bytes payload;

  Bytes Encode() const;
  // kDesync on unknown tag or inconsistent length.
  static Frame Decode(std::span<const std::uint8_t> wire);
};

// Logical message body: packed bytes plus the exact number of payload bits
// they carry (ring elements count l bits, flags one bit).
struct Payload {
  Bytes bytes;
  std::size_t bits = 0;
};

class PayloadWriter {
 public:
  explicit PayloadWriter(const RingParams& ring) : ring_(ring) {}
  PayloadWriter& Words(std::span<const Word> words);
  // Must be the last section.
  PayloadWriter& Bits(std::span<const std::uint8_t> bits);
  Payload Finish();

 private:
  RingParams ring_;
  Payload out_;
  bool bits_written_ = false;
};

class PayloadReader {
 public:
  PayloadReader(const Payload& payload, const RingParams& ring)
      : payload_(payload), ring_(ring) {}
  ssinfer::Words Words(std::size_t n);
  std::vector<std::uint8_t> Bits(std::size_t n);

 private:
  const Payload& payload_;
  RingParams ring_;
  std::size_t pos_ = 0;
};

std::size_t PayloadBytes(const RingParams& ring, std::size_t words,
                         std::size_t bits);

enum class Phase : std::uint8_t { kOffline = 0, kOnline = 1 };
const char* PhaseName(Phase phase);

struct PhaseCounters {
  std::uint64_t bytes_sent = 0;      // including frame headers
  std::uint64_t bytes_received = 0;  // including frame headers
  std::uint64_t bits_sent = 0;       // logical payload bits
  std::uint64_t bits_received = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_received = 0;
  std::uint64_t rounds = 0;

  PhaseCounters operator-(const PhaseCounters& o) const;
  friend bool operator==(const PhaseCounters&, const PhaseCounters&) = default;
};

struct MeterReading {
  PhaseCounters offline;
  PhaseCounters online;
  const PhaseCounters& at(Phase p) const {
    return p == Phase::kOffline ? offline : online;
  }
  MeterReading operator-(const MeterReading& o) const {
    return {offline - o.offline, online - o.online};
  }
  friend bool operator==(const MeterReading&, const MeterReading&) = default;
};

// Byte, bit and round counters per phase. A new round starts with the first
// action of a segment and with every send that follows a receive, so a
// simultaneous exchange (send then receive on both sides) costs one round and
// a one-way message costs one round on each side.
class Meter {
 public:
  void OnSend(Phase phase, std::size_t wire_bytes, std::size_t payload_bits);
  void OnRecv(Phase phase, std::size_t wire_bytes, std::size_t payload_bits);
  // Forget the send/receive history so the next action opens a new round.
  void BeginSegment();
  MeterReading Read() const { return reading_; }

 private:
  enum class Last : std::uint8_t { kNone, kSend, kRecv };
  PhaseCounters& At(Phase p) {
    return p == Phase::kOffline ? reading_.offline : reading_.online;
  }
  MeterReading reading_;
  Last last_[2] = {Last::kNone, Last::kNone};
};

// Ordered record of every frame a party sent or received.
class Transcript {
 public:
  struct Entry {
    bool sent = false;
    Frame frame;
  };
  void Append(bool sent, const Frame& frame) { entries_.push_back({sent, frame}); }
  const std::vector<Entry>& entries() const { return entries_; }
  // Hex SHA-256 over the direction, tag, session and payload of every entry.
  std::string Digest() const;
  // Only frames received from the peer.
  std::vector<Frame> Received() const;

 private:
  std::vector<Entry> entries_;
};

// A reliable, ordered, frame-oriented byte pipe.
class Link {
 public:
  virtual ~Link() = default;
  virtual void WriteFrame(Bytes wire) = 0;
  // kTimeout after `timeout`; kClosed if the peer went away.
  virtual Bytes ReadFrame(std::chrono::milliseconds timeout) = 0;
  virtual void Close() = 0;
};

// In-process pair of connected links.
std::pair<std::unique_ptr<Link>, std::unique_ptr<Link>> MakeLoopbackPair();

class Endpoint {
 public:
  Endpoint(std::unique_ptr<Link> link, std::uint32_t session_id,
           const RingParams& ring);
  ~Endpoint();
  Endpoint(Endpoint&&) noexcept;
  Endpoint& operator=(Endpoint&&) noexcept;

  void Send(Tag tag, const Payload& payload);
  // Validates tag, session id and the expected payload size.
  Payload Recv(Tag tag, std::size_t words, std::size_t bits = 0);
  // Both parties send, then both receive: one round.
  Payload Exchange(Tag send_tag, const Payload& payload, Tag recv_tag,
                   std::size_t words, std::size_t bits = 0);

  Phase phase() const { return phase_; }
  void set_phase(Phase phase) { phase_ = phase; }
  void set_timeout(std::chrono::milliseconds timeout) { timeout_ = timeout; }
  const RingParams& ring() const { return ring_; }
  std::uint32_t session_id() const { return session_; }

  Meter& meter() { return meter_; }
  const Meter& meter() const { return meter_; }
  void EnableTranscript() { record_ = true; }
  const Transcript& transcript() const { return transcript_; }

  void Close();

 private:
  std::unique_ptr<Link> link_;
  std::uint32_t session_;
  RingParams ring_;
  Phase phase_ = Phase::kOnline;
  std::chrono::milliseconds timeout_{std::chrono::seconds(60)};
  Meter meter_;
  bool record_ = false;
  Transcript transcript_;
};

// Switches the metering phase for the lifetime of the guard.
class PhaseScope {
 public:
  PhaseScope(Endpoint& ep, Phase phase) : ep_(ep), saved_(ep.phase()) {
    ep_.set_phase(phase);
  }
  ~PhaseScope() { ep_.set_phase(saved_); }
  PhaseScope(const PhaseScope&) = delete;
  PhaseScope& operator=(const PhaseScope&) = delete;

 private:
  Endpoint& ep_;
  Phase saved_;
};

// --- TCP ---------------------------------------------------------------------

// Parameters both parties must agree on before any frame is exchanged.
struct HandshakeParams {
  RingParams ring;
  int kappa = 128;
  std::uint8_t prg_id = 1;
  int spline_pieces = 12;
};

inline constexpr std::uint8_t kProtocolVersion = 1;

Bytes EncodeHello(const HandshakeParams& params);
// kHandshake on bad magic, version, or any parameter mismatch.
void CheckHello(std::span<const std::uint8_t> hello, const HandshakeParams& mine);

// "host:port"; port 0 binds an ephemeral port.
std::pair<std::string, std::uint16_t> ParseHostPort(const std::string& endpoint);

class TcpListener {
 public:
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;
  std::uint16_t port() const { return port_; }
  // Accepts one peer and runs the handshake.
  std::unique_ptr<Link> Accept(const HandshakeParams& params,
                               std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

std::unique_ptr<Link> TcpConnect(const std::string& host, std::uint16_t port,
                                 const HandshakeParams& params,
                                 std::chrono::milliseconds timeout);

}  // namespace ssinfer

#endif  // SSINFER_TRANSPORT_HPP_
