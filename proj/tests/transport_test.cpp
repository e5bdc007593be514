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

#include <gtest/gtest.h>

#include <future>
#include <thread>

#include "ssinfer/error.hpp"
#include "ssinfer/rng.hpp"

namespace ssinfer {
namespace {

using std::chrono::milliseconds;

const RingParams kRing{32, 8};

std::pair<Endpoint, Endpoint> LoopbackEndpoints(std::uint32_t session = 7) {
  auto [a, b] = MakeLoopbackPair();
  return {Endpoint(std::move(a), session, kRing), Endpoint(std::move(b), session, kRing)};
}

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kConfig;
}

TEST(Frame, EncodeDecodeRoundTrip) {
  const Frame f{Tag::kDreluF, 0xdeadbeef, {1, 2, 3}};
  const Bytes wire = f.Encode();
  ASSERT_EQ(wire.size(), kFrameHeaderBytes + 3);
  EXPECT_EQ(wire[0], 0x05);
  EXPECT_EQ(wire[1], 0xef);
  EXPECT_EQ(wire[5], 3);
  const Frame g = Frame::Decode(wire);
  EXPECT_EQ(g.tag, f.tag);
  EXPECT_EQ(g.session, f.session);
  EXPECT_EQ(g.payload, f.payload);
}

TEST(Frame, DecodeRejectsBadInput) {
  Bytes wire = Frame{Tag::kBitxaDE, 1, {9}}.Encode();
  wire[0] = 0x42;
  EXPECT_EQ(KindOf([&] { Frame::Decode(wire); }), ErrorKind::kDesync);
  wire[0] = 0x06;
  wire.push_back(0);
  EXPECT_EQ(KindOf([&] { Frame::Decode(wire); }), ErrorKind::kDesync);
  EXPECT_EQ(KindOf([&] { Frame::Decode(Bytes{1, 2}); }), ErrorKind::kDesync);
}

TEST(Payload, WordsThenBits) {
  const Words w = {0x01020304, 0xffffffff};
  const std::vector<std::uint8_t> bits = {1, 0, 1, 1, 0, 0, 0, 0, 1};
  const Payload p = PayloadWriter(kRing).Words(w).Bits(bits).Finish();
  EXPECT_EQ(p.bits, 2 * 32 + 9u);
  ASSERT_EQ(p.bytes.size(), PayloadBytes(kRing, 2, 9));
  EXPECT_EQ(p.bytes[0], 0x04);
  EXPECT_EQ(p.bytes[8], 0b00001101);
  EXPECT_EQ(p.bytes[9], 0b1);
  PayloadReader r(p, kRing);
  EXPECT_EQ(r.Words(2), w);
  EXPECT_EQ(r.Bits(9), bits);
  EXPECT_THROW(PayloadWriter(kRing).Bits(bits).Words(w), Error);
}

TEST(Endpoint, SendFourWordsMetersHeaderAndPayload) {
  auto [a, b] = LoopbackEndpoints();
  a.Send(Tag::kSmatmulMaskedX, PayloadWriter(kRing).Words(Words{1, 2, 3, 4}).Finish());
  const Payload p = b.Recv(Tag::kSmatmulMaskedX, 4);
  EXPECT_EQ(p.bytes.size(), 16u);
  EXPECT_EQ(a.meter().Read().online.bytes_sent, 16 + kFrameHeaderBytes);
  EXPECT_EQ(a.meter().Read().online.bits_sent, 128u);
  EXPECT_EQ(b.meter().Read().online.bytes_received, 16 + kFrameHeaderBytes);
  EXPECT_EQ(a.meter().Read().online.rounds, 1u);
  EXPECT_EQ(b.meter().Read().online.rounds, 1u);
}

TEST(Endpoint, SimultaneousExchangeIsOneRound) {
  auto [a, b] = LoopbackEndpoints();
  const Payload pa = PayloadWriter(kRing).Words(Words{11}).Finish();
  const Payload pb = PayloadWriter(kRing).Words(Words{22}).Finish();
  auto fut = std::async(std::launch::async, [&b = b, &pb] {
    return b.Exchange(Tag::kDreluF, pb, Tag::kDreluF, 1);
  });
  const Payload got_a = a.Exchange(Tag::kDreluF, pa, Tag::kDreluF, 1);
  const Payload got_b = fut.get();
  EXPECT_EQ(got_a.bytes, pb.bytes);
  EXPECT_EQ(got_b.bytes, pa.bytes);
  EXPECT_EQ(a.meter().Read().online.rounds, 1u);
  EXPECT_EQ(b.meter().Read().online.rounds, 1u);
}

TEST(Endpoint, PingPongIsTwoRoundsForResponder) {
  auto [a, b] = LoopbackEndpoints();
  const Payload p = PayloadWriter(kRing).Words(Words{5}).Finish();
  a.Send(Tag::kSquapolE, p);
  b.Recv(Tag::kSquapolE, 1);
  b.Send(Tag::kSquapolF, p);
  a.Recv(Tag::kSquapolF, 1);
  EXPECT_EQ(a.meter().Read().online.rounds, 1u);
  EXPECT_EQ(b.meter().Read().online.rounds, 2u);
}

TEST(Endpoint, PhasesAreMeteredSeparately) {
  auto [a, b] = LoopbackEndpoints();
  const Payload p = PayloadWriter(kRing).Words(Words{5, 6}).Finish();
  {
    PhaseScope scope(a, Phase::kOffline);
    a.Send(Tag::kSmatmulYB, p);
  }
  a.Send(Tag::kSmatmulMaskedX, p);
  EXPECT_EQ(a.meter().Read().offline.bits_sent, 64u);
  EXPECT_EQ(a.meter().Read().online.bits_sent, 64u);
  EXPECT_EQ(a.phase(), Phase::kOnline);
}

TEST(Endpoint, DetectsTagMismatch) {
  auto [a, b] = LoopbackEndpoints();
  a.Send(Tag::kBitxaDE, PayloadWriter(kRing).Words(Words{1}).Finish());
  EXPECT_EQ(KindOf([&b = b] { b.Recv(Tag::kDreluF, 1); }), ErrorKind::kDesync);
}

TEST(Endpoint, DetectsSizeAndSessionMismatch) {
  auto [x, y] = MakeLoopbackPair();
  Endpoint a(std::move(x), 1, kRing), b(std::move(y), 2, kRing);
  a.Send(Tag::kBitxaDE, PayloadWriter(kRing).Words(Words{1}).Finish());
  EXPECT_EQ(KindOf([&] { b.Recv(Tag::kBitxaDE, 1); }), ErrorKind::kDesync);

  auto [c, d] = LoopbackEndpoints();
  c.Send(Tag::kBitxaDE, PayloadWriter(kRing).Words(Words{1, 2}).Finish());
  EXPECT_EQ(KindOf([&d = d] { d.Recv(Tag::kBitxaDE, 1); }), ErrorKind::kDesync);
}

TEST(Endpoint, TimeoutWhenPeerSkipsStep) {
  auto [a, b] = LoopbackEndpoints();
  b.set_timeout(milliseconds(50));
  EXPECT_EQ(KindOf([&b = b] { b.Recv(Tag::kDreluF, 1); }), ErrorKind::kTimeout);
}

TEST(Endpoint, ClosedChannel) {
  auto [a, b] = LoopbackEndpoints();
  a.Close();
  EXPECT_EQ(KindOf([&b = b] { b.Recv(Tag::kDreluF, 1); }), ErrorKind::kClosed);
  EXPECT_EQ(KindOf([&a = a] {
              a.Send(Tag::kDreluF, PayloadWriter(kRing).Words(Words{1}).Finish());
            }),
            ErrorKind::kClosed);
}

TEST(Loopback, EchoRandomFrames) {
  auto [a, b] = MakeLoopbackPair();
  Rng rng(3);
  std::vector<Bytes> sent;
  for (int i = 0; i < 10000; ++i) {
    Bytes wire = Frame{Tag::kSharedMulEF, static_cast<std::uint32_t>(i),
                       Bytes(rng.Bits(6))}
                     .Encode();
    for (std::size_t j = kFrameHeaderBytes; j < wire.size(); ++j) {
      wire[j] = static_cast<std::uint8_t>(rng.NextU64());
    }
    sent.push_back(wire);
    a->WriteFrame(wire);
  }
  for (const Bytes& w : sent) EXPECT_EQ(b->ReadFrame(milliseconds(1000)), w);
}

TEST(Meter, IsDeterministicAcrossRuns) {
  auto run = [] {
    auto [a, b] = LoopbackEndpoints();
    a.EnableTranscript();
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
      const Payload p = PayloadWriter(kRing).Words(UniformVector(i + 1, rng, kRing)).Finish();
      a.Send(Tag::kSmatmulMaskedX, p);
      b.Recv(Tag::kSmatmulMaskedX, i + 1);
    }
    return std::make_pair(a.meter().Read(), a.transcript().Digest());
  };
  EXPECT_EQ(run(), run());
}

TEST(Handshake, HelloLayout) {
  const HandshakeParams params{RingParams{32, 8}, 128, 1, 12};
  const Bytes hello = EncodeHello(params);
  ASSERT_EQ(hello.size(), 11u);
  EXPECT_EQ(std::string(hello.begin(), hello.begin() + 4), "PGNN");
  EXPECT_EQ(hello[4], kProtocolVersion);
  EXPECT_EQ(hello[5], 32);
  EXPECT_EQ(hello[6], 8);
  EXPECT_NO_THROW(CheckHello(hello, params));
  HandshakeParams other = params;
  other.ring.bits = 64;
  EXPECT_EQ(KindOf([&] { CheckHello(hello, other); }), ErrorKind::kHandshake);
  Bytes bad = hello;
  bad[0] = 'X';
  EXPECT_EQ(KindOf([&] { CheckHello(bad, params); }), ErrorKind::kHandshake);
}

TEST(Handshake, ParseHostPort) {
  EXPECT_EQ(ParseHostPort("127.0.0.1:9000"),
            (std::pair<std::string, std::uint16_t>{"127.0.0.1", 9000}));
  EXPECT_EQ(KindOf([] { ParseHostPort("nohost"); }), ErrorKind::kConfig);
  EXPECT_EQ(KindOf([] { ParseHostPort("h:99999"); }), ErrorKind::kConfig);
}

TEST(Tcp, ExchangeMatchesLoopbackTranscript) {
  const HandshakeParams params{kRing, 128, 1, 12};
  auto script = [](Endpoint& ep, bool first) {
    ep.EnableTranscript();
    Rng rng(first ? 1 : 2);
    for (int i = 0; i < 5; ++i) {
      // Large frames in both directions at once.
      const Payload p = PayloadWriter(kRing).Words(UniformVector(200000, rng, kRing)).Finish();
      ep.Exchange(Tag::kSharedMulEF, p, Tag::kSharedMulEF, 200000);
    }
    return ep.transcript().Digest();
  };

  TcpListener listener("127.0.0.1", 0);
  auto server = std::async(std::launch::async, [&] {
    Endpoint ep(listener.Accept(params, milliseconds(5000)), 9, kRing);
    return script(ep, false);
  });
  Endpoint client(TcpConnect("127.0.0.1", listener.port(), params, milliseconds(5000)),
                  9, kRing);
  const std::string tcp_client = script(client, true);
  const std::string tcp_server = server.get();

  auto [a, b] = LoopbackEndpoints(9);
  auto lb_server = std::async(std::launch::async, [&b = b, &script] { return script(b, false); });
  const std::string lb_client = script(a, true);
  EXPECT_EQ(tcp_client, lb_client);
  EXPECT_EQ(tcp_server, lb_server.get());
}

TEST(Tcp, HandshakeMismatchAborts) {
  const HandshakeParams server_params{RingParams{32, 8}, 128, 1, 12};
  const HandshakeParams client_params{RingParams{64, 8}, 128, 1, 12};
  TcpListener listener("127.0.0.1", 0);
  auto server = std::async(std::launch::async, [&] {
    return KindOf([&] { listener.Accept(server_params, milliseconds(5000)); });
  });
  EXPECT_EQ(KindOf([&] {
              TcpConnect("127.0.0.1", listener.port(), client_params, milliseconds(5000));
            }),
            ErrorKind::kHandshake);
  EXPECT_EQ(server.get(), ErrorKind::kHandshake);
}

}  // namespace
}  // namespace ssinfer
