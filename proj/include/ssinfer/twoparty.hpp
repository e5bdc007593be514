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

// In-process two-party execution: plan, deal, then run both parties on
// threads over a loopback link.

#ifndef SSINFER_TWOPARTY_HPP_
#define SSINFER_TWOPARTY_HPP_

#include <algorithm>
#include <chrono>
#include <exception>
#include <optional>
#include <thread>
#include <type_traits>
#include <utility>

#include "ssinfer/dealer.hpp"
#include "ssinfer/error.hpp"
#include "ssinfer/protocols.hpp"
#include "ssinfer/transport.hpp"

namespace ssinfer {

struct TwoPartyOptions {
  SecurityParams sec;
  TruncMode mode = TruncMode::kExact;
  std::uint32_t session = 1;
  std::uint64_t dealer_seed = 1;
  std::uint64_t client_seed = 2;
  std::uint64_t server_seed = 3;
  bool transcript = false;
  bool measure_bundles = false;  // fills TwoPartyRun::bundle_bytes
};

template <typename R>
struct TwoPartyRun {
  R client, server;
  MeterReading client_meter, server_meter;
  std::vector<LayerStat> client_layers, server_layers;
  Requirements plan;
  std::string client_digest, server_digest;
  Transcript client_transcript, server_transcript;  // when recorded
  CorrelationCounts client_consumed, server_consumed;
  std::uint64_t bundle_bytes = 0;  // both serialized bundles
  double deal_seconds = 0, run_seconds = 0;

  // Bits sum both directions; rounds are the larger of the two parties.
  std::uint64_t Bits(Phase p) const {
    return client_meter.at(p).bits_sent + server_meter.at(p).bits_sent;
  }
  std::uint64_t Rounds(Phase p) const {
    return std::max(client_meter.at(p).rounds, server_meter.at(p).rounds);
  }
};

inline bool IsClosed(std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const Error& err) {
    return err.kind() == ErrorKind::kClosed;
  } catch (...) {
    return false;
  }
}

// Runs `fn(Session&)` for both parties; fn selects its own inputs by
// Session::party(). The dealer plan comes from a dry run on a client planner.
template <typename Fn>
auto RunTwoParty(const RingParams& ring, Fn&& fn, const TwoPartyOptions& opt = {})
    -> TwoPartyRun<std::invoke_result_t<Fn&, Session&>> {
  using R = std::invoke_result_t<Fn&, Session&>;
  TwoPartyRun<R> run;
  {
    Session planner = Session::Planner(Party::kClient, ring, opt.sec, opt.mode);
    fn(planner);
    run.plan = planner.requirements();
  }
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  auto [b0, b1] = Deal(run.plan, ring, opt.sec, opt.session, opt.dealer_seed);
  const auto t1 = Clock::now();
  run.deal_seconds = std::chrono::duration<double>(t1 - t0).count();
  if (opt.measure_bundles) run.bundle_bytes = b0.Serialize().size() + b1.Serialize().size();
  auto [l0, l1] = MakeLoopbackPair();
  Endpoint e0(std::move(l0), opt.session, ring);
  Endpoint e1(std::move(l1), opt.session, ring);
  if (opt.transcript) {
    e0.EnableTranscript();
    e1.EnableTranscript();
  }
  std::optional<R> r0, r1;
  std::exception_ptr err0, err1;
  auto body = [&](Party p, Endpoint& ep, DealerBundle& bundle, std::optional<R>& out,
                  std::exception_ptr& err, std::vector<LayerStat>& layers,
                  CorrelationCounts& consumed) {
    try {
      Session s(p, ep, bundle,
                p == Party::kClient ? opt.client_seed : opt.server_seed, opt.mode);
      out.emplace(fn(s));
      layers = s.layer_log();
      consumed = bundle.Consumed();
    } catch (...) {
      err = std::current_exception();
      ep.Close();
    }
  };
  const auto t2 = Clock::now();
  std::thread server([&] { body(Party::kServer, e1, b1, r1, err1, run.server_layers, run.server_consumed); });
  body(Party::kClient, e0, b0, r0, err0, run.client_layers, run.client_consumed);
  server.join();
  run.run_seconds = std::chrono::duration<double>(Clock::now() - t2).count();
  // A failing party closes its link, so the peer usually sees kClosed; report
  // the original failure.
  if (err0 && err1 && IsClosed(err0)) std::rethrow_exception(err1);
  if (err0) std::rethrow_exception(err0);
  if (err1) std::rethrow_exception(err1);
  run.client = std::move(*r0);
  run.server = std::move(*r1);
  run.client_meter = e0.meter().Read();
  run.server_meter = e1.meter().Read();
  if (opt.transcript) {
    run.client_transcript = e0.transcript();
    run.server_transcript = e1.transcript();
    run.client_digest = run.client_transcript.Digest();
    run.server_digest = run.server_transcript.Digest();
  }
  return run;
}

}  // namespace ssinfer

#endif  // SSINFER_TWOPARTY_HPP_
