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

#include "ssinfer/cli.hpp"

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "ssinfer/bytes.hpp"
#include "ssinfer/costmodel.hpp"
#include "ssinfer/dealer.hpp"
#include "ssinfer/gnn.hpp"
#include "ssinfer/transport.hpp"
#include "ssinfer/twoparty.hpp"

namespace ssinfer {

namespace fs = std::filesystem;
using nlohmann::json;

ExitCode ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kOverflow:
    case ErrorKind::kShape:
    case ErrorKind::kPartyMismatch:
      return ExitCode::kConfig;
    case ErrorKind::kHandshake:
      return ExitCode::kHandshake;
    case ErrorKind::kDesync:
    case ErrorKind::kClosed:
    case ErrorKind::kTimeout:
      return ExitCode::kDesync;
    case ErrorKind::kExhaustion:
      return ExitCode::kExhaustion;
    case ErrorKind::kVerification:
      return ExitCode::kVerification;
    case ErrorKind::kIntegrity:
      return ExitCode::kIntegrity;
    case ErrorKind::kIo:
      return ExitCode::kIo;
  }
  return ExitCode::kFailure;
}

// --- configuration --------------------------------------------------------------------

namespace {

TruncMode ParseTruncMode(const std::string& s) {
  if (s == "exact") return TruncMode::kExact;
  if (s == "local") return TruncMode::kLocal;
  Fail(ErrorKind::kConfig, "trunc must be 'exact' or 'local', got '" + s + "'");
}

}  // namespace

CliConfig CliConfig::Load(const std::string& path) {
  const auto bytes = ReadFileBytes(path);
  CliConfig c;
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    return p.empty() || fs::path(p).is_absolute() ? p : (base / p).string();
  };
  try {
    const json doc = json::parse(bytes.begin(), bytes.end());
    if (doc.contains("ring")) {
      c.ring.bits = doc["ring"].value("bits", c.ring.bits);
      c.ring.frac = doc["ring"].value("frac", c.ring.frac);
    }
    c.sec.kappa = doc.value("kappa", c.sec.kappa);
    c.session = doc.value("session", c.session);
    c.seed = doc.value("seed", c.seed);
    if (doc.contains("trunc")) c.mode = ParseTruncMode(doc["trunc"].get<std::string>());
    c.model = resolve(doc.value("model", ""));
    c.graph = resolve(doc.value("graph", ""));
    c.bundle = resolve(doc.value("bundle", ""));
    c.report = resolve(doc.value("report", ""));
    c.out = resolve(doc.value("out", "."));
    c.listen = doc.value("listen", "");
    c.connect = doc.value("connect", "");
    c.nodes = doc.value("nodes", c.nodes);
    c.protocol = doc.value("protocol", c.protocol);
    c.scale = doc.value("scale", c.scale);
    c.timeout_ms = doc.value("timeout_ms", c.timeout_ms);
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfig, "malformed config " + path + ": " + e.what());
  }
  return c;
}

void CliConfig::Validate() const {
  ring.Validate();
  sec.Validate();
  Require(timeout_ms > 0, ErrorKind::kConfig, "timeout_ms must be positive");
  Require(scale > 0, ErrorKind::kConfig, "scale must be positive");
}

namespace {

struct Context {
  CliConfig cfg;
  std::ostream& out;
  std::shared_ptr<spdlog::logger> log;
};

std::uint64_t DeriveSeed(std::uint64_t seed, const char* label) {
  return Rng(seed, label).NextU64();
}

std::string Need(const std::string& value, const char* flag) {
  Require(!value.empty(), ErrorKind::kConfig, std::string("missing ") + flag);
  return value;
}

std::string ReadText(const std::string& path) {
  const auto bytes = ReadFileBytes(path);
  return std::string(bytes.begin(), bytes.end());
}

MpnnConfig LoadArchitecture(const Context& ctx) {
  return MpnnConfig::FromJson(ReadText(Need(ctx.cfg.model, "--model")));
}

HandshakeParams Hello(const Context& ctx, const MpnnConfig& arch) {
  return {ctx.cfg.ring, ctx.cfg.sec.kappa, ctx.cfg.sec.prg_id, arch.spline_pieces};
}

// Refuses to start a run the bundle cannot finish.
void CheckBundle(const DealerBundle& b, Party party, const Context& ctx, const Requirements& plan) {
  Require(b.party() == party, ErrorKind::kPartyMismatch,
          std::string("bundle belongs to the ") + (b.party() == Party::kClient ? "client" : "server"));
  Require(b.ring() == ctx.cfg.ring, ErrorKind::kConfig, "bundle ring differs from the config");
  Require(b.security() == ctx.cfg.sec, ErrorKind::kConfig,
          "bundle security parameters differ from the config");
  const CorrelationCounts need = plan.Counts(), have = b.Available();
  const std::pair<const char*, std::pair<std::uint64_t, std::uint64_t>> rows[] = {
      {"asym scalar", {need.asym_scalar, have.asym_scalar}},
      {"asym matrix", {need.asym_matrix, have.asym_matrix}},
      {"shared scalar", {need.shared_scalar, have.shared_scalar}},
      {"shared matrix", {need.shared_matrix, have.shared_matrix}},
      {"drelu", {need.drelu, have.drelu}},
      {"bitxa", {need.bitxa, have.bitxa}},
      {"trunc", {need.trunc, have.trunc}},
      {"power mask", {need.power_mask, have.power_mask}},
  };
  for (const auto& [name, nh] : rows) {
    Require(nh.first <= nh.second, ErrorKind::kExhaustion,
            std::string("bundle holds ") + std::to_string(nh.second) + " " + name +
                " instances, the run needs " + std::to_string(nh.first));
  }
  if (!(need == have)) ctx.log->warn("bundle holds more material than this run uses");
}

void PrintCounters(std::ostream& out, const char* name, const PhaseCounters& c) {
  out << "  " << name << ": " << c.bits_sent << " payload bits sent, " << c.bits_received
      << " received, " << c.bytes_sent << " wire bytes sent, " << c.messages_sent
      << " messages, " << c.rounds << " rounds\n";
}

void PrintMeter(std::ostream& out, const char* who, const MeterReading& m,
                const std::vector<LayerStat>& layers) {
  out << who << " meter\n";
  PrintCounters(out, "offline", m.offline);
  PrintCounters(out, "online", m.online);
  for (const LayerStat& l : layers) {
    out << "  layer " << l.name << ": online " << l.cost.online.bits_sent << " bits sent, "
        << l.cost.online.rounds << " rounds\n";
  }
}

struct PartyOutcome {
  std::vector<double> output;
  MeterReading meter;
  std::vector<LayerStat> layers;
  std::string digest;
};

// One party's side of an inference over an established endpoint.
PartyOutcome RunParty(const Context& ctx, Party party, Endpoint& ep, DealerBundle& bundle,
                      const MpnnConfig& arch, const GraphData* graph,
                      const MpnnWeights* weights, std::size_t n) {
  const CliConfig& c = ctx.cfg;
  ep.EnableTranscript();
  ep.set_timeout(std::chrono::milliseconds(c.timeout_ms));
  PartyOutcome res;
  Session s(party, ep, bundle,
            DeriveSeed(c.seed, party == Party::kClient ? "client" : "server"), c.mode);
  if (party == Party::kClient) {
    const auto [mine, theirs] = SplitGraph(*graph, c.ring, DeriveSeed(c.seed, "split"));
    {
      LayerScope scope(s, "upload");
      UploadGraph(s, &theirs, n, arch.m, arch.edge_dim);
    }
    res.output = SecureInfer(s, mine, EncodedMpnn::Shapes(arch, c.ring));
  } else {
    GraphShares mine;
    {
      LayerScope scope(s, "upload");
      mine = UploadGraph(s, nullptr, n, arch.m, arch.edge_dim);
    }
    SecureInfer(s, mine, EncodedMpnn::Encode(*weights, c.ring));
  }
  res.meter = ep.meter().Read();
  res.layers = s.layer_log();
  res.digest = ep.transcript().Digest();
  return res;
}

void PrintOutput(std::ostream& out, const std::vector<double>& v) {
  out << "output";
  for (double x : v) out << " " << x;
  out << "\n";
}

void WriteText(const std::string& path, const std::string& text) {
  WriteFileBytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

// --- subcommands ------------------------------------------------------------------------

int CmdDealer(Context& ctx) {
  const CliConfig& c = ctx.cfg;
  const MpnnConfig arch = LoadArchitecture(ctx);
  std::size_t n = c.nodes;
  if (n == 0 && !c.graph.empty()) n = GraphData::Load(c.graph).n;
  Require(n > 0, ErrorKind::kConfig, "dealer needs --nodes (or --graph) for the node count");
  const Requirements plan = PlanMpnn(arch, c.ring, n, c.mode);
  auto [b0, b1] = Deal(plan, c.ring, c.sec, c.session, c.seed);
  fs::create_directories(c.out);
  const std::string p0 = (fs::path(c.out) / "client.bundle").string();
  const std::string p1 = (fs::path(c.out) / "server.bundle").string();
  b0.Save(p0);
  b1.Save(p1);
  ctx.out << "plan for n=" << n << " T=" << arch.steps << ": " << plan.Counts().ToString() << "\n";
  ctx.out << "wrote " << p0 << " (" << fs::file_size(p0) << " bytes)\n";
  ctx.out << "wrote " << p1 << " (" << fs::file_size(p1) << " bytes)\n";
  return 0;
}

int CmdServer(Context& ctx) {
  const CliConfig& c = ctx.cfg;
  const MpnnWeights w = MpnnWeights::Load(Need(c.model, "--model"));
  Require(c.nodes > 0, ErrorKind::kConfig, "server needs --nodes");
  DealerBundle bundle = DealerBundle::Load(Need(c.bundle, "--bundle"));
  CheckBundle(bundle, Party::kServer, ctx, PlanMpnn(w.config, c.ring, c.nodes, c.mode));
  const auto [host, port] = ParseHostPort(Need(c.listen, "--listen"));
  TcpListener listener(host, port);
  ctx.log->info("listening on {}:{}", host, listener.port());
  Endpoint ep(listener.Accept(Hello(ctx, w.config), std::chrono::milliseconds(c.timeout_ms)),
              bundle.session(), c.ring);
  const PartyOutcome res =
      RunParty(ctx, Party::kServer, ep, bundle, w.config, nullptr, &w, c.nodes);
  PrintMeter(ctx.out, "server", res.meter, res.layers);
  ctx.out << "transcript " << res.digest << "\n";
  return 0;
}

int CmdClient(Context& ctx) {
  const CliConfig& c = ctx.cfg;
  const MpnnConfig arch = LoadArchitecture(ctx);
  const GraphData graph = GraphData::Load(Need(c.graph, "--graph"));
  DealerBundle bundle = DealerBundle::Load(Need(c.bundle, "--bundle"));
  CheckBundle(bundle, Party::kClient, ctx, PlanMpnn(arch, c.ring, graph.n, c.mode));
  const auto [host, port] = ParseHostPort(Need(c.connect, "--connect"));
  Endpoint ep(TcpConnect(host, port, Hello(ctx, arch), std::chrono::milliseconds(c.timeout_ms)),
              bundle.session(), c.ring);
  const PartyOutcome res =
      RunParty(ctx, Party::kClient, ep, bundle, arch, &graph, nullptr, graph.n);
  PrintOutput(ctx.out, res.output);
  PrintMeter(ctx.out, "client", res.meter, res.layers);
  ctx.out << "transcript " << res.digest << "\n";
  return 0;
}

int CmdLoopback(Context& ctx) {
  const CliConfig& c = ctx.cfg;
  const MpnnWeights w = MpnnWeights::Load(Need(c.model, "--model"));
  const GraphData graph = GraphData::Load(Need(c.graph, "--graph"));
  const Requirements plan = PlanMpnn(w.config, c.ring, graph.n, c.mode);
  DealerBundle b0, b1;
  if (c.bundle.empty()) {
    std::tie(b0, b1) = Deal(plan, c.ring, c.sec, c.session, c.seed);
  } else {
    b0 = DealerBundle::Load((fs::path(c.bundle) / "client.bundle").string());
    b1 = DealerBundle::Load((fs::path(c.bundle) / "server.bundle").string());
  }
  CheckBundle(b0, Party::kClient, ctx, plan);
  CheckBundle(b1, Party::kServer, ctx, plan);
  auto [l0, l1] = MakeLoopbackPair();
  Endpoint e0(std::move(l0), b0.session(), c.ring), e1(std::move(l1), b1.session(), c.ring);
  PartyOutcome r0, r1;
  std::exception_ptr err1;
  const auto start = std::chrono::steady_clock::now();
  std::thread server([&] {
    try {
      r1 = RunParty(ctx, Party::kServer, e1, b1, w.config, nullptr, &w, graph.n);
    } catch (...) {
      err1 = std::current_exception();
      e1.Close();
    }
  });
  try {
    r0 = RunParty(ctx, Party::kClient, e0, b0, w.config, &graph, nullptr, graph.n);
  } catch (const Error& e) {
    e0.Close();
    server.join();
    if (e.kind() == ErrorKind::kClosed && err1) std::rethrow_exception(err1);
    throw;
  }
  server.join();
  if (err1) std::rethrow_exception(err1);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  PrintOutput(ctx.out, r0.output);
  PrintMeter(ctx.out, "client", r0.meter, r0.layers);
  PrintMeter(ctx.out, "server", r1.meter, r1.layers);
  ctx.out << "transcript " << r0.digest << "\n";
  ctx.out << "elapsed " << seconds << " s\n";
  if (!c.report.empty()) {
    json doc = {{"output", r0.output},
                {"online_bits", r0.meter.online.bits_sent + r1.meter.online.bits_sent},
                {"offline_bits", r0.meter.offline.bits_sent + r1.meter.offline.bits_sent},
                {"online_rounds", std::max(r0.meter.online.rounds, r1.meter.online.rounds)},
                {"transcript", r0.digest},
                {"seconds", seconds}};
    WriteText(c.report, doc.dump(2));
  }
  return 0;
}

int CmdBench(Context& ctx) {
  const CliConfig& c = ctx.cfg;
  std::vector<CostProtocol> protocols;
  if (c.protocol == "all") {
    protocols = AllCostProtocols();
  } else {
    protocols.push_back(ParseCostProtocol(c.protocol));
  }
  int k = 12;
  if (!c.model.empty()) k = LoadArchitecture(ctx).spline_pieces;
  std::vector<CostReport> reports;
  for (CostProtocol p : protocols) {
    BenchOptions opt;
    opt.scale = c.scale;
    opt.k = k;
    opt.seed = c.seed;
    opt.mode = c.mode;
    ctx.log->info("bench {} scale {}", CostProtocolName(p), c.scale);
    reports.push_back(Compare(p, c.ring, opt));
  }
  ctx.out << FormatReports(reports);
  if (!c.report.empty()) {
    const bool csv = fs::path(c.report).extension() == ".csv";
    WriteText(c.report, csv ? ReportsCsv(reports) : ReportsJson(reports));
  }
  for (const CostReport& r : reports) {
    if (!r.Ok()) {
      ctx.out << "cost mismatch for " << CostProtocolName(r.protocol) << "\n";
      return static_cast<int>(ExitCode::kVerification);
    }
  }
  return 0;
}

int CmdOracle(Context& ctx) {
  const CliConfig& c = ctx.cfg;
  const MpnnWeights w = MpnnWeights::Load(Need(c.model, "--model"));
  const GraphData graph = GraphData::Load(Need(c.graph, "--graph"));
  PrintOutput(ctx.out, PlaintextInfer(graph, w, c.ring));
  ctx.out << "float";
  for (double x : FloatInfer(graph, w)) ctx.out << " " << x;
  ctx.out << "\n";
  return 0;
}

int CmdSplit(Context& ctx) {
  const CliConfig& c = ctx.cfg;
  const GraphData graph = GraphData::Load(Need(c.graph, "--graph"));
  const auto [a, b] = SplitGraph(graph, c.ring, DeriveSeed(c.seed, "split"));
  fs::create_directories(c.out);
  const std::string p0 = (fs::path(c.out) / "client.shares").string();
  const std::string p1 = (fs::path(c.out) / "server.shares").string();
  a.Save(p0);
  b.Save(p1);
  ctx.out << "wrote " << p0 << " and " << p1 << "\n";
  return 0;
}

// Random weights for a default architecture; the feature width follows
// --graph when given.
int CmdGenModel(Context& ctx) {
  const CliConfig& c = ctx.cfg;
  MpnnConfig arch;
  if (!c.graph.empty()) {
    const GraphData g = GraphData::Load(c.graph);
    arch.m = g.m;
    arch.edge_dim = g.edge_dim;
  }
  const std::string path = c.model.empty() ? (fs::path(c.out) / "model.json").string() : c.model;
  WriteText(path, MpnnWeights::Random(arch, c.seed).ToJson());
  ctx.out << "wrote " << path << "\n";
  return 0;
}

// --- self-test ------------------------------------------------------------------------

struct SuiteResult {
  std::string name;
  std::uint64_t passed = 0, total = 0;
  std::string detail;
  bool ok() const { return passed == total && total > 0; }
};

double ChiSquareP(const std::vector<std::uint64_t>& counts) {
  double total = 0;
  for (auto v : counts) total += static_cast<double>(v);
  const double expected = total / counts.size();
  double stat = 0;
  for (auto v : counts) stat += (v - expected) * (v - expected) / expected;
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

struct SharedPair {
  Words x0, x1;
  const Words& of(const Session& s) const { return s.is_client() ? x0 : x1; }
};

SharedPair ShareAll(const Words& x, const RingParams& ring, Rng& rng) {
  auto [a, b] = ShareVector(x, rng, ring);
  return {std::move(a), std::move(b)};
}

SuiteResult SuiteDcf(std::uint64_t seed) {
  SuiteResult r{"dcf in_bits=10 exhaustive", 0, 0, {}};
  Rng rng(seed, "selftest-dcf");
  SecurityParams sec;
  Prg prg(sec);
  for (int trial = 0; trial < 32; ++trial) {
    const Word alpha = rng.Bits(10), beta = rng.Bits(10);
    const auto [k0, k1] = GenDcf(sec, alpha, beta, 10, 10, rng);
    for (Word x = 0; x < 1024; ++x) {
      const Word sum = (EvalDcf(k0, x, prg) + EvalDcf(k1, x, prg)) & 1023;
      r.passed += sum == (x < alpha ? beta : 0);
      ++r.total;
    }
  }
  return r;
}

SuiteResult SuiteDrelu(std::uint64_t seed) {
  SuiteResult r{"sdrelu l=8 exhaustive", 0, 0, {}};
  const RingParams ring{8, 2};
  Rng rng(seed, "selftest-drelu");
  Words x(256);
  for (Word v = 0; v < 256; ++v) x[v] = v;
  for (int bundle = 0; bundle < 100; ++bundle) {
    const SharedPair sx = ShareAll(x, ring, rng);
    TwoPartyOptions opt;
    opt.dealer_seed = rng.NextU64();
    const auto run = RunTwoParty(ring, [&](Session& s) { return SDRelu(s, sx.of(s)); }, opt);
    for (Word v = 0; v < 256; ++v) {
      r.passed += (run.client[v] ^ run.server[v]) == (v < 128 ? 1 : 0);
      ++r.total;
    }
  }
  return r;
}

SuiteResult SuiteOracles(std::uint64_t seed) {
  SuiteResult r{"l=8 protocol oracles", 0, 0, {}};
  const RingParams ring{8, 2};
  Rng rng(seed, "selftest-oracles");
  auto check = [&](const Words& got0, const Words& got1, const Words& want) {
    const Words got = Add(got0, got1, ring);
    for (std::size_t i = 0; i < want.size(); ++i) {
      r.passed += got[i] == want[i];
      ++r.total;
    }
  };
  // Elementwise products over every pair of ring elements.
  Words a(65536), b(65536);
  for (Word i = 0; i < 65536; ++i) {
    a[i] = i & 255;
    b[i] = i >> 8;
  }
  const Words ab = Hadamard(a, b, ring);
  const SharedPair sa = ShareAll(a, ring, rng), sb = ShareAll(b, ring, rng);
  auto ele = RunTwoParty(ring, [&](Session& s) {
    return SEleMul(s, sa.of(s), s.is_server() ? std::span<const Word>(b) : std::span<const Word>());
  });
  check(ele.client, ele.server, ab);
  auto shared = RunTwoParty(ring, [&](Session& s) { return SSharedMul(s, sa.of(s), sb.of(s)); });
  check(shared.client, shared.server, ab);

  // Matrix products on random shapes.
  for (int trial = 0; trial < 20; ++trial) {
    const MatShape shape{1 + rng.Bits(3), 1 + rng.Bits(3), 1 + rng.Bits(3)};
    const Words x = UniformVector(shape.m1 * shape.m2, rng, ring);
    const Words y = UniformVector(shape.m2 * shape.m3, rng, ring);
    const SharedPair sx = ShareAll(x, ring, rng);
    auto mm = RunTwoParty(ring, [&](Session& s) {
      return SMatMul(s, sx.of(s), s.is_server() ? std::span<const Word>(y) : std::span<const Word>(),
                     shape);
    });
    check(mm.client, mm.server, MatMul(x, y, shape.m1, shape.m2, shape.m3, ring));
  }

  // Quadratics on every input with random per-element coefficients.
  Words x(256);
  for (Word v = 0; v < 256; ++v) x[v] = v;
  const SharedPair sx = ShareAll(x, ring, rng);
  const QuadCoeffs q{UniformVector(256, rng, ring), UniformVector(256, rng, ring),
                     UniformVector(256, rng, ring)};
  auto sq = RunTwoParty(ring, [&](Session& s) {
    return SQuaPol(s, sx.of(s), s.is_server() ? q : QuadCoeffs{{0}, {0}, {0}});
  });
  Words want(256);
  for (Word v = 0; v < 256; ++v) {
    want[v] = ring.Reduce(q.p2[v] * v * v + q.p1[v] * v + q.p0[v]);
  }
  check(sq.client, sq.server, want);

  // Bit times arithmetic on every input and both bit values.
  Words xx(512);
  Bits bits(512), b0(512), b1(512);
  for (Word i = 0; i < 512; ++i) {
    xx[i] = i & 255;
    bits[i] = static_cast<std::uint8_t>(i >> 8);
    b0[i] = rng.NextBit();
    b1[i] = b0[i] ^ bits[i];
  }
  const SharedPair sxx = ShareAll(xx, ring, rng);
  auto bx = RunTwoParty(ring, [&](Session& s) {
    return SBitXa(s, s.is_client() ? b0 : b1, sxx.of(s));
  });
  Words wbx(512);
  for (Word i = 0; i < 512; ++i) wbx[i] = bits[i] ? xx[i] : 0;
  check(bx.client, bx.server, wbx);

  // Exact truncation for every |x| < 2^(l-2).
  Words small;
  for (int v = -63; v <= 63; ++v) small.push_back(FromSigned(v, ring));
  const SharedPair ss = ShareAll(small, ring, rng);
  for (int shift = 1; shift <= 4; ++shift) {
    auto tr = RunTwoParty(ring, [&](Session& s) { return TruncateExact(s, ss.of(s), shift); });
    Words wt;
    for (Word v : small) wt.push_back(ArithShift(v, shift, ring));
    check(tr.client, tr.server, wt);
  }
  return r;
}

// The server's opened DReLU message for a fixed input, over fresh dealer and
// party randomness, for two different inputs.
SuiteResult SuiteUniformity(std::uint64_t seed) {
  SuiteResult r{"masked-message uniformity l=8", 0, 0, {}};
  const RingParams ring{8, 2};
  Rng rng(seed, "selftest-uniform");
  for (Word input : {Word{5}, Word{200}}) {
    std::vector<std::uint64_t> hist(256, 0);
    for (int run_i = 0; run_i < 10000; ++run_i) {
      const SharedPair sx = ShareAll({input}, ring, rng);
      TwoPartyOptions opt;
      opt.transcript = true;
      opt.dealer_seed = rng.NextU64();
      opt.client_seed = rng.NextU64();
      opt.server_seed = rng.NextU64();
      const auto run = RunTwoParty(ring, [&](Session& s) { return SDRelu(s, sx.of(s)); }, opt);
      for (const Frame& f : run.client_transcript.Received()) {
        for (std::uint8_t byte : f.payload) ++hist[byte];
      }
    }
    const double p = ChiSquareP(hist);
    r.passed += p > 1e-3;
    ++r.total;
    r.detail += "x=" + std::to_string(input) + " p=" + std::to_string(p) + " ";
  }
  return r;
}

SuiteResult SuiteSpline() {
  SuiteResult r{"spline fit k=12 on [-6, 6]", 0, 0, {}};
  for (SplineTarget t : {SplineTarget::kSigmoid, SplineTarget::kTanh}) {
    const PiecewisePoly p = FitSpline(t, 12, -6, 6);
    r.passed += p.max_error < 0.01;
    ++r.total;
    r.detail += std::string(SplineTargetName(t)) + " " + std::to_string(p.max_error) + " ";
  }
  return r;
}

SuiteResult SuiteMpnn(std::uint64_t seed) {
  SuiteResult r{"secure mpnn equals plaintext", 0, 0, {}};
  const RingParams ring{32, 8};
  MpnnConfig cfg;
  cfg.hidden = 6;
  cfg.steps = 2;
  Rng rng(seed, "selftest-mpnn");
  for (int trial = 0; trial < 3; ++trial) {
    GraphData d = GraphData::Empty(4, cfg.m);
    for (std::size_t u = 0; u < 4; ++u) {
      for (std::size_t v = u + 1; v < 4; ++v) {
        if (rng.NextBit()) d.AddEdge(u, v, {rng.Uniform(0, 1)});
      }
    }
    for (double& f : d.features) f = rng.Uniform(-1, 1);
    const MpnnWeights w = MpnnWeights::Random(cfg, rng.NextU64());
    const EncodedMpnn model = EncodedMpnn::Encode(w, ring);
    const auto [c, sv] = SplitGraph(d, ring, rng.NextU64());
    auto run = RunTwoParty(ring, [&](Session& s) {
      return SecureForward(s, s.is_client() ? c : sv, s.is_client() ? model.Public() : model);
    });
    const Words got = Add(run.client, run.server, ring);
    r.passed += got == PlaintextForward(EncodeGraph(d, ring), model);
    ++r.total;
  }
  return r;
}

int CmdSelftest(Context& ctx) {
  const CliConfig& c = ctx.cfg;
  if (!c.bundle.empty()) {
    const DealerBundle b = DealerBundle::Load(c.bundle);
    ctx.out << "bundle " << c.bundle << ": " << b.Available().ToString() << "\n";
  }
  const std::vector<std::function<SuiteResult()>> suites = {
      [&] { return SuiteDcf(c.seed); },        [&] { return SuiteDrelu(c.seed); },
      [&] { return SuiteOracles(c.seed); },    [&] { return SuiteUniformity(c.seed); },
      [] { return SuiteSpline(); },            [&] { return SuiteMpnn(c.seed); },
  };
  bool all = true;
  for (const auto& suite : suites) {
    const auto start = std::chrono::steady_clock::now();
    const SuiteResult r = suite();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ctx.out << (r.ok() ? "PASS " : "FAIL ") << r.name << ": " << r.passed << "/" << r.total;
    if (!r.detail.empty()) ctx.out << " (" << r.detail << ")";
    ctx.out << " [" << secs << " s]\n";
    all = all && r.ok();
  }
  return all ? 0 : static_cast<int>(ExitCode::kVerification);
}

// --- argument parsing -----------------------------------------------------------------

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> ring, frac, kappa, timeout_ms;
  std::optional<std::uint32_t> session;
  std::optional<std::string> listen, connect, bundle, model, graph, protocol, report, out, trunc;
  std::optional<std::size_t> scale, nodes;
};

void AddFlags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file");
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--ring", f.ring, "ring width l (8, 16, 32, 64)");
  app->add_option("--frac", f.frac, "fixed-point fraction bits f");
  app->add_option("--kappa", f.kappa, "DCF seed bits (64 or 128)");
  app->add_option("--session", f.session, "session id");
  app->add_option("--listen", f.listen, "host:port to listen on");
  app->add_option("--connect", f.connect, "host:port to connect to");
  app->add_option("--bundle", f.bundle, "dealer bundle file (directory for loopback)");
  app->add_option("--model", f.model, "MPNN model file");
  app->add_option("--graph", f.graph, "graph file");
  app->add_option("--nodes", f.nodes, "public node count");
  app->add_option("--protocol", f.protocol, "bench protocol or 'all'");
  app->add_option("--scale", f.scale, "bench batch size (matrix side for smatmul)");
  app->add_option("--report", f.report, "report path (.json or .csv)");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--trunc", f.trunc, "truncation: exact or local");
  app->add_option("--timeout-ms", f.timeout_ms, "network timeout");
}

CliConfig Resolve(const Flags& f) {
  CliConfig c = f.config.empty() ? CliConfig{} : CliConfig::Load(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.ring) c.ring.bits = *f.ring;
  if (f.frac) c.ring.frac = *f.frac;
  if (f.kappa) c.sec.kappa = *f.kappa;
  if (f.session) c.session = *f.session;
  if (f.timeout_ms) c.timeout_ms = *f.timeout_ms;
  if (f.listen) c.listen = *f.listen;
  if (f.connect) c.connect = *f.connect;
  if (f.bundle) c.bundle = *f.bundle;
  if (f.model) c.model = *f.model;
  if (f.graph) c.graph = *f.graph;
  if (f.nodes) c.nodes = *f.nodes;
  if (f.protocol) c.protocol = *f.protocol;
  if (f.scale) c.scale = *f.scale;
  if (f.report) c.report = *f.report;
  if (f.out) c.out = *f.out;
  if (f.trunc) c.mode = ParseTruncMode(*f.trunc);
  c.Validate();
  return c;
}

std::shared_ptr<spdlog::logger> MakeLogger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto log = std::make_shared<spdlog::logger>("ssinfer", sink);
  log->set_pattern("[%l] %v");
  log->set_level(spdlog::level::warn);
  if (const char* env = std::getenv("PGNN_LOG")) {
    log->set_level(spdlog::level::from_str(env));
  }
  return log;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Secret-shared GNN inference"};
  app.require_subcommand(1);
  Flags flags;
  using Handler = int (*)(Context&);
  const std::pair<const char*, std::pair<const char*, Handler>> commands[] = {
      {"dealer", {"generate client and server bundles", CmdDealer}},
      {"server", {"run the model owner over TCP", CmdServer}},
      {"client", {"run the data owner over TCP", CmdClient}},
      {"loopback", {"run both parties in one process", CmdLoopback}},
      {"bench", {"meter protocols against the cost model", CmdBench}},
      {"selftest", {"run exhaustive and statistical checks", CmdSelftest}},
      {"oracle", {"plaintext fixed-point and float inference", CmdOracle}},
      {"split", {"write additive shares of a graph", CmdSplit}},
      {"genmodel", {"write a randomly initialized MPNN model", CmdGenModel}},
  };
  for (const auto& [name, info] : commands) AddFlags(app.add_subcommand(name, info.first), flags);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : static_cast<int>(ExitCode::kConfig);
  }
  auto log = MakeLogger(err);
  try {
    Context ctx{Resolve(flags), out, log};
    for (const auto& [name, info] : commands) {
      if (app.got_subcommand(name)) return info.second(ctx);
    }
  } catch (const Error& e) {
    log->error("{}", e.what());
    return static_cast<int>(ExitCodeFor(e.kind()));
  } catch (const std::exception& e) {
    log->error("{}", e.what());
    return static_cast<int>(ExitCode::kFailure);
  }
  return static_cast<int>(ExitCode::kFailure);
}

}  // namespace ssinfer
