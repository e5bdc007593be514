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

// Closed-form communication costs per scalar invocation, and metered runs to
// check them against.
//
//   protocol   total bits           online bits
//   smatmul    2l                   l
//   squapol    9l                   2l
//   sdrelu     2(2l+1)              2l
//   spiepol    6kl + 2k - 4l - 2    4kl - 2l
//
// The remaining registry entries (selemul, sbitxa, secrelu, truncate) have
// costs derived from this implementation. The spiepol row counts only the
// comparison and polynomial traffic; the measured run also pays for 2k - 2
// bit-times-arithmetic products and one truncation, so its report carries a
// per-component breakdown instead of an exact-match flag.

#ifndef SSINFER_COSTMODEL_HPP_
#define SSINFER_COSTMODEL_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ssinfer/protocols.hpp"
#include "ssinfer/ring.hpp"

namespace ssinfer {

enum class CostProtocol : std::uint8_t {
  kSMatMul,
  kSEleMul,
  kSQuaPol,
  kSDRelu,
  kSBitXa,
  kSecRelu,
  kSPiePol,
  kTruncate,
};

const char* CostProtocolName(CostProtocol p);
// kConfig for names outside the registry.
CostProtocol ParseCostProtocol(std::string_view name);
const std::vector<CostProtocol>& AllCostProtocols();

struct AnalyticCost {
  std::uint64_t total_bits = 0;
  std::uint64_t online_bits = 0;
  std::uint64_t online_rounds = 0;
  bool tabulated = false;  // one of the four closed-form rows above
};

// k is the piece count (spiepol only). Raises kConfig on l outside
// [2, 64] or k < 2.
AnalyticCost AnalyticCostOf(CostProtocol p, int l, int k = 12);
AnalyticCost AnalyticCostOf(std::string_view name, int l, int k = 12);

struct CostComponent {
  std::string name;
  std::uint64_t per_scalar = 0;  // invocations per outer scalar
  std::uint64_t online_bits = 0;  // per outer scalar
};

// Online bits per outer scalar of each sub-protocol SPiePol runs.
std::vector<CostComponent> SPiePolBreakdown(int l, int k);

struct CostReport {
  CostProtocol protocol = CostProtocol::kSMatMul;
  RingParams ring;
  int k = 0;
  std::size_t scalars = 0;  // outer scalar invocations in the run
  std::string shape;        // e.g. "64x64x64" or "n=1000"

  AnalyticCost analytic;
  // Measured, per scalar, summed over both directions.
  double offline_bits = 0;
  double online_bits = 0;
  std::uint64_t client_online_bits = 0;  // totals per direction
  std::uint64_t server_online_bits = 0;
  std::uint64_t online_rounds = 0;
  std::uint64_t bundle_bytes = 0;  // dealer material, both parties
  double deal_seconds = 0, run_seconds = 0;

  double delta = 0;  // online_bits - analytic.online_bits
  bool exact_expected = false;
  std::vector<CostComponent> breakdown;
  std::string note;

  // Exact-match rows need delta == 0 and the analytic round count; other rows
  // need the measured online bits to equal their own derivation.
  bool Ok() const;
};

struct BenchOptions {
  std::size_t scale = 1000;  // scalars, or the matrix side for smatmul
  int k = 12;
  std::uint64_t seed = 1;
  TruncMode mode = TruncMode::kExact;
};

// Runs the protocol over a loopback pair with random shared inputs and fills
// a report.
CostReport Compare(CostProtocol p, const RingParams& ring, const BenchOptions& opt = {});

std::string FormatReports(const std::vector<CostReport>& reports);
std::string ReportsCsv(const std::vector<CostReport>& reports);
std::string ReportsJson(const std::vector<CostReport>& reports);
// Closed-form rows only, one line per protocol at ring width l.
std::string AnalyticTableCsv(int l, int k);

}  // namespace ssinfer

#endif  // SSINFER_COSTMODEL_HPP_
