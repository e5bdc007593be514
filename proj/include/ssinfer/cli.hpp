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

// Command-line front end: dealer, server, client, loopback, bench, selftest,
// oracle and split subcommands over MPNN models.

#ifndef SSINFER_CLI_HPP_
#define SSINFER_CLI_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>

#include "ssinfer/error.hpp"
#include "ssinfer/fss.hpp"
#include "ssinfer/protocols.hpp"
#include "ssinfer/ring.hpp"

namespace ssinfer {

enum class ExitCode : int {
  kOk = 0,
  kFailure = 1,       // anything not listed below
  kConfig = 2,        // bad flags, config, model or graph files
  kHandshake = 3,
  kDesync = 4,        // unexpected frame, closed link or timeout
  kExhaustion = 5,
  kVerification = 6,  // self-test, oracle or cost mismatch
  kIntegrity = 7,     // corrupted bundle or share file
  kIo = 8,
};

ExitCode ExitCodeFor(ErrorKind kind);

// Effective settings: built-in defaults, then the JSON config file, then
// command-line flags.
//
// Config keys: "ring": {"bits", "frac"}, "kappa", "session", "seed", "trunc"
// ("exact" or "local"), "model", "graph", "bundle", "listen", "connect",
// "out", "nodes", "report", "protocol", "scale", "timeout_ms". Relative paths
// are resolved against the config file's directory.
struct CliConfig {
  RingParams ring;
  SecurityParams sec;
  std::uint32_t session = 1;
  std::uint64_t seed = 1;
  TruncMode mode = TruncMode::kExact;
  std::string model, graph, bundle, listen, connect, report;
  std::string out = ".";
  std::string protocol = "all";
  std::size_t nodes = 0;
  std::size_t scale = 1000;
  int timeout_ms = 60000;

  static CliConfig Load(const std::string& path);
  void Validate() const;
};

// Parses argv, runs one subcommand and returns its exit code. Errors are
// reported on `err`; results go to `out`.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ssinfer

#endif  // SSINFER_CLI_HPP_
