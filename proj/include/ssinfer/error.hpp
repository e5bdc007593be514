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

#ifndef SSINFER_ERROR_HPP_
#define SSINFER_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace ssinfer {

// Every failure raised by the library carries one of these kinds. The CLI maps
// them onto distinct exit codes.
enum class ErrorKind {
  kConfig,          // bad parameters, unsupported layer, overflow budget
  kOverflow,        // fixed-point encode out of range
  kShape,           // shape or geometry mismatch
  kPartyMismatch,   // shares from the wrong parties
  kClosed,          // channel closed by peer
  kTimeout,         // recv deadline expired (peer skipped a step)
  kDesync,          // unexpected tag, session id or payload length
  kHandshake,       // handshake mismatch
  kExhaustion,      // dealer bundle ran out of material
  kIntegrity,       // corrupted bundle / share file
  kIo,              // file or socket error
  kVerification,    // self-test or oracle comparison failed
};

const char* ToString(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(ToString(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void Require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

}  // namespace ssinfer

#endif  // SSINFER_ERROR_HPP_
