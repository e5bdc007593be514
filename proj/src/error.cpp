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

#include "ssinfer/error.hpp"

namespace ssinfer {

const char* ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kOverflow: return "overflow error";
    case ErrorKind::kShape: return "shape mismatch";
    case ErrorKind::kPartyMismatch: return "party mismatch";
    case ErrorKind::kClosed: return "channel closed";
    case ErrorKind::kTimeout: return "deadlock timeout";
    case ErrorKind::kDesync: return "protocol desynchronization";
    case ErrorKind::kHandshake: return "handshake mismatch";
    case ErrorKind::kExhaustion: return "bundle exhausted";
    case ErrorKind::kIntegrity: return "bundle integrity error";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kVerification: return "verification failed";
  }
  return "error";
}

}  // namespace ssinfer
