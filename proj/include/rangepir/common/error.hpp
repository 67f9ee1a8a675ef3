//
// Copyright 2026 The rangepir Authors
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
//

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rangepir {

// Codes travel on the wire inside ERROR frames; values are stable.
enum class ErrorCode : uint16_t {
  kInvalidArgument = 1,
  kNotFound = 2,
  kMalformed = 3,
  kStaleVersion = 4,
  kNoiseBudget = 5,
  kTransport = 6,
  kDuplicateExhaustion = 7,
  kVersionMismatch = 8,
  kConflict = 9,
  kInternal = 10,
};

const char* ToString(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ToString(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Require(bool condition, ErrorCode code, const char* message) {
  if (!condition) throw Error(code, message);
}

}  // namespace rangepir
