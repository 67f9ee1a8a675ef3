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

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rangepir/common/bytes.hpp"
#include "rangepir/store/dataset.hpp"

namespace rangepir::tools {

// "N,DIST,SEED", e.g. "1048576,uniform,7".
inline store::KvStore GenerateFromArg(const std::string& arg, size_t value_bytes) {
  std::stringstream in(arg);
  std::string n, dist, seed;
  if (!std::getline(in, n, ',') || !std::getline(in, dist, ',') || !std::getline(in, seed)) {
    Fail(ErrorCode::kInvalidArgument, "--gen expects N,DIST,SEED");
  }
  return store::GenerateDataset(std::stoull(n), store::ParseDistribution(dist), value_bytes,
                                std::stoull(seed));
}

inline std::string ToHex(std::span<const uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 15]);
  }
  return out;
}

inline Bytes FromHex(const std::string& hex) {
  Require(hex.size() % 2 == 0, ErrorCode::kInvalidArgument, "hex string of odd length");
  Bytes out;
  for (size_t i = 0; i < hex.size(); i += 2) {
    out.push_back(static_cast<uint8_t>(std::stoul(hex.substr(i, 2), nullptr, 16)));
  }
  return out;
}

// Runs body, printing library errors as "error: ..." with exit status 1.
template <typename F>
int Guarded(F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace rangepir::tools
