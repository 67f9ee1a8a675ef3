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

#include "rangepir/protocol/wire.hpp"

namespace rangepir::protocol {

struct CostInputs {
  double bandwidth = 0.0;  // bits per second
  double rtt = 0.0;        // seconds
  double c_fhe = 0.0;      // seconds per plaintext in the run
  uint64_t pair_bytes = 0;
  uint64_t query_ct_bytes = 0;
  uint64_t answer_ct_bytes = 0;
  uint64_t ring_degree = 0;
};

struct SchemeCosts {
  double plain = 0.0;
  double varpir = 0.0;
  Scheme choice = Scheme::kPlainDownload;
};

// plain  = w*pair_bytes*8 / bandwidth + rtt
// varpir = (query_ct_bytes*ceil(w_pt/N) + answer_ct_bytes)*8 / bandwidth + rtt + w_pt*c_fhe
// The cheaper wins; ties go to plain download.
SchemeCosts SelectScheme(uint64_t w, uint64_t w_pt, const CostInputs& in);

}  // namespace rangepir::protocol
