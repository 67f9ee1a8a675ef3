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

#include "rangepir/protocol/cost_model.hpp"

namespace rangepir::protocol {

SchemeCosts SelectScheme(uint64_t w, uint64_t w_pt, const CostInputs& in) {
  Require(in.bandwidth > 0 && in.ring_degree > 0, ErrorCode::kInvalidArgument,
          "cost inputs need bandwidth and ring degree");
  SchemeCosts c;
  c.plain = static_cast<double>(w) * static_cast<double>(in.pair_bytes) * 8.0 / in.bandwidth +
            in.rtt;
  const uint64_t query_cts = (w_pt + in.ring_degree - 1) / in.ring_degree;
  const double varpir_bytes =
      static_cast<double>(in.query_ct_bytes) * static_cast<double>(query_cts) +
      static_cast<double>(in.answer_ct_bytes);
  c.varpir = varpir_bytes * 8.0 / in.bandwidth + in.rtt + static_cast<double>(w_pt) * in.c_fhe;
  c.choice = c.varpir < c.plain ? Scheme::kVarPir : Scheme::kPlainDownload;
  return c;
}

}  // namespace rangepir::protocol
