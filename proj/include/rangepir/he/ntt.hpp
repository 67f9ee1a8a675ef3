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
#include <vector>

namespace rangepir::he {

// Twiddle tables for the negacyclic transform of length n modulo q.
//
// Forward output order: entry i holds the evaluation at psi^(2*br(i)+1),
// where br reverses log2(n) bits and psi is a primitive 2n-th root of unity.
struct NttTables {
  NttTables(uint64_t q, size_t n);

  uint64_t q;
  size_t n;
  size_t log_n;
  uint64_t psi;

  // psi^br(k) and psi^-br(k), with 52-bit Shoup companions.
  std::vector<uint64_t> fwd, fwd_shoup;
  std::vector<uint64_t> inv, inv_shoup;
  uint64_t n_inv, n_inv_shoup;

  // Per-lane twiddles for the three innermost forward stages and the three
  // outermost inverse stages (stride 4, 2, 1), laid out 8 words per vector
  // of 16 inputs. Consumed by the 8-lane kernels.
  std::vector<uint64_t> fwd_lane[3], fwd_lane_shoup[3];
  std::vector<uint64_t> inv_lane[3], inv_lane_shoup[3];
};

// Bit reversal of the low `bits` bits.
uint32_t BitReverse(uint32_t x, size_t bits);

// Reference transforms (scalar, no dispatch). Inputs in [0, q), outputs in
// [0, q).
void NttForwardReference(uint64_t* a, const NttTables& t);
void NttInverseReference(uint64_t* a, const NttTables& t);

}  // namespace rangepir::he
