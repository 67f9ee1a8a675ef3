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

#include <cstddef>
#include <cstdint>

#include "rangepir/he/ntt.hpp"

namespace rangepir::he {

// Hot loops of the homomorphic layer. Every variant produces bit-identical
// output words for identical inputs (lazy intermediate ranges included).
struct KernelSet {
  const char* name;

  // In-place transforms; inputs and outputs in [0, q).
  void (*ntt_forward)(uint64_t* a, const NttTables& t);
  void (*ntt_inverse)(uint64_t* a, const NttTables& t);

  // out = a * w mod q in [0, q); w fixed with Shoup companion ws; a < 2^52.
  void (*mul_shoup)(uint64_t* out, const uint64_t* a, const uint64_t* w, const uint64_t* ws,
                    size_t n, uint64_t q);
  // acc += (a * w mod q) taken lazily in [0, 2q). No reduction of acc.
  void (*mul_shoup_acc)(uint64_t* acc, const uint64_t* a, const uint64_t* w,
                        const uint64_t* ws, size_t n, uint64_t q);
  // Inputs in [0, q).
  void (*add_mod)(uint64_t* out, const uint64_t* a, const uint64_t* b, size_t n, uint64_t q);
  void (*sub_mod)(uint64_t* out, const uint64_t* a, const uint64_t* b, size_t n, uint64_t q);
  // a < 16q reduced into [0, q).
  void (*reduce_16q)(uint64_t* a, size_t n, uint64_t q);
  // out[i] = in[idx[i]].
  void (*permute)(uint64_t* out, const uint64_t* in, const uint32_t* idx, size_t n);
  // Balanced base-2^log_b digits of the centered residues src (mod q_src),
  // least significant first; every digit but the last lies in
  // (-2^(log_b-1), 2^(log_b-1)]. Digit j reduced mod targets[k] goes to
  // out[(j * target_count + k) * n ...].
  void (*decompose)(uint64_t* out, const uint64_t* src, size_t n, uint64_t q_src,
                    uint32_t log_b, size_t digits, const uint64_t* targets,
                    size_t target_count);
};

const KernelSet& ScalarKernels();
// nullptr when the CPU or the build lacks AVX-512 IFMA.
const KernelSet* SimdKernels();
// SIMD when available unless RANGEPIR_FORCE_SCALAR is set in the
// environment; resolved once.
const KernelSet& ActiveKernels();

}  // namespace rangepir::he
