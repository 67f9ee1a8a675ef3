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

#include <cstdlib>

#include "rangepir/he/kernels.hpp"
#include "rangepir/he/modarith.hpp"

namespace rangepir::he {
namespace {

void MulShoupScalar(uint64_t* out, const uint64_t* a, const uint64_t* w, const uint64_t* ws,
                    size_t n, uint64_t q) {
  for (size_t i = 0; i < n; ++i) out[i] = MulShoup(a[i], w[i], ws[i], q);
}

void MulShoupAccScalar(uint64_t* acc, const uint64_t* a, const uint64_t* w,
                       const uint64_t* ws, size_t n, uint64_t q) {
  for (size_t i = 0; i < n; ++i) acc[i] += MulShoupLazy(a[i], w[i], ws[i], q);
}

void AddModScalar(uint64_t* out, const uint64_t* a, const uint64_t* b, size_t n, uint64_t q) {
  for (size_t i = 0; i < n; ++i) out[i] = AddMod(a[i], b[i], q);
}

void SubModScalar(uint64_t* out, const uint64_t* a, const uint64_t* b, size_t n, uint64_t q) {
  for (size_t i = 0; i < n; ++i) out[i] = SubMod(a[i], b[i], q);
}

void Reduce16qScalar(uint64_t* a, size_t n, uint64_t q) {
  for (size_t i = 0; i < n; ++i) {
    uint64_t v = a[i];
    for (uint64_t k : {8 * q, 4 * q, 2 * q, q}) {
      if (v >= k) v -= k;
    }
    a[i] = v;
  }
}

void PermuteScalar(uint64_t* out, const uint64_t* in, const uint32_t* idx, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = in[idx[i]];
}

void DecomposeScalar(uint64_t* out, const uint64_t* src, size_t n, uint64_t q_src,
                     uint32_t log_b, size_t digits, const uint64_t* targets,
                     size_t target_count) {
  const int64_t mask = (int64_t{1} << log_b) - 1;
  const int64_t half = int64_t{1} << (log_b - 1);
  const int64_t q = static_cast<int64_t>(q_src);
  for (size_t c = 0; c < n; ++c) {
    int64_t v = static_cast<int64_t>(src[c]);
    if (v > q / 2) v -= q;
    for (size_t j = 0; j < digits; ++j) {
      int64_t dig = v;
      if (j + 1 < digits) {
        dig = v & mask;
        if (dig > half) dig -= mask + 1;
        v = (v - dig) >> log_b;
      }
      for (size_t k = 0; k < target_count; ++k) {
        out[(j * target_count + k) * n + c] =
            static_cast<uint64_t>(dig) + (dig < 0 ? targets[k] : 0);
      }
    }
  }
}

}  // namespace

const KernelSet& ScalarKernels() {
  static const KernelSet kSet{
      "scalar",        NttForwardReference, NttInverseReference, MulShoupScalar,
      MulShoupAccScalar, AddModScalar,      SubModScalar,        Reduce16qScalar,
      PermuteScalar,   DecomposeScalar,
  };
  return kSet;
}

const KernelSet& ActiveKernels() {
  static const KernelSet* active = [] {
    const char* force = std::getenv("RANGEPIR_FORCE_SCALAR");
    if (force != nullptr && *force != '\0' && *force != '0') return &ScalarKernels();
    const KernelSet* simd = SimdKernels();
    return simd != nullptr ? simd : &ScalarKernels();
  }();
  return *active;
}

#ifndef RANGEPIR_HAVE_IFMA
const KernelSet* SimdKernels() { return nullptr; }
#endif

}  // namespace rangepir::he
