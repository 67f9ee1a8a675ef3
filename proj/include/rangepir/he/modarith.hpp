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

namespace rangepir::he {

using u128 = unsigned __int128;

inline uint64_t MulMod(uint64_t a, uint64_t b, uint64_t m) {
  return static_cast<uint64_t>(static_cast<u128>(a) * b % m);
}

inline uint64_t AddMod(uint64_t a, uint64_t b, uint64_t m) {
  const uint64_t s = a + b;
  return s >= m ? s - m : s;
}

inline uint64_t SubMod(uint64_t a, uint64_t b, uint64_t m) {
  return a >= b ? a - b : a + m - b;
}

inline uint64_t PowMod(uint64_t base, uint64_t exp, uint64_t m) {
  uint64_t result = 1 % m;
  base %= m;
  while (exp) {
    if (exp & 1) result = MulMod(result, base, m);
    base = MulMod(base, base, m);
    exp >>= 1;
  }
  return result;
}

// m prime.
inline uint64_t InvMod(uint64_t a, uint64_t m) { return PowMod(a, m - 2, m); }

// Deterministic Miller-Rabin for 64-bit inputs.
bool IsPrime(uint64_t n);

// Shoup companion for a fixed multiplicand w < q < 2^50:
// floor(w * 2^52 / q).
inline uint64_t Shoup52(uint64_t w, uint64_t q) {
  return static_cast<uint64_t>((static_cast<u128>(w) << 52) / q);
}

inline constexpr uint64_t kMask52 = (uint64_t{1} << 52) - 1;

// Lazy Shoup product: y * w mod q in [0, 2q), for y < 2^52 and q < 2^50.
// Computed on 52-bit halves so the SIMD variant yields identical words.
inline uint64_t MulShoupLazy(uint64_t y, uint64_t w, uint64_t w_shoup, uint64_t q) {
  const uint64_t quot = static_cast<uint64_t>((static_cast<u128>(y) * w_shoup) >> 52);
  const uint64_t lo = static_cast<uint64_t>(static_cast<u128>(y) * w) & kMask52;
  const uint64_t qq = static_cast<uint64_t>(static_cast<u128>(quot) * q) & kMask52;
  return (lo - qq) & kMask52;
}

inline uint64_t MulShoup(uint64_t y, uint64_t w, uint64_t w_shoup, uint64_t q) {
  const uint64_t r = MulShoupLazy(y, w, w_shoup, q);
  return r >= q ? r - q : r;
}

}  // namespace rangepir::he
