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

// Compiled with -mavx512f -mavx512ifma. Only reached after a runtime CPU
// check.
#include <immintrin.h>

#include "rangepir/he/kernels.hpp"
#include "rangepir/common/error.hpp"
#include "rangepir/he/modarith.hpp"

namespace rangepir::he {
namespace {

inline __m512i Mask52() { return _mm512_set1_epi64(static_cast<long long>(kMask52)); }

// y * w mod q in [0, 2q); y < 2^52.
inline __m512i ShoupLazy(__m512i y, __m512i w, __m512i ws, __m512i q) {
  const __m512i zero = _mm512_setzero_si512();
  const __m512i quot = _mm512_madd52hi_epu64(zero, y, ws);
  const __m512i lo = _mm512_madd52lo_epu64(zero, y, w);
  const __m512i qq = _mm512_madd52lo_epu64(zero, quot, q);
  return _mm512_and_si512(_mm512_sub_epi64(lo, qq), Mask52());
}

// x - k when x >= k, else x.
inline __m512i CondSub(__m512i x, __m512i k) {
  return _mm512_min_epu64(x, _mm512_sub_epi64(x, k));
}

inline __m512i Set1(uint64_t v) { return _mm512_set1_epi64(static_cast<long long>(v)); }

inline __m512i Load(const uint64_t* p) { return _mm512_loadu_si512(p); }
inline void Store(uint64_t* p, __m512i v) { _mm512_storeu_si512(p, v); }

struct LaneShuffle {
  __m512i to_x, to_y, to_a, to_b;
};

// Lane maps for butterflies of stride t within a 16-word block.
LaneShuffle MakeShuffle(size_t t) {
  alignas(64) uint64_t x[8], y[8], a[8], b[8];
  for (size_t lane = 0; lane < 8; ++lane) {
    const size_t e = (lane / t) * 2 * t + lane % t;
    x[lane] = e;
    y[lane] = e + t;
  }
  for (size_t p = 0; p < 16; ++p) {
    const size_t gi = p / (2 * t);
    const size_t o = p % (2 * t);
    const uint64_t src = o < t ? gi * t + o : 8 + gi * t + (o - t);
    (p < 8 ? a[p] : b[p - 8]) = src;
  }
  return {_mm512_load_si512(x), _mm512_load_si512(y), _mm512_load_si512(a),
          _mm512_load_si512(b)};
}

const LaneShuffle& ShuffleFor(size_t s) {
  static const LaneShuffle kShuffles[3] = {MakeShuffle(4), MakeShuffle(2), MakeShuffle(1)};
  return kShuffles[s];
}

void NttForwardIfma(uint64_t* a, const NttTables& tb) {
  if (tb.n < 16) {
    NttForwardReference(a, tb);
    return;
  }
  const __m512i q = Set1(tb.q);
  const __m512i two_q = Set1(2 * tb.q);
  size_t t = tb.n;
  size_t m = 1;
  for (; m < tb.n / 8; m <<= 1) {
    t >>= 1;
    for (size_t i = 0; i < m; ++i) {
      const __m512i w = Set1(tb.fwd[m + i]);
      const __m512i ws = Set1(tb.fwd_shoup[m + i]);
      uint64_t* x = a + 2 * i * t;
      uint64_t* y = x + t;
      for (size_t j = 0; j < t; j += 8) {
        const __m512i u = CondSub(Load(x + j), two_q);
        const __m512i v = ShoupLazy(Load(y + j), w, ws, q);
        Store(x + j, _mm512_add_epi64(u, v));
        Store(y + j, _mm512_add_epi64(_mm512_sub_epi64(u, v), two_q));
      }
    }
  }
  // Strides 4, 2, 1.
  for (size_t s = 0; s < 3; ++s) {
    const LaneShuffle& sh = ShuffleFor(s);
    const uint64_t* w_lane = tb.fwd_lane[s].data();
    const uint64_t* ws_lane = tb.fwd_lane_shoup[s].data();
    for (size_t blk = 0; blk < tb.n / 16; ++blk) {
      uint64_t* p = a + 16 * blk;
      const __m512i lo = Load(p);
      const __m512i hi = Load(p + 8);
      const __m512i xv = _mm512_permutex2var_epi64(lo, sh.to_x, hi);
      const __m512i yv = _mm512_permutex2var_epi64(lo, sh.to_y, hi);
      const __m512i u = CondSub(xv, two_q);
      const __m512i v = ShoupLazy(yv, Load(w_lane + 8 * blk), Load(ws_lane + 8 * blk), q);
      const __m512i nx = _mm512_add_epi64(u, v);
      const __m512i ny = _mm512_add_epi64(_mm512_sub_epi64(u, v), two_q);
      Store(p, _mm512_permutex2var_epi64(nx, sh.to_a, ny));
      Store(p + 8, _mm512_permutex2var_epi64(nx, sh.to_b, ny));
    }
  }
  for (size_t i = 0; i < tb.n; i += 8) {
    Store(a + i, CondSub(CondSub(Load(a + i), two_q), q));
  }
}

void NttInverseIfma(uint64_t* a, const NttTables& tb) {
  if (tb.n < 16) {
    NttInverseReference(a, tb);
    return;
  }
  const __m512i q = Set1(tb.q);
  const __m512i two_q = Set1(2 * tb.q);
  // Strides 1, 2, 4.
  for (size_t k = 0; k < 3; ++k) {
    const size_t s = 2 - k;
    const LaneShuffle& sh = ShuffleFor(s);
    const uint64_t* w_lane = tb.inv_lane[s].data();
    const uint64_t* ws_lane = tb.inv_lane_shoup[s].data();
    for (size_t blk = 0; blk < tb.n / 16; ++blk) {
      uint64_t* p = a + 16 * blk;
      const __m512i lo = Load(p);
      const __m512i hi = Load(p + 8);
      const __m512i u = _mm512_permutex2var_epi64(lo, sh.to_x, hi);
      const __m512i v = _mm512_permutex2var_epi64(lo, sh.to_y, hi);
      const __m512i nx = CondSub(_mm512_add_epi64(u, v), two_q);
      const __m512i ny = ShoupLazy(_mm512_add_epi64(_mm512_sub_epi64(u, v), two_q),
                                   Load(w_lane + 8 * blk), Load(ws_lane + 8 * blk), q);
      Store(p, _mm512_permutex2var_epi64(nx, sh.to_a, ny));
      Store(p + 8, _mm512_permutex2var_epi64(nx, sh.to_b, ny));
    }
  }
  size_t t = 8;
  for (size_t m = tb.n / 8; m > 1; m >>= 1) {
    const size_t h = m >> 1;
    for (size_t i = 0; i < h; ++i) {
      const __m512i w = Set1(tb.inv[h + i]);
      const __m512i ws = Set1(tb.inv_shoup[h + i]);
      uint64_t* x = a + 2 * i * t;
      uint64_t* y = x + t;
      for (size_t j = 0; j < t; j += 8) {
        const __m512i u = Load(x + j);
        const __m512i v = Load(y + j);
        Store(x + j, CondSub(_mm512_add_epi64(u, v), two_q));
        Store(y + j, ShoupLazy(_mm512_add_epi64(_mm512_sub_epi64(u, v), two_q), w, ws, q));
      }
    }
    t <<= 1;
  }
  const __m512i ni = Set1(tb.n_inv);
  const __m512i nis = Set1(tb.n_inv_shoup);
  for (size_t i = 0; i < tb.n; i += 8) {
    Store(a + i, CondSub(ShoupLazy(Load(a + i), ni, nis, q), q));
  }
}

void MulShoupIfma(uint64_t* out, const uint64_t* a, const uint64_t* w, const uint64_t* ws,
                  size_t n, uint64_t q_scalar) {
  const __m512i q = Set1(q_scalar);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    Store(out + i, CondSub(ShoupLazy(Load(a + i), Load(w + i), Load(ws + i), q), q));
  }
  for (; i < n; ++i) out[i] = MulShoup(a[i], w[i], ws[i], q_scalar);
}

void MulShoupAccIfma(uint64_t* acc, const uint64_t* a, const uint64_t* w, const uint64_t* ws,
                     size_t n, uint64_t q_scalar) {
  const __m512i q = Set1(q_scalar);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m512i prod = ShoupLazy(Load(a + i), Load(w + i), Load(ws + i), q);
    Store(acc + i, _mm512_add_epi64(Load(acc + i), prod));
  }
  for (; i < n; ++i) acc[i] += MulShoupLazy(a[i], w[i], ws[i], q_scalar);
}

void AddModIfma(uint64_t* out, const uint64_t* a, const uint64_t* b, size_t n,
                uint64_t q_scalar) {
  const __m512i q = Set1(q_scalar);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    Store(out + i, CondSub(_mm512_add_epi64(Load(a + i), Load(b + i)), q));
  }
  for (; i < n; ++i) out[i] = AddMod(a[i], b[i], q_scalar);
}

void SubModIfma(uint64_t* out, const uint64_t* a, const uint64_t* b, size_t n,
                uint64_t q_scalar) {
  const __m512i q = Set1(q_scalar);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m512i d = _mm512_sub_epi64(_mm512_add_epi64(Load(a + i), q), Load(b + i));
    Store(out + i, CondSub(d, q));
  }
  for (; i < n; ++i) out[i] = SubMod(a[i], b[i], q_scalar);
}

void Reduce16qIfma(uint64_t* a, size_t n, uint64_t q_scalar) {
  const __m512i q8 = Set1(8 * q_scalar), q4 = Set1(4 * q_scalar);
  const __m512i q2 = Set1(2 * q_scalar), q1 = Set1(q_scalar);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    Store(a + i, CondSub(CondSub(CondSub(CondSub(Load(a + i), q8), q4), q2), q1));
  }
  for (; i < n; ++i) {
    uint64_t v = a[i];
    for (uint64_t k : {8 * q_scalar, 4 * q_scalar, 2 * q_scalar, q_scalar}) {
      if (v >= k) v -= k;
    }
    a[i] = v;
  }
}

void PermuteIfma(uint64_t* out, const uint64_t* in, const uint32_t* idx, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i vi = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(idx + i));
    Store(out + i, _mm512_i32gather_epi64(vi, in, 8));
  }
  for (; i < n; ++i) out[i] = in[idx[i]];
}

void DecomposeIfma(uint64_t* out, const uint64_t* src, size_t n, uint64_t q_src,
                   uint32_t log_b, size_t digits, const uint64_t* targets,
                   size_t target_count) {
  const __m512i mask = Set1((uint64_t{1} << log_b) - 1);
  const __m512i half = Set1(uint64_t{1} << (log_b - 1));
  const __m512i base = Set1(uint64_t{1} << log_b);
  const __m512i q = Set1(q_src);
  const __m512i q_half = Set1(q_src / 2);
  const __m512i zero = _mm512_setzero_si512();
  Require(n % 8 == 0, ErrorCode::kInvalidArgument, "decompose needs n divisible by 8");
  for (size_t c = 0; c < n; c += 8) {
    __m512i v = Load(src + c);
    v = _mm512_mask_sub_epi64(v, _mm512_cmpgt_epi64_mask(v, q_half), v, q);
    for (size_t j = 0; j < digits; ++j) {
      __m512i dig = v;
      if (j + 1 < digits) {
        dig = _mm512_and_si512(v, mask);
        dig = _mm512_mask_sub_epi64(dig, _mm512_cmpgt_epi64_mask(dig, half), dig, base);
        v = _mm512_srai_epi64(_mm512_sub_epi64(v, dig), log_b);
      }
      const __mmask8 neg = _mm512_cmplt_epi64_mask(dig, zero);
      for (size_t k = 0; k < target_count; ++k) {
        const __m512i r = _mm512_mask_add_epi64(dig, neg, dig, Set1(targets[k]));
        Store(out + (j * target_count + k) * n + c, r);
      }
    }
  }
}

}  // namespace

const KernelSet* SimdKernels() {
  static const bool supported =
      __builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx512ifma");
  // Vector loops assume n is a multiple of 8; smaller rings stay scalar.
  static const KernelSet kSet{
      "avx512ifma", NttForwardIfma, NttInverseIfma, MulShoupIfma, MulShoupAccIfma,
      AddModIfma,   SubModIfma,     Reduce16qIfma,  PermuteIfma,     DecomposeIfma,
  };
  return supported ? &kSet : nullptr;
}

}  // namespace rangepir::he
