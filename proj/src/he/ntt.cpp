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

#include "rangepir/he/ntt.hpp"

#include <bit>

#include "rangepir/common/error.hpp"
#include "rangepir/he/modarith.hpp"

namespace rangepir::he {

uint32_t BitReverse(uint32_t x, size_t bits) {
  uint32_t r = 0;
  for (size_t i = 0; i < bits; ++i) {
    r = (r << 1) | (x & 1);
    x >>= 1;
  }
  return r;
}

NttTables::NttTables(uint64_t q_in, size_t n_in) : q(q_in), n(n_in) {
  Require(std::has_single_bit(n) && n >= 2, ErrorCode::kInvalidArgument,
          "transform length must be a power of two");
  Require(q % (2 * n) == 1, ErrorCode::kInvalidArgument, "q must be 1 mod 2n");
  Require(q < (uint64_t{1} << 50), ErrorCode::kInvalidArgument, "q must be below 2^50");
  log_n = static_cast<size_t>(std::countr_zero(n));

  psi = 0;
  for (uint64_t x = 2; psi == 0; ++x) {
    const uint64_t cand = PowMod(x, (q - 1) / (2 * n), q);
    if (PowMod(cand, n, q) == q - 1) psi = cand;
  }
  const uint64_t psi_inv = InvMod(psi, q);

  fwd.resize(n);
  inv.resize(n);
  fwd_shoup.resize(n);
  inv_shoup.resize(n);
  std::vector<uint64_t> pow_psi(n), pow_psi_inv(n);
  pow_psi[0] = pow_psi_inv[0] = 1;
  for (size_t i = 1; i < n; ++i) {
    pow_psi[i] = MulMod(pow_psi[i - 1], psi, q);
    pow_psi_inv[i] = MulMod(pow_psi_inv[i - 1], psi_inv, q);
  }
  for (size_t i = 0; i < n; ++i) {
    const uint32_t r = BitReverse(static_cast<uint32_t>(i), log_n);
    fwd[i] = pow_psi[r];
    inv[i] = pow_psi_inv[r];
    fwd_shoup[i] = Shoup52(fwd[i], q);
    inv_shoup[i] = Shoup52(inv[i], q);
  }
  n_inv = InvMod(n % q, q);
  n_inv_shoup = Shoup52(n_inv, q);

  if (n >= 16) {
    for (size_t s = 0; s < 3; ++s) {
      const size_t t = size_t{4} >> s;
      const size_t groups = n / (2 * t);
      const size_t per_block = 16 / (2 * t);
      for (auto* v : {&fwd_lane[s], &fwd_lane_shoup[s], &inv_lane[s], &inv_lane_shoup[s]}) {
        v->resize(n / 2);
      }
      for (size_t b = 0; b < n / 16; ++b) {
        for (size_t lane = 0; lane < 8; ++lane) {
          const size_t k = groups + b * per_block + lane / t;
          fwd_lane[s][b * 8 + lane] = fwd[k];
          fwd_lane_shoup[s][b * 8 + lane] = fwd_shoup[k];
          inv_lane[s][b * 8 + lane] = inv[k];
          inv_lane_shoup[s][b * 8 + lane] = inv_shoup[k];
        }
      }
    }
  }
}

void NttForwardReference(uint64_t* a, const NttTables& tb) {
  const uint64_t q = tb.q;
  const uint64_t two_q = 2 * q;
  size_t t = tb.n;
  for (size_t m = 1; m < tb.n; m <<= 1) {
    t >>= 1;
    for (size_t i = 0; i < m; ++i) {
      const uint64_t w = tb.fwd[m + i];
      const uint64_t ws = tb.fwd_shoup[m + i];
      uint64_t* x = a + 2 * i * t;
      uint64_t* y = x + t;
      for (size_t j = 0; j < t; ++j) {
        uint64_t u = x[j];
        if (u >= two_q) u -= two_q;
        const uint64_t v = MulShoupLazy(y[j], w, ws, q);
        x[j] = u + v;
        y[j] = u - v + two_q;
      }
    }
  }
  for (size_t i = 0; i < tb.n; ++i) {
    uint64_t v = a[i];
    if (v >= two_q) v -= two_q;
    if (v >= q) v -= q;
    a[i] = v;
  }
}

void NttInverseReference(uint64_t* a, const NttTables& tb) {
  const uint64_t q = tb.q;
  const uint64_t two_q = 2 * q;
  size_t t = 1;
  for (size_t m = tb.n; m > 1; m >>= 1) {
    const size_t h = m >> 1;
    for (size_t i = 0; i < h; ++i) {
      const uint64_t w = tb.inv[h + i];
      const uint64_t ws = tb.inv_shoup[h + i];
      uint64_t* x = a + 2 * i * t;
      uint64_t* y = x + t;
      for (size_t j = 0; j < t; ++j) {
        const uint64_t u = x[j];
        const uint64_t v = y[j];
        uint64_t s = u + v;
        if (s >= two_q) s -= two_q;
        x[j] = s;
        y[j] = MulShoupLazy(u - v + two_q, w, ws, q);
      }
    }
    t <<= 1;
  }
  for (size_t i = 0; i < tb.n; ++i) {
    a[i] = MulShoup(a[i], tb.n_inv, tb.n_inv_shoup, q);
  }
}

}  // namespace rangepir::he
