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

#include "rangepir/he/params.hpp"

#include <sodium.h>

#include <bit>
#include <cmath>

#include "rangepir/common/bytes.hpp"
#include "rangepir/he/modarith.hpp"

namespace rangepir::he {

bool IsPrime(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t small : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % small == 0) return n == small;
  }
  uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    uint64_t x = PowMod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = MulMod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

uint64_t FindPrimeAtLeast(uint64_t lower_bound, uint64_t modulus_step) {
  uint64_t c = lower_bound + (modulus_step - (lower_bound - 1) % modulus_step) % modulus_step;
  while (!IsPrime(c)) c += modulus_step;
  return c;
}

std::vector<uint64_t> FindPrimesBelow(uint64_t upper_bound, uint64_t modulus_step, size_t count) {
  std::vector<uint64_t> out;
  uint64_t c = (upper_bound - 2) / modulus_step * modulus_step + 1;
  while (out.size() < count && c > modulus_step) {
    if (IsPrime(c)) out.push_back(c);
    c -= modulus_step;
  }
  return out;
}

size_t HeParams::log_degree() const { return static_cast<size_t>(std::countr_zero(ring_degree)); }

uint32_t HeParams::limb_bits() const {
  return static_cast<uint32_t>(std::bit_width(plain_modulus) - 1);
}

size_t HeParams::digits_per_prime() const {
  size_t max_bits = 0;
  for (uint64_t q : cipher_primes) max_bits = std::max<size_t>(max_bits, std::bit_width(q));
  // Balanced digits of a centered residue (|r| <= q/2 < 2^(bits-1)).
  return (max_bits - 1 + decomp_log) / decomp_log;
}

void HeParams::validate() const {
  auto need = [](bool ok, const char* msg) { Require(ok, ErrorCode::kInvalidArgument, msg); };
  need(ring_degree >= 2 && std::has_single_bit(ring_degree), "ring degree must be a power of two");
  need(ring_degree <= (size_t{1} << 16), "ring degree too large");
  need(plain_modulus > 2 && IsPrime(plain_modulus), "plain modulus must be an odd prime");
  need(!cipher_primes.empty() && cipher_primes.size() <= 4, "need one to four cipher primes");
  for (size_t i = 0; i < cipher_primes.size(); ++i) {
    const uint64_t q = cipher_primes[i];
    need(q < (uint64_t{1} << 50), "cipher primes must be below 2^50");
    need(IsPrime(q), "cipher modulus component is not prime");
    need(q % (2 * ring_degree) == 1, "cipher primes must be 1 mod 2N");
    need(plain_modulus < q, "plain modulus must be below every cipher prime");
    for (size_t j = 0; j < i; ++j) need(cipher_primes[j] != q, "cipher primes must be distinct");
  }
  need(noise_stddev > 0.0 && noise_stddev < 64.0, "noise stddev out of range");
  need(decomp_log >= 4 && decomp_log <= 30, "decomp_log must be in [4, 30]");
}

uint64_t HeParams::hash() const {
  ByteWriter w;
  w.u64(ring_degree);
  w.u64(plain_modulus);
  w.u32(static_cast<uint32_t>(cipher_primes.size()));
  for (uint64_t q : cipher_primes) w.u64(q);
  w.f64(noise_stddev);
  w.u32(decomp_log);
  uint8_t digest[8];
  crypto_generichash(digest, sizeof digest, w.bytes().data(), w.size(), nullptr, 0);
  uint64_t h = 0;
  for (int i = 0; i < 8; ++i) h |= uint64_t{digest[i]} << (8 * i);
  return h;
}

}  // namespace rangepir::he
