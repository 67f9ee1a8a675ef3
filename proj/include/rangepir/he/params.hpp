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

#include <array>
#include <cstdint>
#include <vector>

namespace rangepir::he {

// Pinned moduli for N = 4096. p is the smallest prime >= 2^20 with
// p = 1 mod 2N. The ciphertext modulus is the product of the two largest
// primes below 2^48 with q_i = 1 mod 2N.
inline constexpr size_t kDefaultRingDegree = 4096;
inline constexpr uint64_t kDefaultPlainModulus = 1073153;
inline constexpr std::array<uint64_t, 2> kDefaultCipherPrimes = {281474976694273ull,
                                                                 281474976636929ull};
inline constexpr double kDefaultNoiseStddev = 3.2;
inline constexpr uint32_t kDefaultDecompLog = 16;

struct HeParams {
  size_t ring_degree = kDefaultRingDegree;
  uint64_t plain_modulus = kDefaultPlainModulus;
  std::vector<uint64_t> cipher_primes{kDefaultCipherPrimes.begin(),
                                      kDefaultCipherPrimes.end()};
  double noise_stddev = kDefaultNoiseStddev;
  uint32_t decomp_log = kDefaultDecompLog;

  size_t log_degree() const;
  // floor(log2 p): payload bits per plaintext coefficient.
  uint32_t limb_bits() const;
  // Digits per prime in the key-switching decomposition.
  size_t digits_per_prime() const;
  size_t digit_count() const { return digits_per_prime() * cipher_primes.size(); }

  // Throws kInvalidArgument on any violated invariant.
  void validate() const;
  // Stable 64-bit fingerprint, carried in every serialized ciphertext.
  uint64_t hash() const;

  friend bool operator==(const HeParams&, const HeParams&) = default;
};

// Smallest prime >= lower_bound that is 1 mod modulus_step.
uint64_t FindPrimeAtLeast(uint64_t lower_bound, uint64_t modulus_step);
// Largest primes < upper_bound that are 1 mod modulus_step, descending.
std::vector<uint64_t> FindPrimesBelow(uint64_t upper_bound, uint64_t modulus_step, size_t count);

}  // namespace rangepir::he
