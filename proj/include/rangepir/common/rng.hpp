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
#include <cstddef>
#include <cstdint>
#include <limits>

namespace rangepir {

// ChaCha20 keystream generator. Satisfies UniformRandomBitGenerator.
//
// Default construction seeds from the OS entropy pool; the seeded
// constructor gives a reproducible stream for tests and benchmarks.
class SecureRng {
 public:
  using result_type = uint64_t;

  SecureRng();
  explicit SecureRng(uint64_t seed);
  explicit SecureRng(const std::array<uint8_t, 32>& key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    if (pos_ == kBufferWords) refill();
    return buffer_[pos_++];
  }

  // Exactly uniform in [0, bound), bound > 0.
  uint64_t uniform(uint64_t bound);
  // Uniform in [0, 1) with 53 random bits.
  double uniform_double() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }
  bool coin() { return ((*this)() & 1) != 0; }

  // Derives an independent generator (used to hand one stream per thread).
  SecureRng fork();

 private:
  static constexpr size_t kBufferWords = 512;

  void refill();

  std::array<uint8_t, 32> key_{};
  uint32_t block_counter_ = 0;
  uint64_t nonce_high_ = 0;
  std::array<uint64_t, kBufferWords> buffer_{};
  size_t pos_ = kBufferWords;
};

}  // namespace rangepir
