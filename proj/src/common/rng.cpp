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

#include "rangepir/common/rng.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace rangepir {
namespace {

void EnsureSodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw std::runtime_error("libsodium initialisation failed");
}

}  // namespace

SecureRng::SecureRng() {
  EnsureSodium();
  randombytes_buf(key_.data(), key_.size());
}

SecureRng::SecureRng(uint64_t seed) {
  EnsureSodium();
  // Expand the 64-bit seed into a full key so nearby seeds give unrelated
  // streams.
  uint8_t seed_bytes[8];
  for (int i = 0; i < 8; ++i) seed_bytes[i] = static_cast<uint8_t>(seed >> (8 * i));
  crypto_generichash(key_.data(), key_.size(), seed_bytes, sizeof(seed_bytes),
                     nullptr, 0);
}

SecureRng::SecureRng(const std::array<uint8_t, 32>& key) : key_(key) {
  EnsureSodium();
}

void SecureRng::refill() {
  // 96-bit IETF nonce: 64 bits of stream id, and the 32-bit block counter
  // continues across refills; rolls the nonce when the counter would wrap.
  constexpr uint32_t kBlocksPerRefill = kBufferWords * 8 / 64;
  if (block_counter_ > UINT32_MAX - kBlocksPerRefill) {
    block_counter_ = 0;
    ++nonce_high_;
  }
  uint8_t nonce[crypto_stream_chacha20_ietf_NONCEBYTES] = {};
  for (int i = 0; i < 8; ++i) nonce[4 + i] = static_cast<uint8_t>(nonce_high_ >> (8 * i));
  std::memset(buffer_.data(), 0, sizeof(buffer_));
  auto* bytes = reinterpret_cast<unsigned char*>(buffer_.data());
  crypto_stream_chacha20_ietf_xor_ic(bytes, bytes, sizeof(buffer_), nonce,
                                     block_counter_, key_.data());
  block_counter_ += kBlocksPerRefill;
  pos_ = 0;
}

uint64_t SecureRng::uniform(uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform bound must be positive");
  // Rejection on the top of the range keeps the result exactly uniform.
  const uint64_t limit = max() - (max() % bound + 1) % bound;
  while (true) {
    const uint64_t v = (*this)();
    if (v <= limit) return v % bound;
  }
}

SecureRng SecureRng::fork() {
  std::array<uint8_t, 32> child{};
  for (size_t i = 0; i < child.size(); i += 8) {
    const uint64_t v = (*this)();
    std::memcpy(child.data() + i, &v, 8);
  }
  return SecureRng(child);
}

}  // namespace rangepir
