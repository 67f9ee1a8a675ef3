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
#include <optional>
#include <span>
#include <vector>

#include "rangepir/common/bytes.hpp"

namespace rangepir::store {

// Reserved key: marks tail padding and vacated slots. Real keys are smaller.
inline constexpr uint64_t kSentinelKey = ~uint64_t{0};
inline constexpr uint64_t kMaxKey = kSentinelKey - 1;

// Sorted array of fixed-width key/value pairs.
//
// Canonical pair layout (used on the wire and by the plaintext encoder):
// the key as 8 big-endian bytes followed by value_bytes value bytes.
class KvStore {
 public:
  explicit KvStore(size_t value_bytes = 8);

  // Keys must be strictly increasing and below kSentinelKey; values holds
  // keys.size() * value_bytes bytes.
  KvStore(std::vector<uint64_t> keys, std::vector<uint8_t> values,
          size_t value_bytes, uint64_t version_id = 1);

  size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }
  size_t value_bytes() const { return value_bytes_; }
  size_t pair_bytes() const { return 8 + value_bytes_; }
  size_t kv_bits() const { return 8 * pair_bytes(); }
  uint64_t version_id() const { return version_id_; }
  void set_version_id(uint64_t v) { version_id_ = v; }

  uint64_t key(size_t i) const { return keys_[i]; }
  std::span<const uint64_t> keys() const { return keys_; }
  std::span<const uint8_t> value(size_t i) const {
    return {values_.data() + i * value_bytes_, value_bytes_};
  }
  std::span<uint8_t> mutable_value(size_t i) {
    return {values_.data() + i * value_bytes_, value_bytes_};
  }
  std::span<const uint8_t> values() const { return values_; }

  std::optional<size_t> find(uint64_t key) const;
  // First position whose key is >= key (size() if none).
  size_t lower_bound(uint64_t key) const;

  // Writes the canonical layout of pair i into out[0, pair_bytes()).
  void write_pair(size_t i, uint8_t* out) const;
  // Appends pairs [begin, end) in canonical layout.
  void append_pairs(size_t begin, size_t end, Bytes& out) const;

  // Throws kInvalidArgument unless keys are strictly increasing, below the
  // sentinel, and the store is non-empty.
  void validate_servable() const;

 private:
  std::vector<uint64_t> keys_;
  std::vector<uint8_t> values_;
  size_t value_bytes_;
  uint64_t version_id_ = 1;
};

// Decodes a canonical pair.
uint64_t PairKey(std::span<const uint8_t> pair);
inline std::span<const uint8_t> PairValue(std::span<const uint8_t> pair) {
  return pair.subspan(8);
}
void WriteKeyBigEndian(uint64_t key, uint8_t* out);

}  // namespace rangepir::store
