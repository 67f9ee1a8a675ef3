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

#include "rangepir/store/kv_store.hpp"

#include <algorithm>
#include <cstring>

namespace rangepir::store {

void WriteKeyBigEndian(uint64_t key, uint8_t* out) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<uint8_t>(key >> (56 - 8 * i));
}

uint64_t PairKey(std::span<const uint8_t> pair) {
  uint64_t key = 0;
  for (int i = 0; i < 8; ++i) key = key << 8 | pair[i];
  return key;
}

KvStore::KvStore(size_t value_bytes) : value_bytes_(value_bytes) {
  Require(value_bytes > 0, ErrorCode::kInvalidArgument, "value_bytes must be positive");
}

KvStore::KvStore(std::vector<uint64_t> keys, std::vector<uint8_t> values,
                 size_t value_bytes, uint64_t version_id)
    : keys_(std::move(keys)),
      values_(std::move(values)),
      value_bytes_(value_bytes),
      version_id_(version_id) {
  Require(value_bytes > 0, ErrorCode::kInvalidArgument, "value_bytes must be positive");
  Require(values_.size() == keys_.size() * value_bytes_, ErrorCode::kInvalidArgument,
          "value array does not match key count");
  for (size_t i = 0; i < keys_.size(); ++i) {
    Require(keys_[i] != kSentinelKey, ErrorCode::kInvalidArgument,
            "the all-ones key is reserved");
    Require(i == 0 || keys_[i - 1] < keys_[i], ErrorCode::kInvalidArgument,
            "keys must be strictly increasing");
  }
}

std::optional<size_t> KvStore::find(uint64_t key) const {
  const size_t pos = lower_bound(key);
  if (pos < keys_.size() && keys_[pos] == key) return pos;
  return std::nullopt;
}

size_t KvStore::lower_bound(uint64_t key) const {
  return static_cast<size_t>(std::lower_bound(keys_.begin(), keys_.end(), key) -
                             keys_.begin());
}

void KvStore::write_pair(size_t i, uint8_t* out) const {
  WriteKeyBigEndian(keys_[i], out);
  std::memcpy(out + 8, values_.data() + i * value_bytes_, value_bytes_);
}

void KvStore::append_pairs(size_t begin, size_t end, Bytes& out) const {
  const size_t offset = out.size();
  out.resize(offset + (end - begin) * pair_bytes());
  uint8_t* dst = out.data() + offset;
  for (size_t i = begin; i < end; ++i, dst += pair_bytes()) write_pair(i, dst);
}

void KvStore::validate_servable() const {
  Require(!keys_.empty(), ErrorCode::kInvalidArgument, "store is empty");
  for (size_t i = 1; i < keys_.size(); ++i) {
    Require(keys_[i - 1] < keys_[i], ErrorCode::kInvalidArgument,
            "keys must be strictly increasing");
  }
  Require(keys_.back() != kSentinelKey, ErrorCode::kInvalidArgument,
          "the all-ones key is reserved");
}

}  // namespace rangepir::store
