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

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rangepir/common/error.hpp"

namespace rangepir {

using Bytes = std::vector<uint8_t>;

// Little-endian append-only encoder.
class ByteWriter {
 public:
  ByteWriter() = default;
  explicit ByteWriter(size_t reserve) { buf_.reserve(reserve); }

  void u8(uint8_t v) { buf_.push_back(v); }
  void u16(uint16_t v) { put_le(v); }
  void u32(uint32_t v) { put_le(v); }
  void u64(uint64_t v) { put_le(v); }
  void f64(double v) { put_le(std::bit_cast<uint64_t>(v)); }
  void raw(std::span<const uint8_t> data) {
    buf_.insert(buf_.end(), data.begin(), data.end());
  }
  void raw(std::string_view data) {
    buf_.insert(buf_.end(), data.begin(), data.end());
  }
  // u32 length prefix followed by the bytes.
  void blob(std::span<const uint8_t> data) {
    u32(static_cast<uint32_t>(data.size()));
    raw(data);
  }
  void u64_array(std::span<const uint64_t> values) {
    const size_t offset = buf_.size();
    buf_.resize(offset + values.size() * 8);
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(buf_.data() + offset, values.data(), values.size() * 8);
    } else {
      for (size_t i = 0; i < values.size(); ++i) {
        for (int b = 0; b < 8; ++b) {
          buf_[offset + i * 8 + b] = static_cast<uint8_t>(values[i] >> (8 * b));
        }
      }
    }
  }

  size_t size() const { return buf_.size(); }
  const Bytes& bytes() const& { return buf_; }
  Bytes take() && { return std::move(buf_); }

 private:
  template <typename T>
  void put_le(T v) {
    for (size_t i = 0; i < sizeof(T); ++i) {
      buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
  }

  Bytes buf_;
};

// Bounds-checked little-endian decoder. Short reads throw kMalformed.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

  uint8_t u8() { return get_le<uint8_t>(); }
  uint16_t u16() { return get_le<uint16_t>(); }
  uint32_t u32() { return get_le<uint32_t>(); }
  uint64_t u64() { return get_le<uint64_t>(); }
  double f64() { return std::bit_cast<double>(get_le<uint64_t>()); }

  std::span<const uint8_t> raw(size_t n) {
    need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::span<const uint8_t> blob() { return raw(u32()); }
  void u64_array(std::span<uint64_t> out) {
    auto src = raw(out.size() * 8);
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(out.data(), src.data(), src.size());
    } else {
      for (size_t i = 0; i < out.size(); ++i) {
        uint64_t v = 0;
        for (int b = 0; b < 8; ++b) v |= uint64_t{src[i * 8 + b]} << (8 * b);
        out[i] = v;
      }
    }
  }

  size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }
  void expect_done(const char* what) const {
    if (!done()) Fail(ErrorCode::kMalformed, std::string(what) + ": trailing bytes");
  }

 private:
  void need(size_t n) const {
    if (data_.size() - pos_ < n) Fail(ErrorCode::kMalformed, "truncated payload");
  }
  template <typename T>
  T get_le() {
    need(sizeof(T));
    T v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<T>(data_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(T);
    return v;
  }

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

inline std::string ToHex(std::span<const uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

Bytes FromHex(std::string_view hex);

}  // namespace rangepir
