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

#include "rangepir/store/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "rangepir/common/rng.hpp"

namespace rangepir::store {
namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double StandardNormal(SecureRng& rng) {
  // Box-Muller; u1 in (0, 1] keeps log finite.
  const double u1 = 1.0 - rng.uniform_double();
  const double u2 = rng.uniform_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

uint64_t ClampToKey(double x, uint64_t key_limit) {
  if (!(x > 0.0)) return 0;
  if (x >= static_cast<double>(key_limit)) return key_limit;
  return static_cast<uint64_t>(x);
}

}  // namespace

Distribution ParseDistribution(std::string_view name) {
  if (name == "uniform") return Distribution::kUniform;
  if (name == "normal") return Distribution::kNormal;
  if (name == "clustered") return Distribution::kClustered;
  Fail(ErrorCode::kInvalidArgument, "unknown distribution '" + std::string(name) + "'");
}

std::string_view ToString(Distribution d) {
  switch (d) {
    case Distribution::kUniform: return "uniform";
    case Distribution::kNormal: return "normal";
    case Distribution::kClustered: return "clustered";
  }
  return "?";
}

void SynthesizeValue(uint64_t key, std::span<uint8_t> out) {
  for (size_t i = 0; i < out.size(); ++i) {
    if (i < 8) {
      out[i] = static_cast<uint8_t>(key >> (8 * i));
    } else {
      out[i] = static_cast<uint8_t>(SplitMix64(key ^ SplitMix64(i / 8)) >> (8 * (i % 8)));
    }
  }
}

KvStore StoreFromKeys(std::vector<uint64_t> keys, size_t value_bytes) {
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::vector<uint8_t> values(keys.size() * value_bytes);
  for (size_t i = 0; i < keys.size(); ++i) {
    SynthesizeValue(keys[i], {values.data() + i * value_bytes, value_bytes});
  }
  return KvStore(std::move(keys), std::move(values), value_bytes);
}

KvStore GenerateDataset(size_t n, Distribution distribution, size_t value_bytes,
                        uint64_t seed, uint64_t key_limit) {
  Require(n >= 1, ErrorCode::kInvalidArgument, "n must be at least 1");
  Require(value_bytes >= 8 && value_bytes % 8 == 0, ErrorCode::kInvalidArgument,
          "value_bytes must be a positive multiple of 8");
  Require(key_limit <= kMaxKey, ErrorCode::kInvalidArgument, "key_limit too large");

  SecureRng rng(seed);
  std::vector<double> centers;
  if (distribution == Distribution::kClustered) {
    for (int c = 0; c < GeneratorShape::kClusterCount; ++c) {
      centers.push_back(rng.uniform_double() * static_cast<double>(key_limit));
    }
  }
  auto draw = [&]() -> uint64_t {
    switch (distribution) {
      case Distribution::kUniform:
        return key_limit == UINT64_MAX ? rng() : rng.uniform(key_limit + 1);
      case Distribution::kNormal: {
        const double mean = std::min(GeneratorShape::kNormalMean,
                                     static_cast<double>(key_limit) / 2.0);
        const double sd =
            mean * (GeneratorShape::kNormalStddev / GeneratorShape::kNormalMean);
        return ClampToKey(mean + sd * StandardNormal(rng), key_limit);
      }
      case Distribution::kClustered: {
        const double center = centers[rng.uniform(centers.size())];
        const double sd = static_cast<double>(key_limit) *
                          GeneratorShape::kClusterStddevFraction;
        return ClampToKey(center + sd * StandardNormal(rng), key_limit);
      }
    }
    return 0;
  };

  std::vector<uint64_t> keys;
  keys.reserve(n);
  for (size_t i = 0; i < n; ++i) keys.push_back(draw());
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  // Top up until n distinct keys exist; give up when rounds stop making
  // progress.
  int stalled_rounds = 0;
  while (keys.size() < n) {
    const size_t before = keys.size();
    const size_t missing = n - keys.size();
    for (size_t i = 0; i < missing; ++i) keys.push_back(draw());
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    if (keys.size() == before) {
      if (++stalled_rounds >= 64) {
        Fail(ErrorCode::kDuplicateExhaustion,
             "distribution cannot yield " + std::to_string(n) + " unique keys");
      }
    } else {
      stalled_rounds = 0;
    }
  }
  return StoreFromKeys(std::move(keys), value_bytes);
}

KvStore LoadSosd(const std::filesystem::path& path, size_t value_bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kInvalidArgument, "cannot open " + path.string());
  uint8_t header[8];
  if (!in.read(reinterpret_cast<char*>(header), 8)) {
    Fail(ErrorCode::kMalformed, "SOSD file shorter than its header");
  }
  uint64_t count = 0;
  for (int i = 0; i < 8; ++i) count |= uint64_t{header[i]} << (8 * i);
  if (count == 0) Fail(ErrorCode::kMalformed, "SOSD file holds zero keys");
  const uint64_t file_bytes = std::filesystem::file_size(path);
  if (count > (file_bytes - 8) / 8) Fail(ErrorCode::kMalformed, "SOSD file truncated");

  std::vector<uint64_t> keys(count);
  std::vector<uint8_t> raw(count * 8);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    Fail(ErrorCode::kMalformed, "SOSD file truncated");
  }
  for (uint64_t i = 0; i < count; ++i) {
    uint64_t k = 0;
    for (int b = 0; b < 8; ++b) k |= uint64_t{raw[i * 8 + b]} << (8 * b);
    if (k == kSentinelKey) Fail(ErrorCode::kMalformed, "SOSD key collides with the sentinel");
    keys[i] = k;
  }
  return StoreFromKeys(std::move(keys), value_bytes);
}

}  // namespace rangepir::store
