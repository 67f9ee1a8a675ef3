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
#include <filesystem>
#include <span>
#include <string_view>

#include "rangepir/store/kv_store.hpp"

namespace rangepir::store {

enum class Distribution { kUniform, kNormal, kClustered };

Distribution ParseDistribution(std::string_view name);
std::string_view ToString(Distribution d);

// Parameters of the synthetic generators; exposed so tests can compare the
// generated keys against the intended distribution.
struct GeneratorShape {
  static constexpr double kNormalMean = 9223372036854775808.0;   // 2^63
  static constexpr double kNormalStddev = 1152921504606846976.0;  // 2^60
  static constexpr int kClusterCount = 16;
  static constexpr double kClusterStddevFraction = 1.0 / 4096.0;
};

// Sorted store of n unique keys drawn from `distribution`, deterministic for
// a fixed seed. Keys are confined to [0, key_limit]. Throws
// kDuplicateExhaustion when the distribution cannot supply n distinct keys.
KvStore GenerateDataset(size_t n, Distribution distribution, size_t value_bytes,
                        uint64_t seed, uint64_t key_limit = kMaxKey);

// Value synthesized from the key: the first 8 bytes hold the key
// (little-endian), the rest are keyed hash bytes.
void SynthesizeValue(uint64_t key, std::span<uint8_t> out);

// SOSD layout: little-endian u64 count, then count little-endian u64 keys.
// Duplicates are dropped and the result is sorted.
KvStore LoadSosd(const std::filesystem::path& path, size_t value_bytes);
KvStore StoreFromKeys(std::vector<uint64_t> keys, size_t value_bytes);

}  // namespace rangepir::store
