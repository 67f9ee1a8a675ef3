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
#include <span>
#include <vector>

#include "rangepir/common/bytes.hpp"

namespace rangepir::pgm {

inline constexpr uint32_t kDefaultEpsData = 64;
inline constexpr uint32_t kDefaultEpsModel = 4;

struct LinearSegment {
  uint64_t min_key = 0;
  double slope = 0.0;
  double intercept = 0.0;

  // Unclamped real-valued prediction. The offset from min_key is formed
  // before scaling so large keys keep their low bits.
  double evaluate(uint64_t key) const {
    const double offset = key >= min_key ? static_cast<double>(key - min_key)
                                         : -static_cast<double>(min_key - key);
    return intercept + slope * offset;
  }

  friend bool operator==(const LinearSegment&, const LinearSegment&) = default;
};

struct PredictedRange {
  uint64_t y_hat = 0;
  uint64_t lo = 0;
  uint64_t hi = 0;

  friend bool operator==(const PredictedRange&, const PredictedRange&) = default;
};

// Per-level record of one traversal, for instrumentation.
struct TraceStep {
  size_t segment = 0;       // segment used at this level
  int64_t predicted = 0;    // clamped prediction into the next level
  size_t window_lo = 0;     // scanned window in the next level
  size_t window_hi = 0;
  size_t chosen = 0;        // child picked by the predecessor scan
  bool found_in_window = false;
};

class PgmIndex {
 public:
  PgmIndex() = default;

  // Levels ordered top (one segment) to bottom. Validates the structure.
  PgmIndex(uint32_t eps_data, uint32_t eps_model, uint64_t n,
           std::vector<std::vector<LinearSegment>> levels);

  // keys strictly increasing and non-empty.
  static PgmIndex Build(std::span<const uint64_t> keys,
                        uint32_t eps_data = kDefaultEpsData,
                        uint32_t eps_model = kDefaultEpsModel);

  PredictedRange predict(uint64_t key) const { return predict(key, nullptr); }
  // Fills trace with one step per internal level when non-null.
  PredictedRange predict(uint64_t key, std::vector<TraceStep>* trace) const;

  Bytes serialize() const;
  static PgmIndex Deserialize(std::span<const uint8_t> bytes);
  size_t size_bytes() const;

  uint32_t eps_data() const { return eps_data_; }
  uint32_t eps_model() const { return eps_model_; }
  uint64_t n() const { return n_; }
  const std::vector<std::vector<LinearSegment>>& levels() const { return levels_; }
  size_t segment_count() const;

  friend bool operator==(const PgmIndex&, const PgmIndex&) = default;

  static constexpr char kMagic[4] = {'F', 'P', 'G', 'M'};
  static constexpr uint16_t kFormatVersion = 1;
  static constexpr size_t kHeaderBytes = 4 + 2 + 4 + 4 + 8 + 4;
  static constexpr size_t kSegmentBytes = 8 + 8 + 8;

 private:
  uint32_t eps_data_ = kDefaultEpsData;
  uint32_t eps_model_ = kDefaultEpsModel;
  uint64_t n_ = 0;
  std::vector<std::vector<LinearSegment>> levels_;
};

// Streaming shrinking-cone fit of ranks 0..xs.size()-1 over xs (strictly
// increasing): every point lies within eps of its segment's line.
std::vector<LinearSegment> FitSegments(std::span<const uint64_t> xs, uint32_t eps);

}  // namespace rangepir::pgm
