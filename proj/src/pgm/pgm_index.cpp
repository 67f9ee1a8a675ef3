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

#include "rangepir/pgm/pgm_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rangepir::pgm {
namespace {

// Fit slack below eps; after rounding to the nearest integer a prediction
// within eps - kMargin of an integer rank is within eps of it.
constexpr double kMargin = 0.25;

int64_t RoundClamped(double y, int64_t lo, int64_t hi) {
  if (!(y > static_cast<double>(lo))) return lo;
  if (y >= static_cast<double>(hi)) return hi;
  return std::clamp<int64_t>(std::llround(y), lo, hi);
}

}  // namespace

std::vector<LinearSegment> FitSegments(std::span<const uint64_t> xs, uint32_t eps) {
  std::vector<LinearSegment> out;
  if (xs.empty()) return out;
  const double e = static_cast<double>(eps) - kMargin;

  size_t start = 0;
  double slope_lo = 0.0;
  double slope_hi = std::numeric_limits<double>::infinity();
  auto emit = [&](size_t end) {
    double slope = 0.0;
    if (end - start > 1) {
      slope = std::isinf(slope_hi) ? slope_lo : 0.5 * (slope_lo + slope_hi);
    }
    out.push_back({xs[start], slope, static_cast<double>(start)});
  };

  for (size_t i = start + 1; i < xs.size(); ++i) {
    const double dx = static_cast<double>(xs[i] - xs[start]);
    const double dy = static_cast<double>(i - start);
    const double lo = (dy - e) / dx;
    const double hi = (dy + e) / dx;
    const double new_lo = std::max(slope_lo, lo);
    const double new_hi = std::min(slope_hi, hi);
    if (new_lo > new_hi) {
      emit(i);
      start = i;
      slope_lo = 0.0;
      slope_hi = std::numeric_limits<double>::infinity();
      continue;
    }
    slope_lo = new_lo;
    slope_hi = new_hi;
  }
  emit(xs.size());
  return out;
}

PgmIndex::PgmIndex(uint32_t eps_data, uint32_t eps_model, uint64_t n,
                   std::vector<std::vector<LinearSegment>> levels)
    : eps_data_(eps_data), eps_model_(eps_model), n_(n), levels_(std::move(levels)) {
  Require(eps_data >= 1 && eps_model >= 1, ErrorCode::kInvalidArgument,
          "error bounds must be at least 1");
  Require(n >= 1, ErrorCode::kInvalidArgument, "index must cover at least one key");
  Require(!levels_.empty() && levels_.front().size() == 1, ErrorCode::kInvalidArgument,
          "top level must hold exactly one segment");
  for (const auto& level : levels_) {
    Require(!level.empty(), ErrorCode::kInvalidArgument, "empty level");
    for (size_t i = 1; i < level.size(); ++i) {
      Require(level[i - 1].min_key < level[i].min_key, ErrorCode::kInvalidArgument,
              "segments must be sorted by min_key");
    }
  }
  Require(levels_.back().size() <= n, ErrorCode::kInvalidArgument,
          "more leaf segments than keys");
}

PgmIndex PgmIndex::Build(std::span<const uint64_t> keys, uint32_t eps_data,
                         uint32_t eps_model) {
  Require(!keys.empty(), ErrorCode::kInvalidArgument, "cannot index an empty key set");
  Require(eps_data >= 1 && eps_model >= 1, ErrorCode::kInvalidArgument,
          "error bounds must be at least 1");
  for (size_t i = 1; i < keys.size(); ++i) {
    Require(keys[i - 1] < keys[i], ErrorCode::kInvalidArgument,
            "keys must be strictly increasing");
  }

  std::vector<std::vector<LinearSegment>> bottom_up;
  bottom_up.push_back(FitSegments(keys, eps_data));
  while (bottom_up.back().size() > 1) {
    std::vector<uint64_t> mins;
    mins.reserve(bottom_up.back().size());
    for (const auto& s : bottom_up.back()) mins.push_back(s.min_key);
    bottom_up.push_back(FitSegments(mins, eps_model));
  }
  std::reverse(bottom_up.begin(), bottom_up.end());
  return PgmIndex(eps_data, eps_model, keys.size(), std::move(bottom_up));
}

PredictedRange PgmIndex::predict(uint64_t key, std::vector<TraceStep>* trace) const {
  if (trace) trace->clear();
  size_t seg = 0;
  for (size_t level = 0; level + 1 < levels_.size(); ++level) {
    const auto& cur = levels_[level];
    const auto& next = levels_[level + 1];
    // A key past this segment's last child still belongs to that child, so
    // the prediction never needs to pass the next segment's first child.
    int64_t hi_cap = static_cast<int64_t>(next.size()) - 1;
    if (seg + 1 < cur.size()) {
      hi_cap = std::min(hi_cap, static_cast<int64_t>(cur[seg + 1].intercept));
    }
    const int64_t y = RoundClamped(cur[seg].evaluate(key), 0, hi_cap);
    const int64_t eps = eps_model_;
    const size_t lo = static_cast<size_t>(std::max<int64_t>(0, y - eps - 1));
    const size_t hi = static_cast<size_t>(
        std::min<int64_t>(static_cast<int64_t>(next.size()) - 1, y + eps));

    size_t chosen = lo;
    bool found = false;
    for (size_t c = hi + 1; c-- > lo;) {
      if (next[c].min_key <= key) {
        chosen = c;
        found = true;
        break;
      }
    }
    if (trace) trace->push_back({seg, y, lo, hi, chosen, found});
    seg = chosen;
  }

  const auto& leaves = levels_.back();
  int64_t hi_cap = static_cast<int64_t>(n_) - 1;
  if (seg + 1 < leaves.size()) {
    hi_cap = std::min(hi_cap, static_cast<int64_t>(leaves[seg + 1].intercept));
  }
  const int64_t y = RoundClamped(leaves[seg].evaluate(key), 0, hi_cap);
  const int64_t eps = eps_data_;
  PredictedRange out;
  out.y_hat = static_cast<uint64_t>(y);
  out.lo = static_cast<uint64_t>(std::max<int64_t>(0, y - eps));
  out.hi = static_cast<uint64_t>(std::min<int64_t>(static_cast<int64_t>(n_) - 1, y + eps));
  return out;
}

size_t PgmIndex::segment_count() const {
  size_t total = 0;
  for (const auto& level : levels_) total += level.size();
  return total;
}

size_t PgmIndex::size_bytes() const {
  size_t total = kHeaderBytes;
  for (const auto& level : levels_) total += 8 + kSegmentBytes * level.size();
  return total;
}

Bytes PgmIndex::serialize() const {
  ByteWriter w(size_bytes());
  w.raw(std::string_view(kMagic, 4));
  w.u16(kFormatVersion);
  w.u32(eps_data_);
  w.u32(eps_model_);
  w.u64(n_);
  w.u32(static_cast<uint32_t>(levels_.size()));
  for (const auto& level : levels_) {
    w.u64(level.size());
    for (const auto& s : level) {
      w.u64(s.min_key);
      w.f64(s.slope);
      w.f64(s.intercept);
    }
  }
  return std::move(w).take();
}

PgmIndex PgmIndex::Deserialize(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.raw(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic)) {
    Fail(ErrorCode::kMalformed, "bad PGM magic");
  }
  const uint16_t version = r.u16();
  if (version != kFormatVersion) {
    Fail(ErrorCode::kVersionMismatch, "unsupported PGM format version " + std::to_string(version));
  }
  const uint32_t eps_data = r.u32();
  const uint32_t eps_model = r.u32();
  const uint64_t n = r.u64();
  const uint32_t level_count = r.u32();
  if (level_count == 0 || level_count > 64) Fail(ErrorCode::kMalformed, "bad PGM level count");

  std::vector<std::vector<LinearSegment>> levels(level_count);
  for (auto& level : levels) {
    const uint64_t count = r.u64();
    if (count == 0 || count > r.remaining() / kSegmentBytes) {
      Fail(ErrorCode::kMalformed, "bad PGM segment count");
    }
    level.resize(count);
    for (auto& s : level) {
      s.min_key = r.u64();
      s.slope = r.f64();
      s.intercept = r.f64();
      if (!std::isfinite(s.slope) || !std::isfinite(s.intercept)) {
        Fail(ErrorCode::kMalformed, "non-finite PGM segment parameter");
      }
    }
  }
  r.expect_done("PGM blob");
  try {
    return PgmIndex(eps_data, eps_model, n, std::move(levels));
  } catch (const Error& e) {
    Fail(ErrorCode::kMalformed, e.what());
  }
}

}  // namespace rangepir::pgm
