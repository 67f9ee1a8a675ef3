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
#include <deque>
#include <span>
#include <vector>

#include "rangepir/common/rng.hpp"
#include "rangepir/pgm/pgm_index.hpp"

namespace rangepir::dldp {

inline constexpr double kDefaultEpsDp = 1.0 / 64.0;

// How the caller's t is interpreted. In kAdjusted mode t is the noise
// distance and the guarantee holds for query positions within
// t - 2*eps_data, so t must exceed 2*eps_data. kRaw applies the guarantee to
// predicted boundaries only.
enum class TMode : uint8_t { kAdjusted = 0, kRaw = 1 };

struct PrivacyParams {
  double eps_dp = kDefaultEpsDp;
  uint64_t t = 1;
  TMode mode = TMode::kAdjusted;

  double lambda() const { return 2.0 * static_cast<double>(t) / eps_dp; }
  // Throws kInvalidArgument when eps_dp <= 0, t == 0, or adjusted mode is
  // requested with t <= 2*eps_data.
  void validate(uint32_t eps_data) const;
  // Distance between true query positions that the guarantee covers.
  uint64_t query_distance(uint32_t eps_data) const;
};

enum class RangeKind : uint8_t { kContiguous = 0, kWrapped = 1, kFull = 2 };

const char* ToString(RangeKind kind);

struct ObfuscatedRange {
  RangeKind kind = RangeKind::kFull;
  uint64_t l = 0;
  uint64_t r = 0;
  uint64_t n = 0;

  // Number of covered positions.
  uint64_t length() const;
  bool covers(uint64_t pos) const;
  bool covers(uint64_t lo, uint64_t hi) const;

  static ObfuscatedRange Full(uint64_t n) { return {RangeKind::kFull, 0, n - 1, n}; }

  friend bool operator==(const ObfuscatedRange&, const ObfuscatedRange&) = default;
};

// Treatment of a negative noise sample before indexing into the cyclic
// ordering. kLiteralModulo takes x mod |D| into [0, |D|); kFoldMagnitude
// uses |x| mod |D|, so both tails extend the range outward.
enum class Reduction : uint8_t { kFoldMagnitude = 0, kLiteralModulo = 1 };

// Source of Lap_Z draws, injectable so tests can pin the noise.
class NoiseSource {
 public:
  virtual ~NoiseSource() = default;
  virtual int64_t sample(double lambda) = 0;
};

class DiscreteLaplaceNoise final : public NoiseSource {
 public:
  explicit DiscreteLaplaceNoise(SecureRng& rng) : rng_(rng) {}
  int64_t sample(double lambda) override;

 private:
  SecureRng& rng_;
};

// Replays fixed values in order, then zeros.
class ScriptedNoise final : public NoiseSource {
 public:
  ScriptedNoise() = default;
  explicit ScriptedNoise(std::initializer_list<int64_t> values) : values_(values) {}
  void push(int64_t v) { values_.push_back(v); }
  int64_t sample(double) override;

 private:
  std::deque<int64_t> values_;
};

// Exact sample from Pr[X = x] proportional to exp(-|x|/lambda), lambda > 0.
// lambda is taken as the exact rational value of the double.
int64_t SampleDiscreteLaplace(double lambda, SecureRng& rng);
// Closed-form pmf: (e^{1/lambda}-1)/(e^{1/lambda}+1) * e^{-|x|/lambda}.
double DiscreteLaplacePmf(int64_t x, double lambda);
// Mean of X conditioned on X > 0: 1 / (1 - e^{-1/lambda}).
double ExpectedBoundaryNoise(double lambda);

// Range obfuscation with explicit noise values (xl for the left boundary, xr for
// the right). pred_lo <= pred_hi < n.
ObfuscatedRange ObfuscateWithNoise(uint64_t pred_lo, uint64_t pred_hi, uint64_t n,
                                   int64_t xl, int64_t xr, Reduction reduction);

ObfuscatedRange ObfuscateRange(const pgm::PredictedRange& pred, uint64_t n,
                               const PrivacyParams& params, NoiseSource& noise,
                               Reduction reduction = Reduction::kFoldMagnitude);

// Position of the cyclic orderings' i-th entry.
uint64_t LeftOrderingAt(uint64_t pred_lo, uint64_t n, uint64_t i);
uint64_t RightOrderingAt(uint64_t pred_hi, uint64_t n, uint64_t i);

// Exact output distribution of one boundary under literal modular reduction
// on a cycle of n positions: out[pos] is the probability that a boundary at
// boundary_position (walking upward) lands on pos. n <= 2^16.
std::vector<double> BoundaryPmf(uint64_t boundary_position, uint64_t n, double lambda);
// Mass of cyclic index i: sum over k of Pr[Lap_Z = i + k*n].
double WrappedLaplaceMass(uint64_t i, uint64_t n, double lambda);

// Exponential mechanism over an explicit domain.
std::vector<double> ExponentialMechanismPmf(int64_t x, std::span<const int64_t> domain,
                                            const PrivacyParams& params);
int64_t ExponentialMechanismBoundary(int64_t x, std::span<const int64_t> domain,
                                     const PrivacyParams& params, SecureRng& rng);

// min(n, 4t/eps + 2*eps_data + 1).
double ExpectedRangeLength(uint64_t t, double eps_dp, uint32_t eps_data, uint64_t n);
// (4m/eps) * ceil(t/m) + m.
double BtreeExpectedRangeLength(uint64_t t, double eps_dp, uint64_t page_m);

// Range obfuscation over page ids with t' = ceil(t / page_m). Result in page units.
ObfuscatedRange BtreeObfuscateRange(uint64_t page_lo, uint64_t page_hi, uint64_t page_count,
                                    uint64_t page_m, const PrivacyParams& params,
                                    NoiseSource& noise,
                                    Reduction reduction = Reduction::kFoldMagnitude);

}  // namespace rangepir::dldp
