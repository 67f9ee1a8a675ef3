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

#include "rangepir/dldp/dldp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

namespace rangepir::dldp {
namespace {

// lambda as an exact fraction num/den with num < 2^56.
struct Rational {
  uint64_t num;
  uint64_t den;
};

Rational ExactRational(double lambda) {
  Require(std::isfinite(lambda) && lambda > 0.0, ErrorCode::kInvalidArgument,
          "lambda must be positive and finite");
  int exp = 0;
  const double frac = std::frexp(lambda, &exp);  // lambda = frac * 2^exp
  uint64_t mant = static_cast<uint64_t>(std::ldexp(frac, 53));
  exp -= 53;
  const int tz = std::countr_zero(mant);
  mant >>= tz;
  exp += tz;
  if (exp >= 0) {
    Require(exp < 56 && mant < (uint64_t{1} << (56 - exp)), ErrorCode::kInvalidArgument,
            "lambda too large for the exact sampler");
    return {mant << exp, 1};
  }
  Require(-exp < 63, ErrorCode::kInvalidArgument, "lambda too small for the exact sampler");
  return {mant, uint64_t{1} << -exp};
}

// Bernoulli(num / den), den > 0.
bool BernoulliRational(uint64_t num, uint64_t den, SecureRng& rng) {
  return rng.uniform(den) < num;
}

// Bernoulli(exp(-num/den)) for 0 <= num <= den.
bool BernoulliExpUnit(uint64_t num, uint64_t den, SecureRng& rng) {
  uint64_t k = 1;
  while (BernoulliRational(num, den * k, rng)) ++k;
  return (k & 1) == 1;
}

// Geometric count of successes of Bernoulli(exp(-1)).
uint64_t GeometricExpOne(SecureRng& rng) {
  uint64_t v = 0;
  while (BernoulliExpUnit(1, 1, rng)) ++v;
  return v;
}

bool Covered(RangeKind kind, uint64_t l, uint64_t r, uint64_t pos) {
  switch (kind) {
    case RangeKind::kContiguous: return l <= pos && pos <= r;
    case RangeKind::kWrapped: return pos >= l || pos <= r;
    case RangeKind::kFull: return true;
  }
  return false;
}

uint64_t ReduceIndex(int64_t x, uint64_t size, Reduction reduction) {
  if (reduction == Reduction::kFoldMagnitude) {
    const uint64_t mag = x < 0 ? uint64_t(0) - static_cast<uint64_t>(x) : static_cast<uint64_t>(x);
    return mag % size;
  }
  const int64_t s = static_cast<int64_t>(size);
  const int64_t m = x % s;
  return static_cast<uint64_t>(m < 0 ? m + s : m);
}

}  // namespace

void PrivacyParams::validate(uint32_t eps_data) const {
  Require(eps_dp > 0.0 && std::isfinite(eps_dp), ErrorCode::kInvalidArgument,
          "eps_dp must be positive");
  Require(t > 0, ErrorCode::kInvalidArgument, "t must be positive");
  if (mode == TMode::kAdjusted) {
    Require(t > 2 * uint64_t{eps_data}, ErrorCode::kInvalidArgument,
            "adjusted mode needs t > 2*eps_data");
  }
}

uint64_t PrivacyParams::query_distance(uint32_t eps_data) const {
  if (mode == TMode::kRaw) return t;
  return t > 2 * uint64_t{eps_data} ? t - 2 * uint64_t{eps_data} : 0;
}

const char* ToString(RangeKind kind) {
  switch (kind) {
    case RangeKind::kContiguous: return "contiguous";
    case RangeKind::kWrapped: return "wrapped";
    case RangeKind::kFull: return "full";
  }
  return "?";
}

uint64_t ObfuscatedRange::length() const {
  switch (kind) {
    case RangeKind::kContiguous: return r - l + 1;
    case RangeKind::kWrapped: return n - l + r + 1;
    case RangeKind::kFull: return n;
  }
  return 0;
}

bool ObfuscatedRange::covers(uint64_t pos) const {
  return pos < n && Covered(kind, l, r, pos);
}

bool ObfuscatedRange::covers(uint64_t lo, uint64_t hi) const {
  if (lo > hi || hi >= n) return false;
  switch (kind) {
    case RangeKind::kContiguous: return l <= lo && hi <= r;
    case RangeKind::kWrapped: return hi <= r || lo >= l;
    case RangeKind::kFull: return true;
  }
  return false;
}

int64_t DiscreteLaplaceNoise::sample(double lambda) {
  return SampleDiscreteLaplace(lambda, rng_);
}

int64_t ScriptedNoise::sample(double) {
  if (values_.empty()) return 0;
  const int64_t v = values_.front();
  values_.pop_front();
  return v;
}

int64_t SampleDiscreteLaplace(double lambda, SecureRng& rng) {
  // Canonne, Kamath, Steinke: discrete Laplace with scale num/den.
  const Rational q = ExactRational(lambda);
  for (;;) {
    const uint64_t u = rng.uniform(q.num);
    if (!BernoulliExpUnit(u, q.num, rng)) continue;
    const uint64_t v = GeometricExpOne(rng);
    const unsigned __int128 x = static_cast<unsigned __int128>(u) +
                                static_cast<unsigned __int128>(q.num) * v;
    const uint64_t y = static_cast<uint64_t>(x / q.den);
    const bool negative = rng.coin();
    if (negative && y == 0) continue;
    return negative ? -static_cast<int64_t>(y) : static_cast<int64_t>(y);
  }
}

double DiscreteLaplacePmf(int64_t x, double lambda) {
  const double c = std::tanh(0.5 / lambda);
  return c * std::exp(-std::fabs(static_cast<double>(x)) / lambda);
}

double ExpectedBoundaryNoise(double lambda) { return -1.0 / std::expm1(-1.0 / lambda); }

uint64_t LeftOrderingAt(uint64_t pred_lo, uint64_t n, uint64_t i) {
  return (pred_lo + n - i % n) % n;
}

uint64_t RightOrderingAt(uint64_t pred_hi, uint64_t n, uint64_t i) {
  return (pred_hi + i % n) % n;
}

ObfuscatedRange ObfuscateWithNoise(uint64_t pred_lo, uint64_t pred_hi, uint64_t n,
                                   int64_t xl, int64_t xr, Reduction reduction) {
  Require(pred_lo <= pred_hi && pred_hi < n, ErrorCode::kInvalidArgument,
          "predicted range outside the domain");
  // Both orderings run from one predicted boundary around the cycle to the
  // other, inclusive of both ends.
  const uint64_t size = n - (pred_hi - pred_lo) + 1;
  const uint64_t l = LeftOrderingAt(pred_lo, n, ReduceIndex(xl, size, reduction));
  const uint64_t r = RightOrderingAt(pred_hi, n, ReduceIndex(xr, size, reduction));

  if (l <= pred_lo && pred_lo <= pred_hi && pred_hi <= r) {
    return {RangeKind::kContiguous, l, r, n};
  }
  if ((r < l && l <= pred_lo) || (pred_hi <= r && r < l)) {
    return {RangeKind::kWrapped, l, r, n};
  }
  return ObfuscatedRange::Full(n);
}

ObfuscatedRange ObfuscateRange(const pgm::PredictedRange& pred, uint64_t n,
                               const PrivacyParams& params, NoiseSource& noise,
                               Reduction reduction) {
  Require(params.eps_dp > 0.0 && params.t > 0, ErrorCode::kInvalidArgument,
          "privacy parameters must be positive");
  const double lambda = params.lambda();
  const int64_t xl = noise.sample(lambda);
  const int64_t xr = noise.sample(lambda);
  return ObfuscateWithNoise(pred.lo, pred.hi, n, xl, xr, reduction);
}

double WrappedLaplaceMass(uint64_t i, uint64_t n, double lambda) {
  // sum_{k>=0} a^{i+kn} + sum_{k>=1} a^{kn-i} = (a^i + a^{n-i}) / (1 - a^n)
  const double c = std::tanh(0.5 / lambda);
  const double di = static_cast<double>(i % n);
  const double dn = static_cast<double>(n);
  const double num = std::exp(-di / lambda) + std::exp(-(dn - di) / lambda);
  return c * num / -std::expm1(-dn / lambda);
}

std::vector<double> BoundaryPmf(uint64_t boundary_position, uint64_t n, double lambda) {
  Require(n >= 1 && n <= (uint64_t{1} << 16), ErrorCode::kInvalidArgument,
          "verifier domain must be in [1, 2^16]");
  Require(boundary_position < n, ErrorCode::kInvalidArgument, "boundary outside the domain");
  std::vector<double> mass(n);
  for (uint64_t i = 0; i < n; ++i) mass[i] = WrappedLaplaceMass(i, n, lambda);
  std::vector<double> out(n);
  for (uint64_t i = 0; i < n; ++i) out[(boundary_position + i) % n] = mass[i];
  return out;
}

std::vector<double> ExponentialMechanismPmf(int64_t x, std::span<const int64_t> domain,
                                            const PrivacyParams& params) {
  Require(!domain.empty(), ErrorCode::kInvalidArgument, "empty domain");
  const double scale = params.eps_dp / (4.0 * static_cast<double>(params.t));
  int64_t nearest = std::abs(x - domain[0]);
  for (int64_t j : domain) nearest = std::min(nearest, std::abs(x - j));
  std::vector<double> w(domain.size());
  double total = 0.0;
  for (size_t k = 0; k < domain.size(); ++k) {
    w[k] = std::exp(-static_cast<double>(std::abs(x - domain[k]) - nearest) * scale);
    total += w[k];
  }
  for (double& v : w) v /= total;
  return w;
}

int64_t ExponentialMechanismBoundary(int64_t x, std::span<const int64_t> domain,
                                     const PrivacyParams& params, SecureRng& rng) {
  const auto pmf = ExponentialMechanismPmf(x, domain, params);
  const double u = rng.uniform_double();
  double acc = 0.0;
  for (size_t k = 0; k < pmf.size(); ++k) {
    acc += pmf[k];
    if (u < acc) return domain[k];
  }
  return domain.back();
}

double ExpectedRangeLength(uint64_t t, double eps_dp, uint32_t eps_data, uint64_t n) {
  const double nominal = 4.0 * static_cast<double>(t) / eps_dp + 2.0 * eps_data + 1.0;
  return std::min(static_cast<double>(n), nominal);
}

double BtreeExpectedRangeLength(uint64_t t, double eps_dp, uint64_t page_m) {
  const double m = static_cast<double>(page_m);
  const double pages = static_cast<double>((t + page_m - 1) / page_m);
  return 4.0 * m / eps_dp * pages + m;
}

ObfuscatedRange BtreeObfuscateRange(uint64_t page_lo, uint64_t page_hi, uint64_t page_count,
                                    uint64_t page_m, const PrivacyParams& params,
                                    NoiseSource& noise, Reduction reduction) {
  Require(page_m >= 1, ErrorCode::kInvalidArgument, "page_m must be positive");
  PrivacyParams page_params = params;
  page_params.t = (params.t + page_m - 1) / page_m;
  return ObfuscateRange({page_lo, page_lo, page_hi}, page_count, page_params, noise,
                        reduction);
}

}  // namespace rangepir::dldp
