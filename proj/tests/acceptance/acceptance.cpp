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

// Acceptance checks. Each criterion prints one line:
//   criterion N: PASS|FAIL  <detail>  [seconds]
// Exit status is non-zero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "../common/chi_square.hpp"
#include "rangepir/bench/bench.hpp"
#include "rangepir/dldp/dldp.hpp"
#include "rangepir/he/he.hpp"
#include "rangepir/he/kernels.hpp"
#include "rangepir/he/modarith.hpp"
#include "rangepir/he/ntt.hpp"
#include "rangepir/pgm/pgm_index.hpp"
#include "rangepir/protocol/wire.hpp"
#include "rangepir/store/dataset.hpp"
#include "rangepir/varpir/varpir.hpp"

namespace rangepir::acceptance {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a failed check; the first few are kept in the detail line.
  void check(bool ok, const std::string& what) {
    if (ok) return;
    if (pass || failures < 5) detail << " [fail: " << what << "]";
    pass = false;
    ++failures;
  }
  int failures = 0;
};

double Since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

uint64_t AbsentKey(const store::KvStore& kv, SecureRng& rng) {
  for (;;) {
    const uint64_t k = rng() >> 1;
    if (!kv.find(k)) return k;
  }
}

std::vector<size_t> DistinctPositions(size_t n, size_t count, SecureRng& rng) {
  std::set<size_t> picked;
  while (picked.size() < count) picked.insert(rng.uniform(n));
  return {picked.begin(), picked.end()};
}

// Guarantee mode used for a given t: adjusted needs t > 2*eps_data.
dldp::TMode ModeFor(uint64_t t, uint32_t eps_data) {
  return t > 2ull * eps_data ? dldp::TMode::kAdjusted : dldp::TMode::kRaw;
}

// --- 1 -------------------------------------------------------------------

void PgmErrorBound(Outcome& out) {
  const store::Distribution dists[] = {store::Distribution::kUniform,
                                       store::Distribution::kNormal,
                                       store::Distribution::kClustered};
  uint64_t seed = 1001;
  for (store::Distribution dist : dists) {
    const store::KvStore kv = store::GenerateDataset(1000000, dist, 8, seed++);
    const auto keys = kv.keys();
    bool sorted = true;
    for (size_t i = 1; i < keys.size(); ++i) sorted = sorted && keys[i - 1] < keys[i];
    out.check(sorted, "keys not strictly increasing");
    const pgm::PgmIndex index = pgm::PgmIndex::Build(keys, 64);
    uint64_t worst = 0, outside = 0;
    for (size_t i = 0; i < keys.size(); ++i) {
      // Brute-force rank: number of keys strictly below keys[i].
      const uint64_t rank = static_cast<uint64_t>(
          std::lower_bound(keys.begin(), keys.end(), keys[i]) - keys.begin());
      const pgm::PredictedRange p = index.predict(keys[i]);
      const uint64_t err = p.y_hat > rank ? p.y_hat - rank : rank - p.y_hat;
      worst = std::max(worst, err);
      outside += rank < p.lo || rank > p.hi;
    }
    out.detail << ' ' << store::ToString(dist) << " max_err=" << worst;
    out.check(worst <= 64, std::string(store::ToString(dist)) + " error above 64");
    out.check(outside == 0, std::string(store::ToString(dist)) + " rank outside window");
  }
}

// --- 2 -------------------------------------------------------------------

void IndexCompactness(Outcome& out) {
  const store::KvStore kv =
      store::GenerateDataset(uint64_t{1} << 20, store::Distribution::kUniform, 8, 2002);
  const Bytes blob = pgm::PgmIndex::Build(kv.keys(), 64).serialize();
  const double mib = static_cast<double>(blob.size()) / 1048576.0;
  out.detail << " bytes=" << blob.size() << " MiB=" << mib;
  out.check(mib <= 0.10, "index above 0.10 MiB");
}

// --- 3 -------------------------------------------------------------------

void PrivacyRatio(Outcome& out) {
  const uint64_t n = 4096, t = 8;
  const double eps = 1.0;
  const double lambda = 2.0 * t / eps;
  out.check(lambda == 16.0, "lambda");
  const uint64_t max_d = 8;
  // pmfs[b % (max_d + 1)] holds the output distribution for boundary b.
  std::vector<std::vector<double>> ring(max_d + 1);
  for (uint64_t b = 0; b < max_d; ++b) ring[b] = dldp::BoundaryPmf(b, n, lambda);
  double worst_excess = 0.0;  // max over pairs of ratio / bound
  for (uint64_t b = 0; b < n; ++b) {
    const uint64_t ahead = (b + max_d) % n;
    ring[(b + max_d) % (max_d + 1)] = dldp::BoundaryPmf(ahead, n, lambda);
    const auto& pb = ring[b % (max_d + 1)];
    double total = 0.0;
    for (double v : pb) total += v;
    if (std::abs(total - 1.0) > 1e-9) out.check(false, "pmf does not sum to 1");
    for (uint64_t d = 1; d <= max_d; ++d) {
      const auto& pd = ring[(b + d) % (max_d + 1)];
      const double bound = std::exp(static_cast<double>(d) * eps / (2.0 * t));
      for (uint64_t y = 0; y < n; ++y) {
        const double r = std::max(pb[y] / pd[y], pd[y] / pb[y]);
        worst_excess = std::max(worst_excess, r / bound);
      }
    }
  }
  out.detail << " max(ratio/bound)=" << std::setprecision(12) << worst_excess;
  out.check(worst_excess <= 1.0 + 1e-9, "ratio exceeds bound");
}

// --- 4 -------------------------------------------------------------------

void SamplerFidelity(Outcome& out) {
  SecureRng rng(4004);
  const size_t draws = 1000000;
  for (double lambda : {2.0, 16.0, 12800.0}) {
    // Closed form, written out independently of the library.
    auto pmf = [lambda](int64_t x) {
      return std::tanh(0.5 / lambda) * std::exp(-std::abs(static_cast<double>(x)) / lambda);
    };
    const int64_t reach = static_cast<int64_t>(std::ceil(lambda * 40));
    const auto cells = testing::MakeCells(pmf, -reach, reach, 20.0 / draws);
    std::vector<uint64_t> counts(cells.prob.size());
    for (size_t i = 0; i < draws; ++i) {
      ++counts[cells.index(dldp::SampleDiscreteLaplace(lambda, rng))];
    }
    const double p = testing::ChiSquarePValue(counts, cells.prob);
    out.detail << " lambda=" << lambda << ":p=" << p << "(" << cells.prob.size() << " cells)";
    out.check(p > 0.01, "chi-square rejects lambda " + std::to_string(lambda));
  }
}

// --- 5 -------------------------------------------------------------------

void RangeLengths(Outcome& out) {
  const auto rows = bench::BenchRangeLengths({10, 100, 1000}, 1.0 / 64, 64, 256, 1000000,
                                             uint64_t{1} << 24, 5005);
  const std::map<std::pair<std::string, uint64_t>, double> reference = {
      {{"pgm", 10}, 2715.12},     {{"pgm", 100}, 25740.2},   {{"pgm", 1000}, 256135.1},
      {{"btree", 10}, 65541.46},  {{"btree", 100}, 65552.8}, {{"btree", 1000}, 262088.2},
  };
  std::map<std::pair<std::string, uint64_t>, double> mean;
  for (const auto& r : rows) {
    mean[{r.mechanism, r.t}] = r.mean_len;
    const double ref = reference.at({r.mechanism, r.t});
    const double rel = r.mean_len / ref - 1.0;
    out.detail << ' ' << r.mechanism << "@" << r.t << '=' << r.mean_len << "(" << 100 * rel
               << "%)";
    out.check(std::abs(rel) <= 0.02, r.mechanism + " t=" + std::to_string(r.t) + " off by >2%");
  }
  const double ratio = mean.at({"btree", 10}) / mean.at({"pgm", 10});
  out.detail << " ratio@10=" << ratio;
  out.check(ratio >= 22.0 && ratio <= 26.0, "t=10 ratio outside [22, 26]");
}

// --- 6 -------------------------------------------------------------------

he::PlainPoly RandomPlain(size_t n, uint64_t p, SecureRng& rng) {
  he::PlainPoly pt;
  pt.coeffs.resize(n);
  for (auto& c : pt.coeffs) c = rng.uniform(p);
  return pt;
}

// a * b in Z_p[X]/(X^n + 1), only touching the nonzero coefficients of b.
he::PlainPoly NegacyclicMulOracle(const he::PlainPoly& a, const he::PlainPoly& b, uint64_t p) {
  const size_t n = a.coeffs.size();
  he::PlainPoly out;
  out.coeffs.assign(n, 0);
  for (size_t j = 0; j < n; ++j) {
    const uint64_t bj = b.coeffs[j];
    if (bj == 0) continue;
    for (size_t i = 0; i < n; ++i) {
      const uint64_t prod =
          static_cast<uint64_t>(static_cast<unsigned __int128>(a.coeffs[i]) * bj % p);
      const size_t k = (i + j) % n;
      if (i + j < n) {
        out.coeffs[k] = (out.coeffs[k] + prod) % p;
      } else {
        out.coeffs[k] = (out.coeffs[k] + p - prod) % p;
      }
    }
  }
  return out;
}

// X^i -> X^(i*g mod 2n), with X^n = -1.
he::PlainPoly SubstituteOracle(const he::PlainPoly& a, uint64_t g, uint64_t p) {
  const size_t n = a.coeffs.size();
  he::PlainPoly out;
  out.coeffs.assign(n, 0);
  for (size_t i = 0; i < n; ++i) {
    const uint64_t e = (i * g) % (2 * n);
    const uint64_t c = a.coeffs[i];
    if (e < n) {
      out.coeffs[e] = (out.coeffs[e] + c) % p;
    } else {
      out.coeffs[e - n] = (out.coeffs[e - n] + p - c) % p;
    }
  }
  return out;
}

std::vector<uint64_t> SchoolbookModQ(const std::vector<uint64_t>& a,
                                     const std::vector<uint64_t>& b, uint64_t q) {
  const size_t n = a.size();
  std::vector<uint64_t> out(n, 0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      const uint64_t prod = static_cast<uint64_t>(static_cast<unsigned __int128>(a[i]) * b[j] % q);
      const size_t k = (i + j) % n;
      out[k] = i + j < n ? (out[k] + prod) % q : (out[k] + q - prod) % q;
    }
  }
  return out;
}

void HomomorphicCore(Outcome& out) {
  const he::HeContext ctx(he::HeParams{});
  const size_t n = ctx.n();
  const uint64_t p = ctx.plain_modulus();
  SecureRng rng(6006);
  const he::SecretKey sk = he::KeyGen(ctx, rng);
  const he::GaloisKeys keys = he::GenGaloisKeys(ctx, sk, rng);
  const std::vector<uint64_t> elements = ctx.expansion_elements();

  // Identities over 1000 trials. Multipliers are sparse so the oracle stays
  // cheap; a handful of dense products follow.
  uint64_t bad_rt = 0, bad_add = 0, bad_mul = 0, bad_auto = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const he::PlainPoly a = RandomPlain(n, p, rng);
    const he::PlainPoly b = RandomPlain(n, p, rng);
    const he::Ciphertext ca = he::Encrypt(ctx, a, sk, rng);
    const he::Ciphertext cb = he::Encrypt(ctx, b, sk, rng);
    bad_rt += he::Decrypt(ctx, ca, sk) != a;
    he::PlainPoly sum = a;
    for (size_t i = 0; i < n; ++i) sum.coeffs[i] = (a.coeffs[i] + b.coeffs[i]) % p;
    bad_add += he::Decrypt(ctx, he::Add(ctx, ca, cb), sk) != sum;
    he::PlainPoly sparse;
    sparse.coeffs.assign(n, 0);
    for (int k = 0; k < 4; ++k) sparse.coeffs[rng.uniform(n)] = rng.uniform(p);
    bad_mul += he::Decrypt(ctx, he::MulPlain(ctx, ca, sparse), sk) != NegacyclicMulOracle(a, sparse, p);
    const uint64_t g = elements[trial % elements.size()];
    bad_auto += he::Decrypt(ctx, he::ApplyAutomorphism(ctx, ca, g, keys), sk) !=
                SubstituteOracle(a, g, p);
  }
  for (int trial = 0; trial < 10; ++trial) {
    const he::PlainPoly a = RandomPlain(n, p, rng);
    const he::PlainPoly b = RandomPlain(n, p, rng);
    bad_mul += he::Decrypt(ctx, he::MulPlain(ctx, he::Encrypt(ctx, a, sk, rng), b), sk) !=
               NegacyclicMulOracle(a, b, p);
  }
  out.detail << " identity_failures=" << bad_rt + bad_add + bad_mul + bad_auto;
  out.check(bad_rt == 0, "round trip");
  out.check(bad_add == 0, "addition");
  out.check(bad_mul == 0, "plaintext multiplication");
  out.check(bad_auto == 0, "automorphism");

  // NTT products against schoolbook at degree 256, every available kernel.
  {
    const size_t m = 256;
    const uint64_t q = he::FindPrimesBelow(uint64_t{1} << 48, 2 * m, 1)[0];
    const he::NttTables tb(q, m);
    uint64_t bad = 0;
    int kernels = 0;
    for (const he::KernelSet* ks : {&he::ScalarKernels(), he::SimdKernels()}) {
      if (ks == nullptr) continue;
      ++kernels;
      SecureRng r(606);
      for (int trial = 0; trial < 200; ++trial) {
        std::vector<uint64_t> a(m), b(m);
        for (auto& v : a) v = r.uniform(q);
        for (auto& v : b) v = r.uniform(q);
        auto fa = a, fb = b;
        ks->ntt_forward(fa.data(), tb);
        ks->ntt_forward(fb.data(), tb);
        std::vector<uint64_t> fb_shoup(m), prod(m);
        for (size_t i = 0; i < m; ++i) fb_shoup[i] = he::Shoup52(fb[i], q);
        ks->mul_shoup(prod.data(), fa.data(), fb.data(), fb_shoup.data(), m, q);
        ks->ntt_inverse(prod.data(), tb);
        bad += prod != SchoolbookModQ(a, b, q);
      }
    }
    out.detail << " ntt_kernels=" << kernels;
    out.check(bad == 0, "NTT product differs from schoolbook");
  }

  // Expansion one-hots for every offset.
  {
    he::PlainPoly one, zero;
    zero.coeffs.assign(n, 0);
    one = zero;
    one.coeffs[0] = 1;
    uint64_t bad = 0;
    for (size_t w : {1u, 2u, 7u, 64u, 512u}) {
      for (size_t offset = 0; offset < w; ++offset) {
        const he::Ciphertext qct =
            he::Encrypt(ctx, he::ExpansionQueryPlaintext(ctx, offset, w), sk, rng);
        const auto outs = he::ObliviousExpand(ctx, qct, w, keys);
        bad += outs.size() != w;
        for (size_t k = 0; k < outs.size(); ++k) {
          bad += he::Decrypt(ctx, outs[k], sk) != (k == offset ? one : zero);
        }
      }
    }
    out.check(bad == 0, "expansion output not one-hot");
  }

  // Full answer at w_pt up to N: selected plaintext decrypts exactly with
  // budget to spare.
  for (size_t w : {1024u, 4096u}) {
    const size_t target = w - 3;
    auto plain_at = [&](size_t k) {
      SecureRng r(70000 + k);
      return RandomPlain(n, p, r);
    };
    const he::Ciphertext qct =
        he::Encrypt(ctx, he::ExpansionQueryPlaintext(ctx, target, w), sk, rng);
    he::PlainProductSum sum(ctx);
    he::ObliviousExpandVisit(ctx, qct, w, keys, [&](size_t k, const he::Ciphertext& ct) {
      sum.add(ct, he::PreparePlaintext(ctx, plain_at(k)));
    });
    const he::Ciphertext answer = sum.finish();
    const double budget = he::NoiseBudget(ctx, answer, sk);
    out.detail << " budget@" << w << '=' << budget;
    out.check(he::Decrypt(ctx, answer, sk) == plain_at(target), "answer mismatch at w_pt " + std::to_string(w));
    out.check(budget > 0.0, "noise budget exhausted at w_pt " + std::to_string(w));
  }
}

// --- 7 -------------------------------------------------------------------

bench::Deployment LargeDeployment(uint64_t seed) {
  return bench::MakeDeployment(
      store::GenerateDataset(uint64_t{1} << 20, store::Distribution::kUniform, 8, seed));
}

void EndToEnd(Outcome& out) {
  auto d = LargeDeployment(7007);
  const store::KvStore& kv = d.store->active()->kv;
  const uint32_t eps_data = d.store->active()->index.eps_data();
  SecureRng rng(7070);
  std::vector<uint64_t> present, absent;
  for (size_t pos : DistinctPositions(kv.size(), 1000, rng)) present.push_back(kv.key(pos));
  while (absent.size() < 200) absent.push_back(AbsentKey(kv, rng));
  auto c = bench::ConnectSimulated(*d.server, 50e6, 0.030, rng());
  for (uint64_t t : {100ull, 10000ull, 1000000ull}) {
    for (protocol::Scheme s : {protocol::Scheme::kPlainDownload, protocol::Scheme::kVarPir}) {
      const auto start = Clock::now();
      uint64_t wrong_values = 0, wrong_absent = 0;
      auto ask = [&](uint64_t key) {
        return c.client->lookup({.key = key, .t = t, .mode = ModeFor(t, eps_data), .scheme = s});
      };
      for (uint64_t key : present) {
        const auto r = ask(key);
        const auto pos = kv.find(key);
        wrong_values += !r.value || !std::ranges::equal(*r.value, kv.value(*pos));
      }
      for (uint64_t key : absent) wrong_absent += ask(key).value.has_value();
      std::cerr << "  t=" << t << ' ' << protocol::ToString(s) << " wrong=" << wrong_values
                << '+' << wrong_absent << " in " << Since(start) << " s\n";
      out.check(wrong_values == 0, "wrong values at t=" + std::to_string(t) + " " +
                                       protocol::ToString(s));
      out.check(wrong_absent == 0, "false presence at t=" + std::to_string(t) + " " +
                                       protocol::ToString(s));
    }
  }
  out.detail << " lookups=" << 6 * (present.size() + absent.size());
}

// --- 8 -------------------------------------------------------------------

void EncodingFit(Outcome& out) {
  const uint64_t n = 100000;
  const uint32_t eps = 64;
  const auto params = varpir::EncodingParams::Derive(he::HeParams{}, 16, n);
  // Layout from first principles: 20-bit limbs, 7 per 128-bit pair.
  const uint64_t m = 4096 / 7, step = m - m / 2;
  out.check(params.m == m && params.step == step, "derived layout differs");
  out.detail << " m=" << m << " step=" << step;
  auto fits = [&](uint64_t lo, uint64_t hi) {
    const uint64_t j = lo / step;
    return j < params.pt_count && j * step <= lo && hi <= j * step + m - 1;
  };
  uint64_t misses = 0;
  for (uint64_t pos = 0; pos < n; ++pos) {
    const uint64_t lo = pos >= eps ? pos - eps : 0;
    const uint64_t hi = std::min(n - 1, pos + eps);
    misses += !fits(lo, hi);
  }
  // Windows produced by a real index over a real key set.
  const store::KvStore kv = store::GenerateDataset(n, store::Distribution::kNormal, 8, 8008);
  const pgm::PgmIndex index = pgm::PgmIndex::Build(kv.keys(), eps);
  uint64_t index_misses = 0;
  for (uint64_t key : kv.keys()) {
    const auto p = index.predict(key);
    index_misses += !fits(p.lo, p.hi) || varpir::PosToPtId(p.lo, params) != p.lo / step;
  }
  out.detail << " misses=" << misses << '+' << index_misses;
  out.check(misses == 0 && index_misses == 0, "window outside its plaintext");
}

// --- 9 -------------------------------------------------------------------

void CommunicationConstancy(Outcome& out) {
  std::set<size_t> answer_sizes;
  std::map<size_t, std::set<size_t>> query_sizes;  // ceil(w_pt/N) -> payload sizes
  size_t ct_bytes = 0;
  for (uint64_t log_n : {16u, 20u}) {
    auto d = bench::MakeDeployment(store::GenerateDataset(
        uint64_t{1} << log_n, store::Distribution::kUniform, 8, 9000 + log_n));
    const store::KvStore& kv = d.store->active()->kv;
    const uint32_t eps_data = d.store->active()->index.eps_data();
    SecureRng rng(9090 + log_n);
    auto c = bench::ConnectSimulated(*d.server, 50e6, 0.030, rng());
    const he::HeContext& ctx = c.client->context();
    ct_bytes = ctx.ciphertext_bytes();
    for (uint64_t t : {100ull, 10000ull}) {
      for (int i = 0; i < 4; ++i) {
        const auto r = c.client->lookup({.key = kv.key(rng.uniform(kv.size())), .t = t,
                                         .mode = ModeFor(t, eps_data),
                                         .scheme = protocol::Scheme::kVarPir});
        answer_sizes.insert(r.response_bytes);
        query_sizes[varpir::QueryCiphertextCount(r.pt_range.w_pt, ctx.n())].insert(
            r.request.payload.size());
      }
    }
    if (log_n == 20) {
      // Two keys in different plaintexts under one obfuscated range.
      const auto& enc = c.client->bundle().encoding;
      const uint64_t n = kv.size();
      const dldp::ObfuscatedRange obf{dldp::RangeKind::kWrapped, n - 5000, 9000, n};
      const pgm::PredictedRange a = c.client->index().predict(kv.key(100));
      const pgm::PredictedRange b = c.client->index().predict(kv.key(n - 200));
      out.check(obf.covers(a.lo, a.hi) && obf.covers(b.lo, b.hi), "range misses a window");
      out.check(varpir::PosToPtId(a.lo, enc) != varpir::PosToPtId(b.lo, enc),
                "keys share a plaintext");
      const he::SecretKey sk = he::KeyGen(ctx, rng);
      const uint64_t v = c.client->version_id();
      const protocol::Frame fa = protocol::EncodeVarPirQuery(
          ctx, varpir::BuildQuery(ctx, a, obf, enc, v, sk, rng), enc.pt_count);
      const protocol::Frame fb = protocol::EncodeVarPirQuery(
          ctx, varpir::BuildQuery(ctx, b, obf, enc, v, sk, rng), enc.pt_count);
      // version, kind, l_pt, r_pt, ciphertext count, blob length
      const size_t fields = 8 + 1 + 8 + 8 + 2 + 4;
      out.check(fa.payload.size() == fb.payload.size(), "query sizes differ by key");
      out.check(std::equal(fa.payload.begin(), fa.payload.begin() + fields, fb.payload.begin()),
                "plaintext query fields differ by key");
      const protocol::PlainQuery pq{v, obf.kind, obf.l, obf.r};
      out.check(protocol::EncodePlainQuery(pq).payload.size() == 25, "plain query size");
    }
  }
  out.detail << " answer_bytes=";
  for (size_t s : answer_sizes) out.detail << s << ';';
  out.check(answer_sizes.size() == 1, "answer size varies");
  std::set<size_t> overheads;
  for (const auto& [k, sizes] : query_sizes) {
    out.detail << " query[k=" << k << "]=";
    for (size_t s : sizes) {
      out.detail << s << ';';
      overheads.insert(s - k * ct_bytes);
    }
    out.check(sizes.size() == 1, "query size varies at fixed ciphertext count");
  }
  out.check(overheads.size() == 1, "query size not affine in ciphertext count");
}

// --- 10 ------------------------------------------------------------------

void CostModelFidelity(Outcome& out) {
  auto d = LargeDeployment(1010);
  const auto rows =
      bench::BenchCrossover(d, {10e6, 50e6, 100e6, 1000e6}, {100, 10000}, 10, 0.030, 1011);
  bench::WriteCsv(std::cerr, rows);
  std::map<std::pair<double, uint64_t>, protocol::Scheme> chosen;
  for (const auto& r : rows) {
    chosen[{r.bandwidth, r.t}] = r.chosen;
    const std::string cell =
        std::to_string(static_cast<int>(r.bandwidth / 1e6)) + "Mbps/t=" + std::to_string(r.t);
    out.check(r.correct, "wrong result at " + cell);
    out.check(r.within_slack(0.20), "choice not within 20% at " + cell);
    out.detail << ' ' << cell << ':' << protocol::ToString(r.chosen);
  }
  out.check(chosen.at({1000e6, 100}) == protocol::Scheme::kPlainDownload,
            "plain not chosen at high bandwidth, low t");
  out.check(chosen.at({10e6, 10000}) == protocol::Scheme::kVarPir,
            "varpir not chosen at low bandwidth, high t");
}

// --- 11 ------------------------------------------------------------------

void Updates(Outcome& out) {
  auto d = LargeDeployment(1111);
  const uint64_t v0 = d.store->active()->version_id;
  const auto r = bench::BenchUpdates(d, 100, 1.0, 100, 50e6, 0.030, 3, 1112, true);
  bench::WriteCsv(std::cerr, r);
  out.detail << " ratio=" << r.ratio << " value_updates=" << r.value_updates
             << " stale_queries=" << r.stale_queries << " max_retries=" << r.max_stale_retries
             << " wrong=" << r.wrong;
  out.check(r.value_updates > 0, "no value update landed during the run");
  out.check(r.ratio <= 1.10, "overhead above 10%");
  out.check(r.max_stale_retries <= 1, "more than one stale retry");
  out.check(r.wrong == 0, "wrong results");
  out.check(r.final_version > v0, "batch update did not publish a version");
}

struct Criterion {
  std::function<void(Outcome&)> run;
  double limit_seconds;  // 0: none
};

const std::map<int, Criterion>& Criteria() {
  static const std::map<int, Criterion> all = {
      {1, {PgmErrorBound, 30}},     {2, {IndexCompactness, 10}},
      {3, {PrivacyRatio, 60}},      {4, {SamplerFidelity, 0}},
      {5, {RangeLengths, 300}},     {6, {HomomorphicCore, 600}},
      {7, {EndToEnd, 0}},           {8, {EncodingFit, 0}},
      {9, {CommunicationConstancy, 0}}, {10, {CostModelFidelity, 0}},
      {11, {Updates, 0}},
  };
  return all;
}

}  // namespace
}  // namespace rangepir::acceptance

int main(int argc, char** argv) {
  using namespace rangepir::acceptance;
  CLI::App app{"Runs acceptance criteria and prints one PASS/FAIL line each."};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "criterion number(s), default all")
      ->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) {
    for (const auto& [id, c] : Criteria()) selected.push_back(id);
  }
  bool all_pass = true;
  for (int id : selected) {
    const Criterion& c = Criteria().at(id);
    Outcome out;
    const auto start = Clock::now();
    try {
      c.run(out);
    } catch (const std::exception& e) {
      out.check(false, std::string("exception: ") + e.what());
    }
    const double seconds = Since(start);
    if (c.limit_seconds > 0) {
      out.check(seconds < c.limit_seconds,
                "runtime above " + std::to_string(static_cast<int>(c.limit_seconds)) + " s");
    }
    std::cout << "criterion " << id << ": " << (out.pass ? "PASS" : "FAIL") << ' '
              << out.detail.str() << "  [" << seconds << " s]" << std::endl;
    all_pass = all_pass && out.pass;
  }
  return all_pass ? 0 : 1;
}
