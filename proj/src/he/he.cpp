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

#include "rangepir/he/he.hpp"

#include <bit>
#include <cmath>
#include <mutex>
#include <string>

namespace rangepir::he {
namespace {

std::mutex g_map_mutex;

int64_t SampleGaussian(SecureRng& rng, double stddev) {
  const double u1 = 1.0 - rng.uniform_double();
  const double u2 = rng.uniform_double();
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  return static_cast<int64_t>(std::llround(z * stddev));
}

uint64_t ToResidue(int64_t v, uint64_t q) {
  if (v >= 0) return static_cast<uint64_t>(v) % q;
  const uint64_t m = (uint64_t(0) - static_cast<uint64_t>(v)) % q;
  return m == 0 ? 0 : q - m;
}

RnsPoly UniformPoly(const HeContext& ctx, SecureRng& rng) {
  RnsPoly out = ctx.zero_poly();
  for (size_t k = 0; k < ctx.residues(); ++k) {
    uint64_t* r = out.residue(k, ctx.n());
    for (size_t i = 0; i < ctx.n(); ++i) r[i] = rng.uniform(ctx.prime(k));
  }
  return out;
}

// NTT-domain Gaussian error polynomial.
RnsPoly ErrorPoly(const HeContext& ctx, SecureRng& rng) {
  std::vector<int64_t> e(ctx.n());
  for (auto& v : e) v = SampleGaussian(rng, ctx.params().noise_stddev);
  RnsPoly out = LiftSigned(ctx, e);
  NttForward(ctx, out);
  return out;
}

// out = a * b, b fixed with companions.
void MulPolyShoup(const HeContext& ctx, RnsPoly& out, const RnsPoly& a, const RnsPoly& b,
                  const RnsPoly& b_shoup) {
  const size_t n = ctx.n();
  for (size_t k = 0; k < ctx.residues(); ++k) {
    ctx.kernels().mul_shoup(out.residue(k, n), a.residue(k, n), b.residue(k, n),
                            b_shoup.residue(k, n), n, ctx.prime(k));
  }
}

void AddPoly(const HeContext& ctx, RnsPoly& out, const RnsPoly& a, const RnsPoly& b) {
  const size_t n = ctx.n();
  for (size_t k = 0; k < ctx.residues(); ++k) {
    ctx.kernels().add_mod(out.residue(k, n), a.residue(k, n), b.residue(k, n), n, ctx.prime(k));
  }
}

void SubPoly(const HeContext& ctx, RnsPoly& out, const RnsPoly& a, const RnsPoly& b) {
  const size_t n = ctx.n();
  for (size_t k = 0; k < ctx.residues(); ++k) {
    ctx.kernels().sub_mod(out.residue(k, n), a.residue(k, n), b.residue(k, n), n, ctx.prime(k));
  }
}

std::vector<uint32_t> BuildAutomorphismMap(size_t n, uint64_t g) {
  const size_t log_n = static_cast<size_t>(std::countr_zero(n));
  const uint64_t two_n = 2 * n;
  std::vector<uint32_t> map(n);
  for (size_t i = 0; i < n; ++i) {
    const uint64_t exponent = 2 * BitReverse(static_cast<uint32_t>(i), log_n) + 1;
    const uint64_t target = (g % two_n) * exponent % two_n;
    map[i] = BitReverse(static_cast<uint32_t>((target - 1) / 2), log_n);
  }
  return map;
}

// Centered CRT reconstruction of residue words at coefficient i, in
// [0, Q).
u128 CrtCompose(const HeContext& ctx, const RnsPoly& poly, size_t i,
                const std::vector<uint64_t>& garner) {
  const size_t n = ctx.n();
  u128 x = poly.residue(0, n)[i];
  u128 prod = ctx.prime(0);
  for (size_t k = 1; k < ctx.residues(); ++k) {
    const uint64_t qk = ctx.prime(k);
    const uint64_t x_mod = static_cast<uint64_t>(x % qk);
    const uint64_t diff = SubMod(poly.residue(k, n)[i], x_mod, qk);
    const uint64_t t = MulMod(diff, garner[k], qk);
    x += prod * t;
    prod *= qk;
  }
  return x;
}

// garner[k] = (q_0 * ... * q_{k-1})^{-1} mod q_k.
std::vector<uint64_t> GarnerConstants(const HeContext& ctx) {
  std::vector<uint64_t> g(ctx.residues(), 0);
  for (size_t k = 1; k < ctx.residues(); ++k) {
    uint64_t prod = 1;
    for (size_t j = 0; j < k; ++j) prod = MulMod(prod, ctx.prime(j) % ctx.prime(k), ctx.prime(k));
    g[k] = InvMod(prod, ctx.prime(k));
  }
  return g;
}

// Coefficient-domain phase c0 + c1*s, composed over Q.
std::vector<u128> Phase(const HeContext& ctx, const Ciphertext& ct, const SecretKey& sk) {
  RnsPoly v = ctx.zero_poly();
  MulPolyShoup(ctx, v, ct.c1, sk.ntt, sk.shoup);
  AddPoly(ctx, v, v, ct.c0);
  NttInverse(ctx, v);
  const auto garner = GarnerConstants(ctx);
  std::vector<u128> out(ctx.n());
  for (size_t i = 0; i < ctx.n(); ++i) out[i] = CrtCompose(ctx, v, i, garner);
  return out;
}

void CheckCiphertextShape(const HeContext& ctx, const Ciphertext& ct) {
  const size_t words = ctx.residues() * ctx.n();
  Require(ct.c0.data.size() == words && ct.c1.data.size() == words,
          ErrorCode::kInvalidArgument, "ciphertext shape does not match parameters");
}

void WritePoly(ByteWriter& w, const RnsPoly& poly) { w.u64_array(poly.data); }

RnsPoly ReadPoly(const HeContext& ctx, ByteReader& r) {
  RnsPoly poly = ctx.zero_poly();
  r.u64_array(poly.data);
  for (size_t k = 0; k < ctx.residues(); ++k) {
    const uint64_t* p = poly.residue(k, ctx.n());
    for (size_t i = 0; i < ctx.n(); ++i) {
      if (p[i] >= ctx.prime(k)) Fail(ErrorCode::kMalformed, "polynomial word out of range");
    }
  }
  return poly;
}

}  // namespace

const KeySwitchKey& GaloisKeys::at(uint64_t element) const {
  auto it = keys.find(element);
  if (it == keys.end()) {
    Fail(ErrorCode::kNotFound, "no Galois key for element " + std::to_string(element));
  }
  return it->second;
}

HeContext::HeContext(HeParams params) : params_(std::move(params)) {
  params_.validate();
  kernels_ = &ActiveKernels();
  for (uint64_t q : params_.cipher_primes) {
    ntt_.push_back(std::make_unique<NttTables>(q, params_.ring_degree));
  }
  q_product_ = 1;
  for (uint64_t q : params_.cipher_primes) {
    Require(q_product_ <= ~u128{0} / q, ErrorCode::kInvalidArgument,
            "cipher modulus exceeds 128 bits");
    q_product_ *= q;
  }
  delta_ = q_product_ / params_.plain_modulus;
  for (uint64_t q : params_.cipher_primes) delta_mod_.push_back(static_cast<uint64_t>(delta_ % q));

  for (uint64_t g : expansion_elements()) {
    automorphism_maps_.emplace(g, BuildAutomorphismMap(n(), g));
  }
  // x^(-2^j) = -x^(N - 2^j).
  for (size_t j = 0; j < params_.log_degree(); ++j) {
    std::vector<int64_t> mono(n(), 0);
    mono[n() - (size_t{1} << j)] = -1;
    PreparedPlaintext pp;
    pp.ntt = LiftSigned(*this, mono);
    NttForward(*this, pp.ntt);
    pp.shoup = ShoupCompanion(*this, pp.ntt);
    inv_monomials_.push_back(std::move(pp));
  }
}

double HeContext::max_budget_bits() const {
  return std::log2(static_cast<double>(delta_)) - 1.0;
}

std::vector<uint64_t> HeContext::expansion_elements() const {
  std::vector<uint64_t> out;
  for (size_t j = 0; j < params_.log_degree(); ++j) out.push_back(expansion_element(j));
  return out;
}

const std::vector<uint32_t>& HeContext::automorphism_map(uint64_t g) const {
  Require((g & 1) == 1, ErrorCode::kInvalidArgument, "Galois element must be odd");
  std::lock_guard<std::mutex> lock(g_map_mutex);
  auto& maps = const_cast<std::map<uint64_t, std::vector<uint32_t>>&>(automorphism_maps_);
  const uint64_t key = g % (2 * n());
  auto it = maps.find(key);
  if (it == maps.end()) it = maps.emplace(key, BuildAutomorphismMap(n(), key)).first;
  return it->second;
}

void NttForward(const HeContext& ctx, RnsPoly& poly) {
  for (size_t k = 0; k < ctx.residues(); ++k) {
    ctx.kernels().ntt_forward(poly.residue(k, ctx.n()), ctx.ntt(k));
  }
}

void NttInverse(const HeContext& ctx, RnsPoly& poly) {
  for (size_t k = 0; k < ctx.residues(); ++k) {
    ctx.kernels().ntt_inverse(poly.residue(k, ctx.n()), ctx.ntt(k));
  }
}

RnsPoly LiftSigned(const HeContext& ctx, std::span<const int64_t> coeffs) {
  Require(coeffs.size() == ctx.n(), ErrorCode::kInvalidArgument, "polynomial length mismatch");
  RnsPoly out = ctx.zero_poly();
  for (size_t k = 0; k < ctx.residues(); ++k) {
    uint64_t* r = out.residue(k, ctx.n());
    for (size_t i = 0; i < ctx.n(); ++i) r[i] = ToResidue(coeffs[i], ctx.prime(k));
  }
  return out;
}

RnsPoly ShoupCompanion(const HeContext& ctx, const RnsPoly& poly) {
  RnsPoly out = ctx.zero_poly();
  for (size_t k = 0; k < ctx.residues(); ++k) {
    const uint64_t* src = poly.residue(k, ctx.n());
    uint64_t* dst = out.residue(k, ctx.n());
    for (size_t i = 0; i < ctx.n(); ++i) dst[i] = Shoup52(src[i], ctx.prime(k));
  }
  return out;
}

SecretKey KeyGen(const HeContext& ctx, SecureRng& rng) {
  SecretKey sk;
  sk.ternary.resize(ctx.n());
  std::vector<int64_t> wide(ctx.n());
  for (size_t i = 0; i < ctx.n(); ++i) {
    sk.ternary[i] = static_cast<int8_t>(static_cast<int64_t>(rng.uniform(3)) - 1);
    wide[i] = sk.ternary[i];
  }
  sk.ntt = LiftSigned(ctx, wide);
  NttForward(ctx, sk.ntt);
  sk.shoup = ShoupCompanion(ctx, sk.ntt);
  return sk;
}

GaloisKeys GenGaloisKeys(const HeContext& ctx, const SecretKey& sk, SecureRng& rng,
                         std::span<const uint64_t> elements) {
  const size_t n = ctx.n();
  const size_t per_prime = ctx.params().digits_per_prime();
  GaloisKeys out;
  for (uint64_t g : elements) {
    KeySwitchKey key;
    key.galois_element = g;
    const auto& map = ctx.automorphism_map(g);
    RnsPoly s_sigma = ctx.zero_poly();
    for (size_t k = 0; k < ctx.residues(); ++k) {
      ctx.kernels().permute(s_sigma.residue(k, n), sk.ntt.residue(k, n), map.data(), n);
    }
    for (size_t i = 0; i < ctx.residues(); ++i) {
      uint64_t base_pow = 1;  // B^j mod q_i
      const uint64_t qi = ctx.prime(i);
      const uint64_t base = (uint64_t{1} << ctx.params().decomp_log) % qi;
      for (size_t j = 0; j < per_prime; ++j) {
        RnsPoly a = UniformPoly(ctx, rng);
        RnsPoly b = ErrorPoly(ctx, rng);
        RnsPoly as = ctx.zero_poly();
        MulPolyShoup(ctx, as, a, sk.ntt, sk.shoup);
        SubPoly(ctx, b, b, as);
        uint64_t* bi = b.residue(i, n);
        const uint64_t* si = s_sigma.residue(i, n);
        for (size_t c = 0; c < n; ++c) bi[c] = AddMod(bi[c], MulMod(si[c], base_pow, qi), qi);
        key.b_shoup.push_back(ShoupCompanion(ctx, b));
        key.a_shoup.push_back(ShoupCompanion(ctx, a));
        key.b.push_back(std::move(b));
        key.a.push_back(std::move(a));
        base_pow = MulMod(base_pow, base, qi);
      }
    }
    out.keys.emplace(g, std::move(key));
  }
  return out;
}

GaloisKeys GenGaloisKeys(const HeContext& ctx, const SecretKey& sk, SecureRng& rng) {
  const auto elements = ctx.expansion_elements();
  return GenGaloisKeys(ctx, sk, rng, elements);
}

Ciphertext Encrypt(const HeContext& ctx, const PlainPoly& pt, const SecretKey& sk,
                   SecureRng& rng) {
  const size_t n = ctx.n();
  Require(pt.coeffs.size() == n, ErrorCode::kInvalidArgument, "plaintext length mismatch");
  Ciphertext ct;
  ct.c1 = UniformPoly(ctx, rng);

  RnsPoly scaled = ctx.zero_poly();
  for (size_t k = 0; k < ctx.residues(); ++k) {
    uint64_t* r = scaled.residue(k, n);
    for (size_t i = 0; i < n; ++i) {
      Require(pt.coeffs[i] < ctx.plain_modulus(), ErrorCode::kInvalidArgument,
              "plaintext coefficient out of range");
      r[i] = MulMod(ctx.delta_mod(k), pt.coeffs[i], ctx.prime(k));
    }
  }
  NttForward(ctx, scaled);
  ct.c0 = ErrorPoly(ctx, rng);
  AddPoly(ctx, ct.c0, ct.c0, scaled);
  RnsPoly as = ctx.zero_poly();
  MulPolyShoup(ctx, as, ct.c1, sk.ntt, sk.shoup);
  SubPoly(ctx, ct.c0, ct.c0, as);
  ct.tag = NoiseTag::kFresh;
  return ct;
}

PlainPoly Decrypt(const HeContext& ctx, const Ciphertext& ct, const SecretKey& sk) {
  CheckCiphertextShape(ctx, ct);
  const auto phase = Phase(ctx, ct, sk);
  const u128 delta = ctx.delta();
  PlainPoly out;
  out.coeffs.resize(ctx.n());
  for (size_t i = 0; i < ctx.n(); ++i) {
    const u128 m = (phase[i] + delta / 2) / delta;
    out.coeffs[i] = static_cast<uint64_t>(m % ctx.plain_modulus());
  }
  return out;
}

double NoiseBudget(const HeContext& ctx, const Ciphertext& ct, const SecretKey& sk) {
  CheckCiphertextShape(ctx, ct);
  const auto phase = Phase(ctx, ct, sk);
  const u128 delta = ctx.delta();
  u128 worst = 0;
  for (size_t i = 0; i < ctx.n(); ++i) {
    const u128 m = (phase[i] + delta / 2) / delta;
    const u128 center = m * delta;
    const u128 err = phase[i] >= center ? phase[i] - center : center - phase[i];
    if (err > worst) worst = err;
  }
  if (worst == 0) return ctx.max_budget_bits();
  return ctx.max_budget_bits() - std::log2(static_cast<double>(worst));
}

Ciphertext Add(const HeContext& ctx, const Ciphertext& a, const Ciphertext& b) {
  Ciphertext out = a;
  AddInPlace(ctx, out, b);
  return out;
}

void AddInPlace(const HeContext& ctx, Ciphertext& a, const Ciphertext& b) {
  CheckCiphertextShape(ctx, a);
  CheckCiphertextShape(ctx, b);
  AddPoly(ctx, a.c0, a.c0, b.c0);
  AddPoly(ctx, a.c1, a.c1, b.c1);
  a.tag = NoiseTag::kDerived;
}

Ciphertext Sub(const HeContext& ctx, const Ciphertext& a, const Ciphertext& b) {
  CheckCiphertextShape(ctx, a);
  CheckCiphertextShape(ctx, b);
  Ciphertext out = a;
  SubPoly(ctx, out.c0, a.c0, b.c0);
  SubPoly(ctx, out.c1, a.c1, b.c1);
  out.tag = NoiseTag::kDerived;
  return out;
}

PreparedPlaintext PreparePlaintext(const HeContext& ctx, const PlainPoly& pt) {
  Require(pt.coeffs.size() == ctx.n(), ErrorCode::kInvalidArgument, "plaintext length mismatch");
  const uint64_t p = ctx.plain_modulus();
  std::vector<int64_t> centered(ctx.n());
  for (size_t i = 0; i < ctx.n(); ++i) {
    const uint64_t c = pt.coeffs[i];
    Require(c < p, ErrorCode::kInvalidArgument, "plaintext coefficient out of range");
    centered[i] = c > p / 2 ? static_cast<int64_t>(c) - static_cast<int64_t>(p)
                            : static_cast<int64_t>(c);
  }
  PreparedPlaintext out;
  out.ntt = LiftSigned(ctx, centered);
  NttForward(ctx, out.ntt);
  out.shoup = ShoupCompanion(ctx, out.ntt);
  return out;
}

Ciphertext MulPlain(const HeContext& ctx, const Ciphertext& ct, const PreparedPlaintext& pt) {
  CheckCiphertextShape(ctx, ct);
  Ciphertext out;
  out.c0 = ctx.zero_poly();
  out.c1 = ctx.zero_poly();
  MulPolyShoup(ctx, out.c0, ct.c0, pt.ntt, pt.shoup);
  MulPolyShoup(ctx, out.c1, ct.c1, pt.ntt, pt.shoup);
  out.tag = NoiseTag::kDerived;
  return out;
}

Ciphertext MulPlain(const HeContext& ctx, const Ciphertext& ct, const PlainPoly& pt) {
  return MulPlain(ctx, ct, PreparePlaintext(ctx, pt));
}

KeySwitchWorkspace::KeySwitchWorkspace(const HeContext& ctx)
    : coeff(ctx.residues() * ctx.n()),
      digit(ctx.params().digits_per_prime() * ctx.residues() * ctx.n()),
      acc0(ctx.residues() * ctx.n()),
      acc1(ctx.residues() * ctx.n()) {}

void ApplyAutomorphismInto(const HeContext& ctx, const Ciphertext& ct, uint64_t galois_element,
                           const GaloisKeys& keys, Ciphertext& out, KeySwitchWorkspace& ws) {
  CheckCiphertextShape(ctx, ct);
  const size_t n = ctx.n();
  const size_t residues = ctx.residues();
  const KernelSet& kern = ctx.kernels();
  const auto& map = ctx.automorphism_map(galois_element);
  if (out.c0.data.size() != residues * n) out.c0 = ctx.zero_poly();
  if (out.c1.data.size() != residues * n) out.c1 = ctx.zero_poly();
  out.tag = NoiseTag::kDerived;
  if (galois_element % (2 * n) == 1) {
    out.c0 = ct.c0;
    out.c1 = ct.c1;
    return;
  }
  const KeySwitchKey& key = keys.at(galois_element);
  const size_t per_prime = ctx.params().digits_per_prime();
  Require(key.b.size() == per_prime * residues, ErrorCode::kMalformed,
          "key-switching key has the wrong digit count");

  for (size_t k = 0; k < residues; ++k) {
    kern.permute(out.c0.residue(k, n), ct.c0.residue(k, n), map.data(), n);
    kern.permute(ws.coeff.data() + k * n, ct.c1.residue(k, n), map.data(), n);
    kern.ntt_inverse(ws.coeff.data() + k * n, ctx.ntt(k));
  }
  std::fill(ws.acc0.begin(), ws.acc0.end(), 0);
  std::fill(ws.acc1.begin(), ws.acc1.end(), 0);

  const uint32_t log_b = ctx.params().decomp_log;
  const std::vector<uint64_t>& primes = ctx.params().cipher_primes;
  size_t pending = 0;  // lazy terms accumulated since the last reduction
  for (size_t i = 0; i < residues; ++i) {
    kern.decompose(ws.digit.data(), ws.coeff.data() + i * n, n, ctx.prime(i), log_b, per_prime,
                   primes.data(), residues);
    for (size_t j = 0; j < per_prime; ++j) {
      const size_t d = i * per_prime + j;
      if (pending + 1 > 7) {
        for (size_t k = 0; k < residues; ++k) {
          kern.reduce_16q(ws.acc0.data() + k * n, n, ctx.prime(k));
          kern.reduce_16q(ws.acc1.data() + k * n, n, ctx.prime(k));
        }
        pending = 0;
      }
      for (size_t k = 0; k < residues; ++k) {
        const uint64_t qk = ctx.prime(k);
        uint64_t* dig = ws.digit.data() + (j * residues + k) * n;
        kern.ntt_forward(dig, ctx.ntt(k));
        kern.mul_shoup_acc(ws.acc0.data() + k * n, dig, key.b[d].residue(k, n),
                           key.b_shoup[d].residue(k, n), n, qk);
        kern.mul_shoup_acc(ws.acc1.data() + k * n, dig, key.a[d].residue(k, n),
                           key.a_shoup[d].residue(k, n), n, qk);
      }
      ++pending;
    }
  }
  for (size_t k = 0; k < residues; ++k) {
    const uint64_t qk = ctx.prime(k);
    kern.reduce_16q(ws.acc0.data() + k * n, n, qk);
    kern.reduce_16q(ws.acc1.data() + k * n, n, qk);
    kern.add_mod(out.c0.residue(k, n), out.c0.residue(k, n), ws.acc0.data() + k * n, n, qk);
    std::copy_n(ws.acc1.data() + k * n, n, out.c1.residue(k, n));
  }
}

Ciphertext ApplyAutomorphism(const HeContext& ctx, const Ciphertext& ct, uint64_t galois_element,
                             const GaloisKeys& keys) {
  KeySwitchWorkspace ws(ctx);
  Ciphertext out;
  ApplyAutomorphismInto(ctx, ct, galois_element, keys, out, ws);
  return out;
}

size_t ExpansionRounds(size_t w) {
  Require(w >= 1, ErrorCode::kInvalidArgument, "expansion width must be at least 1");
  return static_cast<size_t>(std::bit_width(w - 1));
}

PlainPoly ExpansionQueryPlaintext(const HeContext& ctx, size_t offset, size_t w) {
  Require(w >= 1 && w <= ctx.n(), ErrorCode::kInvalidArgument, "expansion width out of range");
  Require(offset < w, ErrorCode::kInvalidArgument, "offset outside the expansion width");
  const uint64_t p = ctx.plain_modulus();
  PlainPoly pt;
  pt.coeffs.assign(ctx.n(), 0);
  pt.coeffs[offset] = InvMod(PowMod(2, ExpansionRounds(w), p), p);
  return pt;
}

size_t ObliviousExpandVisit(const HeContext& ctx, const Ciphertext& query, size_t w,
                            const GaloisKeys& keys,
                            const std::function<void(size_t, const Ciphertext&)>& visit) {
  Require(w >= 1 && w <= ctx.n(), ErrorCode::kInvalidArgument, "expansion width out of range");
  CheckCiphertextShape(ctx, query);
  const size_t rounds = ExpansionRounds(w);
  if (rounds == 0) {
    visit(0, query);
    return 0;
  }
  KeySwitchWorkspace ws(ctx);
  // Level j holds the node entering round j; level `rounds` is a leaf.
  // diff[j] keeps node - sigma for the right child of round j.
  std::vector<Ciphertext> level(rounds + 1), diff(rounds);
  for (size_t j = 1; j <= rounds; ++j) {
    level[j] = {ctx.zero_poly(), ctx.zero_poly(), NoiseTag::kDerived};
    diff[j - 1] = level[j];
  }
  level[0] = query;
  Ciphertext sigma{ctx.zero_poly(), ctx.zero_poly(), NoiseTag::kDerived};
  size_t automorphisms = 0;

  std::function<void(size_t, size_t)> descend = [&](size_t j, size_t b) {
    if (j == rounds) {
      visit(b, level[j]);
      return;
    }
    const Ciphertext& node = level[j];
    ApplyAutomorphismInto(ctx, node, ctx.expansion_element(j), keys, sigma, ws);
    ++automorphisms;
    const size_t right = b + (size_t{1} << j);
    const bool need_right = right < w;
    if (need_right) {
      SubPoly(ctx, diff[j].c0, node.c0, sigma.c0);
      SubPoly(ctx, diff[j].c1, node.c1, sigma.c1);
    }
    AddPoly(ctx, level[j + 1].c0, node.c0, sigma.c0);
    AddPoly(ctx, level[j + 1].c1, node.c1, sigma.c1);
    descend(j + 1, b);
    if (need_right) {
      const PreparedPlaintext& mono = ctx.inverse_monomial(j);
      Ciphertext& child = level[j + 1];
      MulPolyShoup(ctx, child.c0, diff[j].c0, mono.ntt, mono.shoup);
      MulPolyShoup(ctx, child.c1, diff[j].c1, mono.ntt, mono.shoup);
      descend(j + 1, right);
    }
  };
  descend(0, 0);
  return automorphisms;
}

PlainProductSum::PlainProductSum(const HeContext& ctx)
    : ctx_(ctx),
      acc0_(ctx.residues() * ctx.n(), 0),
      acc1_(ctx.residues() * ctx.n(), 0) {}

void PlainProductSum::add(const Ciphertext& ct, const PreparedPlaintext& pt) {
  CheckCiphertextShape(ctx_, ct);
  const size_t n = ctx_.n();
  const KernelSet& kern = ctx_.kernels();
  if (pending_ == 7) reduce();
  for (size_t k = 0; k < ctx_.residues(); ++k) {
    const uint64_t q = ctx_.prime(k);
    kern.mul_shoup_acc(acc0_.data() + k * n, ct.c0.residue(k, n), pt.ntt.residue(k, n),
                       pt.shoup.residue(k, n), n, q);
    kern.mul_shoup_acc(acc1_.data() + k * n, ct.c1.residue(k, n), pt.ntt.residue(k, n),
                       pt.shoup.residue(k, n), n, q);
  }
  ++pending_;
  ++terms_;
}

void PlainProductSum::reduce() {
  const size_t n = ctx_.n();
  for (size_t k = 0; k < ctx_.residues(); ++k) {
    ctx_.kernels().reduce_16q(acc0_.data() + k * n, n, ctx_.prime(k));
    ctx_.kernels().reduce_16q(acc1_.data() + k * n, n, ctx_.prime(k));
  }
  pending_ = 0;
}

Ciphertext PlainProductSum::finish() {
  reduce();
  Ciphertext out{RnsPoly{acc0_}, RnsPoly{acc1_}, NoiseTag::kDerived};
  std::fill(acc0_.begin(), acc0_.end(), 0);
  std::fill(acc1_.begin(), acc1_.end(), 0);
  terms_ = 0;
  return out;
}

std::vector<Ciphertext> ObliviousExpand(const HeContext& ctx, const Ciphertext& query, size_t w,
                                        const GaloisKeys& keys) {
  std::vector<Ciphertext> out(w);
  ObliviousExpandVisit(ctx, query, w, keys,
                       [&](size_t k, const Ciphertext& ct) { out[k] = ct; });
  return out;
}

void AppendCiphertext(const HeContext& ctx, const Ciphertext& ct, ByteWriter& w) {
  CheckCiphertextShape(ctx, ct);
  w.u64(ctx.params().hash());
  WritePoly(w, ct.c0);
  WritePoly(w, ct.c1);
}

Bytes SerializeCiphertext(const HeContext& ctx, const Ciphertext& ct) {
  ByteWriter w(ctx.ciphertext_bytes());
  AppendCiphertext(ctx, ct, w);
  return std::move(w).take();
}

Ciphertext DeserializeCiphertext(const HeContext& ctx, std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.u64() != ctx.params().hash()) {
    Fail(ErrorCode::kVersionMismatch, "ciphertext built for different parameters");
  }
  Ciphertext ct;
  ct.c0 = ReadPoly(ctx, r);
  ct.c1 = ReadPoly(ctx, r);
  ct.tag = NoiseTag::kDerived;
  r.expect_done("ciphertext");
  return ct;
}

Bytes SerializeGaloisKeys(const HeContext& ctx, const GaloisKeys& keys) {
  ByteWriter w;
  w.u64(ctx.params().hash());
  w.u32(static_cast<uint32_t>(keys.keys.size()));
  for (const auto& [g, key] : keys.keys) {
    w.u64(g);
    w.u32(static_cast<uint32_t>(key.b.size()));
    for (size_t d = 0; d < key.b.size(); ++d) {
      WritePoly(w, key.b[d]);
      WritePoly(w, key.a[d]);
    }
  }
  return std::move(w).take();
}

GaloisKeys DeserializeGaloisKeys(const HeContext& ctx, std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.u64() != ctx.params().hash()) {
    Fail(ErrorCode::kVersionMismatch, "Galois keys built for different parameters");
  }
  const uint32_t count = r.u32();
  if (count > 64) Fail(ErrorCode::kMalformed, "too many Galois keys");
  GaloisKeys out;
  for (uint32_t i = 0; i < count; ++i) {
    KeySwitchKey key;
    key.galois_element = r.u64();
    if ((key.galois_element & 1) == 0) Fail(ErrorCode::kMalformed, "even Galois element");
    const uint32_t digits = r.u32();
    if (digits != ctx.params().digit_count()) Fail(ErrorCode::kMalformed, "bad digit count");
    for (uint32_t d = 0; d < digits; ++d) {
      key.b.push_back(ReadPoly(ctx, r));
      key.a.push_back(ReadPoly(ctx, r));
      key.b_shoup.push_back(ShoupCompanion(ctx, key.b.back()));
      key.a_shoup.push_back(ShoupCompanion(ctx, key.a.back()));
    }
    ctx.automorphism_map(key.galois_element);
    out.keys.emplace(key.galois_element, std::move(key));
  }
  r.expect_done("Galois keys");
  return out;
}

PlainPoly PlainSubstitute(const PlainPoly& pt, uint64_t galois_element, uint64_t p) {
  const size_t n = pt.coeffs.size();
  PlainPoly out;
  out.coeffs.assign(n, 0);
  for (size_t i = 0; i < n; ++i) {
    const uint64_t e = static_cast<uint64_t>(i) * galois_element % (2 * n);
    if (e < n) {
      out.coeffs[e] = AddMod(out.coeffs[e], pt.coeffs[i], p);
    } else {
      out.coeffs[e - n] = SubMod(out.coeffs[e - n], pt.coeffs[i], p);
    }
  }
  return out;
}

PlainPoly PlainNegacyclicMul(const PlainPoly& a, const PlainPoly& b, uint64_t p) {
  const size_t n = a.coeffs.size();
  PlainPoly out;
  out.coeffs.assign(n, 0);
  for (size_t i = 0; i < n; ++i) {
    if (a.coeffs[i] == 0) continue;
    for (size_t j = 0; j < n; ++j) {
      const uint64_t prod = MulMod(a.coeffs[i], b.coeffs[j], p);
      const size_t k = i + j;
      if (k < n) {
        out.coeffs[k] = AddMod(out.coeffs[k], prod, p);
      } else {
        out.coeffs[k - n] = SubMod(out.coeffs[k - n], prod, p);
      }
    }
  }
  return out;
}

}  // namespace rangepir::he
