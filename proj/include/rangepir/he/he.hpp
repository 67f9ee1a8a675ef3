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
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "rangepir/common/bytes.hpp"
#include "rangepir/common/rng.hpp"
#include "rangepir/he/kernels.hpp"
#include "rangepir/he/modarith.hpp"
#include "rangepir/he/ntt.hpp"
#include "rangepir/he/params.hpp"

namespace rangepir::he {

// Polynomial of degree < N with coefficients in [0, p).
struct PlainPoly {
  std::vector<uint64_t> coeffs;

  friend bool operator==(const PlainPoly&, const PlainPoly&) = default;
};

// Residues of a polynomial modulo each cipher prime, residue-major
// (residue k occupies words [k*N, (k+1)*N)).
struct RnsPoly {
  std::vector<uint64_t> data;

  uint64_t* residue(size_t k, size_t n) { return data.data() + k * n; }
  const uint64_t* residue(size_t k, size_t n) const { return data.data() + k * n; }

  friend bool operator==(const RnsPoly&, const RnsPoly&) = default;
};

enum class NoiseTag : uint8_t { kFresh = 0, kDerived = 1 };

// Both components are kept in the NTT domain.
struct Ciphertext {
  RnsPoly c0;
  RnsPoly c1;
  NoiseTag tag = NoiseTag::kFresh;
};

// Plaintext lifted to the cipher primes and transformed, ready for
// mul_plain. `shoup` holds the 52-bit Shoup companions of `ntt`.
struct PreparedPlaintext {
  RnsPoly ntt;
  RnsPoly shoup;
};

struct SecretKey {
  std::vector<int8_t> ternary;  // coefficients in {-1, 0, 1}
  RnsPoly ntt;
  RnsPoly shoup;
};

// Key-switching key from sigma_g(s) to s: one (b, a) pair per gadget digit.
// b_d = -a_d * s + e_d + g_d * sigma_g(s), where g_d is B^j on prime i and 0
// on the other primes.
struct KeySwitchKey {
  uint64_t galois_element = 1;
  std::vector<RnsPoly> b, a;
  std::vector<RnsPoly> b_shoup, a_shoup;
};

struct GaloisKeys {
  std::map<uint64_t, KeySwitchKey> keys;

  bool has(uint64_t element) const { return keys.count(element) != 0; }
  const KeySwitchKey& at(uint64_t element) const;
};

class HeContext {
 public:
  explicit HeContext(HeParams params);

  const HeParams& params() const { return params_; }
  size_t n() const { return params_.ring_degree; }
  size_t residues() const { return params_.cipher_primes.size(); }
  uint64_t prime(size_t k) const { return params_.cipher_primes[k]; }
  uint64_t plain_modulus() const { return params_.plain_modulus; }
  const NttTables& ntt(size_t k) const { return *ntt_[k]; }
  const KernelSet& kernels() const { return *kernels_; }
  // Overrides the dispatched kernels (used by equivalence tests).
  void set_kernels(const KernelSet& k) { kernels_ = &k; }

  // floor(Q / p) and its residues.
  u128 delta() const { return delta_; }
  uint64_t delta_mod(size_t k) const { return delta_mod_[k]; }
  u128 modulus_product() const { return q_product_; }
  // log2(delta / 2): budget of a noiseless ciphertext.
  double max_budget_bits() const;

  // Galois elements used by oblivious expansion: N/2^j + 1, j = 0..logN-1.
  uint64_t expansion_element(size_t j) const { return (n() >> j) + 1; }
  std::vector<uint64_t> expansion_elements() const;
  // NTT-domain index map of x -> x^g (g odd): out[i] = in[map[i]].
  const std::vector<uint32_t>& automorphism_map(uint64_t g) const;
  // NTT of x^(-2^j) per residue with Shoup companions.
  const PreparedPlaintext& inverse_monomial(size_t j) const { return inv_monomials_[j]; }

  RnsPoly zero_poly() const { return RnsPoly{std::vector<uint64_t>(residues() * n(), 0)}; }
  size_t ciphertext_bytes() const { return 8 + 2 * residues() * n() * 8; }

 private:
  HeParams params_;
  std::vector<std::unique_ptr<NttTables>> ntt_;
  const KernelSet* kernels_;
  u128 q_product_ = 0;
  u128 delta_ = 0;
  std::vector<uint64_t> delta_mod_;
  std::map<uint64_t, std::vector<uint32_t>> automorphism_maps_;
  std::vector<PreparedPlaintext> inv_monomials_;
};

// Polynomial helpers on RnsPoly in the NTT domain.
void NttForward(const HeContext& ctx, RnsPoly& poly);
void NttInverse(const HeContext& ctx, RnsPoly& poly);
// Signed small integers to residues, in the coefficient domain.
RnsPoly LiftSigned(const HeContext& ctx, std::span<const int64_t> coeffs);
// Shoup companions of a poly whose words are in [0, q_k).
RnsPoly ShoupCompanion(const HeContext& ctx, const RnsPoly& poly);

SecretKey KeyGen(const HeContext& ctx, SecureRng& rng);
GaloisKeys GenGaloisKeys(const HeContext& ctx, const SecretKey& sk, SecureRng& rng,
                         std::span<const uint64_t> elements);
// All expansion elements.
GaloisKeys GenGaloisKeys(const HeContext& ctx, const SecretKey& sk, SecureRng& rng);

Ciphertext Encrypt(const HeContext& ctx, const PlainPoly& pt, const SecretKey& sk,
                   SecureRng& rng);
PlainPoly Decrypt(const HeContext& ctx, const Ciphertext& ct, const SecretKey& sk);
// log2(delta/2) - log2(max |noise|); <= 0 means decryption may fail.
double NoiseBudget(const HeContext& ctx, const Ciphertext& ct, const SecretKey& sk);

Ciphertext Add(const HeContext& ctx, const Ciphertext& a, const Ciphertext& b);
Ciphertext Sub(const HeContext& ctx, const Ciphertext& a, const Ciphertext& b);
void AddInPlace(const HeContext& ctx, Ciphertext& a, const Ciphertext& b);

PreparedPlaintext PreparePlaintext(const HeContext& ctx, const PlainPoly& pt);
Ciphertext MulPlain(const HeContext& ctx, const Ciphertext& ct, const PreparedPlaintext& pt);
Ciphertext MulPlain(const HeContext& ctx, const Ciphertext& ct, const PlainPoly& pt);

// Running sum of ciphertext-plaintext products with lazy modular reduction.
class PlainProductSum {
 public:
  explicit PlainProductSum(const HeContext& ctx);
  void add(const Ciphertext& ct, const PreparedPlaintext& pt);
  size_t terms() const { return terms_; }
  // Returns the sum and resets to zero.
  Ciphertext finish();

 private:
  void reduce();

  const HeContext& ctx_;
  std::vector<uint64_t> acc0_, acc1_;
  size_t pending_ = 0;
  size_t terms_ = 0;
};

// Reusable scratch space for key switching.
class KeySwitchWorkspace {
 public:
  explicit KeySwitchWorkspace(const HeContext& ctx);

 private:
  friend void ApplyAutomorphismInto(const HeContext&, const Ciphertext&, uint64_t,
                                    const GaloisKeys&, Ciphertext&, KeySwitchWorkspace&);
  std::vector<uint64_t> coeff, digit, acc0, acc1;
};

Ciphertext ApplyAutomorphism(const HeContext& ctx, const Ciphertext& ct, uint64_t galois_element,
                             const GaloisKeys& keys);
// out must not alias ct.
void ApplyAutomorphismInto(const HeContext& ctx, const Ciphertext& ct, uint64_t galois_element,
                           const GaloisKeys& keys, Ciphertext& out, KeySwitchWorkspace& ws);

// ceil(log2 w), w >= 1.
size_t ExpansionRounds(size_t w);
// Query plaintext for oblivious expansion: inv(2^rounds) mod p at `offset`.
PlainPoly ExpansionQueryPlaintext(const HeContext& ctx, size_t offset, size_t w);

// Depth-first oblivious expansion. Calls visit(k, ct_k) once for each
// k in [0, w), in an order fixed by w alone; subtrees holding only indices
// >= w are never computed. Returns the number of automorphisms applied.
size_t ObliviousExpandVisit(const HeContext& ctx, const Ciphertext& query, size_t w,
                            const GaloisKeys& keys,
                            const std::function<void(size_t, const Ciphertext&)>& visit);
std::vector<Ciphertext> ObliviousExpand(const HeContext& ctx, const Ciphertext& query, size_t w,
                                        const GaloisKeys& keys);

// Wire formats. Ciphertext: params hash u64, then c0 and c1 as
// (residues * N) little-endian u64 words in the NTT domain.
Bytes SerializeCiphertext(const HeContext& ctx, const Ciphertext& ct);
void AppendCiphertext(const HeContext& ctx, const Ciphertext& ct, ByteWriter& w);
Ciphertext DeserializeCiphertext(const HeContext& ctx, std::span<const uint8_t> bytes);

// params hash u64, key count u32, then per key: element u64, digit count
// u32, and per digit the b and a polynomials as above.
Bytes SerializeGaloisKeys(const HeContext& ctx, const GaloisKeys& keys);
GaloisKeys DeserializeGaloisKeys(const HeContext& ctx, std::span<const uint8_t> bytes);

// Plaintext-side oracles.
PlainPoly PlainSubstitute(const PlainPoly& pt, uint64_t galois_element, uint64_t p);
PlainPoly PlainNegacyclicMul(const PlainPoly& a, const PlainPoly& b, uint64_t p);

}  // namespace rangepir::he
