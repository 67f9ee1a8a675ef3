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

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <vector>

#include "rangepir/dldp/dldp.hpp"
#include "rangepir/he/he.hpp"
#include "rangepir/pgm/pgm_index.hpp"
#include "rangepir/store/kv_store.hpp"

namespace rangepir::varpir {

// Layout of the store inside homomorphic plaintexts. Plaintext j carries the
// pairs at positions [j*step, j*step + m); consecutive plaintexts overlap by
// `overlap` pairs.
struct EncodingParams {
  uint32_t limb_bits = 0;
  uint32_t slots_per_pair = 0;
  uint32_t m = 0;
  uint32_t overlap = 0;
  uint32_t step = 0;
  uint64_t pt_count = 0;
  uint64_t n = 0;
  uint32_t pair_bytes = 0;
  uint32_t ring_degree = 0;

  // limb_bits = floor(log2 p), slots = ceil(8*pair_bytes / limb_bits),
  // m = floor(N / slots), overlap = floor(m/2) unless given.
  static EncodingParams Derive(const he::HeParams& he, size_t pair_bytes, uint64_t n,
                               std::optional<uint32_t> overlap = std::nullopt);

  // 2*eps_data + 1 < overlap + 2: any clamped predicted window fits in the
  // plaintext of its lower end.
  bool fits(uint32_t eps_data) const { return 2 * uint64_t{eps_data} + 1 < uint64_t{overlap} + 2; }
  // Throws kInvalidArgument unless step >= 1, m >= 2 and the fit holds.
  void validate(uint32_t eps_data) const;

  uint64_t first_position(uint64_t pt_id) const { return pt_id * step; }
  // Plaintext IDs whose coverage contains pos, inclusive.
  std::pair<uint64_t, uint64_t> covering(uint64_t pos) const;

  friend bool operator==(const EncodingParams&, const EncodingParams&) = default;
};

// min(floor(pos / step), pt_count - 1).
uint64_t PosToPtId(uint64_t pos, const EncodingParams& params);

// Splits a canonical pair into slots_per_pair big-endian limbs; the final
// limb holds the leftover low bits.
void PairToLimbs(std::span<const uint8_t> pair, uint32_t limb_bits, std::span<uint64_t> limbs);
void LimbsToPair(std::span<const uint64_t> limbs, uint32_t limb_bits, std::span<uint8_t> pair);

// Coefficient form of plaintext pt_id. Positions past the store hold
// sentinel pairs (all-ones key, zero value).
he::PlainPoly EncodePlaintext(const store::KvStore& kv, const EncodingParams& params,
                              uint64_t pt_id);

// Transformed plaintexts of one store version with per-block reader/writer
// locks. Blocks are shared between versions until rewritten.
class EncodedStore {
 public:
  EncodedStore(std::shared_ptr<const he::HeContext> ctx, const store::KvStore& kv,
               uint32_t eps_data, std::optional<uint32_t> overlap = std::nullopt);
  // Re-encodes only plaintexts at or after first_changed_pt and shares the
  // rest with `previous` (same layout parameters required).
  EncodedStore(const EncodedStore& previous, const store::KvStore& kv,
               uint64_t first_changed_pt);

  const EncodingParams& params() const { return params_; }
  const he::HeContext& context() const { return *ctx_; }
  uint64_t version_id() const { return version_id_; }
  uint32_t eps_data() const { return eps_data_; }

  std::shared_ptr<const he::PreparedPlaintext> block(uint64_t pt_id) const;
  // Rebuilds plaintext pt_id from kv. Caller holds the block's exclusive lock.
  void reencode(const store::KvStore& kv, uint64_t pt_id);
  std::shared_mutex& lock(uint64_t pt_id) const { return locks_[pt_id]; }

  // Instrumentation: times each plaintext was used by an answer.
  uint64_t touches(uint64_t pt_id) const { return touches_[pt_id].load(); }
  void reset_touches() const;
  void touch(uint64_t pt_id) const { touches_[pt_id].fetch_add(1, std::memory_order_relaxed); }

 private:
  std::shared_ptr<const he::HeContext> ctx_;
  EncodingParams params_;
  uint32_t eps_data_ = 0;
  uint64_t version_id_ = 0;
  std::vector<std::shared_ptr<const he::PreparedPlaintext>> blocks_;
  std::unique_ptr<std::shared_mutex[]> locks_;
  std::unique_ptr<std::atomic<uint64_t>[]> touches_;
};

// Cyclic run of plaintext IDs l_pt, l_pt+1, ... covering w_pt plaintexts.
struct PtRange {
  uint64_t l_pt = 0;
  uint64_t r_pt = 0;
  uint64_t w_pt = 0;

  uint64_t at(uint64_t k, uint64_t pt_count) const { return (l_pt + k) % pt_count; }
  friend bool operator==(const PtRange&, const PtRange&) = default;
};

// Plaintext IDs spanned by an obfuscated range. A wrapped range whose two
// pieces meet in plaintext space becomes the full cycle.
PtRange PlaintextRange(const dldp::ObfuscatedRange& obf, const EncodingParams& params);
// Offset of pt_id inside the cyclic run, or nullopt when not covered.
std::optional<uint64_t> OffsetInRange(const PtRange& range, uint64_t pt_id, uint64_t pt_count);
// Number of query ciphertexts: ceil(w_pt / N).
size_t QueryCiphertextCount(uint64_t w_pt, size_t ring_degree);

struct VarPirQuery {
  uint64_t version_id = 0;
  PtRange range;
  std::vector<he::Ciphertext> cts;
};

// Client side: the target plaintext is PosToPtId(pred.lo).
VarPirQuery BuildQuery(const he::HeContext& ctx, const pgm::PredictedRange& pred,
                       const dldp::ObfuscatedRange& obf, const EncodingParams& params,
                       uint64_t version_id, const he::SecretKey& sk, SecureRng& rng);

struct AnswerStats {
  size_t automorphisms = 0;
  size_t products = 0;
};

// Server side: every plaintext in the run is multiplied exactly once.
he::Ciphertext Answer(const EncodedStore& enc, const VarPirQuery& query,
                      const he::GaloisKeys& keys, AnswerStats* stats = nullptr);

// Pairs held by a decrypted plaintext, sentinels removed.
struct DecodedPair {
  uint64_t position = 0;
  uint64_t key = 0;
  std::vector<uint8_t> value;
};
std::vector<DecodedPair> DecodePlaintext(const he::PlainPoly& pt, const EncodingParams& params,
                                         uint64_t pt_id);

// Looks up key among the predicted window of the decrypted target plaintext.
std::optional<std::vector<uint8_t>> DecodeAnswer(const he::PlainPoly& pt,
                                                 const pgm::PredictedRange& pred,
                                                 const EncodingParams& params, uint64_t key);

}  // namespace rangepir::varpir
