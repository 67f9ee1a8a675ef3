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

#include "rangepir/varpir/varpir.hpp"

#include <algorithm>
#include <bit>

namespace rangepir::varpir {

EncodingParams EncodingParams::Derive(const he::HeParams& he, size_t pair_bytes, uint64_t n,
                                      std::optional<uint32_t> overlap) {
  Require(pair_bytes > 8, ErrorCode::kInvalidArgument, "pairs need a key and a value");
  Require(n >= 1, ErrorCode::kInvalidArgument, "store is empty");
  EncodingParams p;
  p.limb_bits = he.limb_bits();
  p.slots_per_pair = static_cast<uint32_t>((8 * pair_bytes + p.limb_bits - 1) / p.limb_bits);
  p.m = static_cast<uint32_t>(he.ring_degree / p.slots_per_pair);
  p.overlap = overlap.value_or(p.m / 2);
  Require(p.m >= 2 && p.overlap < p.m, ErrorCode::kInvalidArgument,
          "plaintext too small for two pairs");
  p.step = p.m - p.overlap;
  p.pt_count = (n + p.step - 1) / p.step;
  p.n = n;
  p.pair_bytes = static_cast<uint32_t>(pair_bytes);
  p.ring_degree = static_cast<uint32_t>(he.ring_degree);
  return p;
}

void EncodingParams::validate(uint32_t eps_data) const {
  Require(step >= 1 && m >= 2, ErrorCode::kInvalidArgument, "degenerate encoding");
  Require(fits(eps_data), ErrorCode::kInvalidArgument,
          "predicted window does not fit one plaintext: need 2*eps_data+1 < overlap+2");
}

std::pair<uint64_t, uint64_t> EncodingParams::covering(uint64_t pos) const {
  const uint64_t hi = PosToPtId(pos, *this);
  const uint64_t lo = pos + 1 > m ? (pos + 1 - m + step - 1) / step : 0;
  return {lo, hi};
}

uint64_t PosToPtId(uint64_t pos, const EncodingParams& params) {
  return std::min(pos / params.step, params.pt_count - 1);
}

void PairToLimbs(std::span<const uint8_t> pair, uint32_t limb_bits, std::span<uint64_t> limbs) {
  const size_t total_bits = pair.size() * 8;
  size_t bit = 0;
  for (uint64_t& limb : limbs) {
    limb = 0;
    const size_t end = std::min(total_bits, bit + limb_bits);
    for (; bit < end; ++bit) {
      limb = limb << 1 | ((pair[bit / 8] >> (7 - bit % 8)) & 1);
    }
  }
}

void LimbsToPair(std::span<const uint64_t> limbs, uint32_t limb_bits, std::span<uint8_t> pair) {
  const size_t total_bits = pair.size() * 8;
  std::fill(pair.begin(), pair.end(), 0);
  size_t bit = 0;
  for (uint64_t limb : limbs) {
    const size_t width = std::min<size_t>(limb_bits, total_bits - bit);
    for (size_t i = 0; i < width; ++i, ++bit) {
      if ((limb >> (width - 1 - i)) & 1) pair[bit / 8] |= static_cast<uint8_t>(0x80 >> (bit % 8));
    }
  }
}

he::PlainPoly EncodePlaintext(const store::KvStore& kv, const EncodingParams& params,
                              uint64_t pt_id) {
  Require(kv.pair_bytes() == params.pair_bytes, ErrorCode::kInvalidArgument,
          "store pair width differs from the encoding");
  he::PlainPoly pt;
  pt.coeffs.assign(params.ring_degree, 0);
  std::vector<uint8_t> pair(params.pair_bytes);
  for (uint32_t s = 0; s < params.m; ++s) {
    const uint64_t pos = params.first_position(pt_id) + s;
    if (pos < kv.size()) {
      kv.write_pair(pos, pair.data());
    } else {
      std::fill(pair.begin(), pair.end(), 0);
      store::WriteKeyBigEndian(store::kSentinelKey, pair.data());
    }
    PairToLimbs(pair, params.limb_bits,
                std::span(pt.coeffs).subspan(size_t{s} * params.slots_per_pair,
                                             params.slots_per_pair));
  }
  return pt;
}

EncodedStore::EncodedStore(std::shared_ptr<const he::HeContext> ctx, const store::KvStore& kv,
                           uint32_t eps_data, std::optional<uint32_t> overlap)
    : ctx_(std::move(ctx)),
      params_(EncodingParams::Derive(ctx_->params(), kv.pair_bytes(), kv.size(), overlap)),
      eps_data_(eps_data),
      version_id_(kv.version_id()) {
  kv.validate_servable();
  params_.validate(eps_data);
  blocks_.resize(params_.pt_count);
  locks_ = std::make_unique<std::shared_mutex[]>(params_.pt_count);
  touches_ = std::make_unique<std::atomic<uint64_t>[]>(params_.pt_count);
  for (uint64_t j = 0; j < params_.pt_count; ++j) reencode(kv, j);
}

EncodedStore::EncodedStore(const EncodedStore& previous, const store::KvStore& kv,
                           uint64_t first_changed_pt)
    : ctx_(previous.ctx_),
      params_(EncodingParams::Derive(ctx_->params(), kv.pair_bytes(), kv.size(),
                                     previous.params_.overlap)),
      eps_data_(previous.eps_data_),
      version_id_(kv.version_id()) {
  kv.validate_servable();
  params_.validate(eps_data_);
  Require(params_.m == previous.params_.m && params_.step == previous.params_.step,
          ErrorCode::kInvalidArgument, "layout changed between versions");
  blocks_.resize(params_.pt_count);
  locks_ = std::make_unique<std::shared_mutex[]>(params_.pt_count);
  touches_ = std::make_unique<std::atomic<uint64_t>[]>(params_.pt_count);
  for (uint64_t j = 0; j < params_.pt_count; ++j) {
    if (j < first_changed_pt && j < previous.params_.pt_count) {
      std::shared_lock guard(previous.lock(j));
      blocks_[j] = previous.blocks_[j];
    } else {
      reencode(kv, j);
    }
  }
}

std::shared_ptr<const he::PreparedPlaintext> EncodedStore::block(uint64_t pt_id) const {
  Require(pt_id < params_.pt_count, ErrorCode::kInvalidArgument, "plaintext id out of range");
  return blocks_[pt_id];
}

void EncodedStore::reencode(const store::KvStore& kv, uint64_t pt_id) {
  blocks_[pt_id] = std::make_shared<const he::PreparedPlaintext>(
      he::PreparePlaintext(*ctx_, EncodePlaintext(kv, params_, pt_id)));
}

void EncodedStore::reset_touches() const {
  for (uint64_t j = 0; j < params_.pt_count; ++j) touches_[j].store(0);
}

PtRange PlaintextRange(const dldp::ObfuscatedRange& obf, const EncodingParams& params) {
  Require(obf.n == params.n, ErrorCode::kInvalidArgument, "range built for another store size");
  const uint64_t count = params.pt_count;
  const PtRange full{0, count - 1, count};
  switch (obf.kind) {
    case dldp::RangeKind::kFull: return full;
    case dldp::RangeKind::kContiguous: {
      const uint64_t l = PosToPtId(obf.l, params);
      const uint64_t r = PosToPtId(obf.r, params);
      return {l, r, r - l + 1};
    }
    case dldp::RangeKind::kWrapped: {
      const uint64_t l = PosToPtId(obf.l, params);
      const uint64_t r = PosToPtId(obf.r, params);
      if (r + 1 >= l) return full;
      return {l, r, count - l + r + 1};
    }
  }
  return full;
}

std::optional<uint64_t> OffsetInRange(const PtRange& range, uint64_t pt_id, uint64_t pt_count) {
  const uint64_t offset = (pt_id + pt_count - range.l_pt) % pt_count;
  if (offset < range.w_pt) return offset;
  return std::nullopt;
}

size_t QueryCiphertextCount(uint64_t w_pt, size_t ring_degree) {
  return static_cast<size_t>((w_pt + ring_degree - 1) / ring_degree);
}

VarPirQuery BuildQuery(const he::HeContext& ctx, const pgm::PredictedRange& pred,
                       const dldp::ObfuscatedRange& obf, const EncodingParams& params,
                       uint64_t version_id, const he::SecretKey& sk, SecureRng& rng) {
  Require(obf.covers(pred.lo, pred.hi), ErrorCode::kInvalidArgument,
          "obfuscated range does not cover the predicted range");
  VarPirQuery q;
  q.version_id = version_id;
  q.range = PlaintextRange(obf, params);
  const uint64_t target = PosToPtId(pred.lo, params);
  const auto offset = OffsetInRange(q.range, target, params.pt_count);
  Require(offset.has_value(), ErrorCode::kInternal, "target plaintext outside the run");
  const size_t n = ctx.n();
  const size_t blocks = QueryCiphertextCount(q.range.w_pt, n);
  for (size_t b = 0; b < blocks; ++b) {
    const uint64_t width = std::min<uint64_t>(n, q.range.w_pt - b * n);
    he::PlainPoly pt;
    if (*offset / n == b) {
      pt = he::ExpansionQueryPlaintext(ctx, *offset % n, width);
    } else {
      pt.coeffs.assign(n, 0);
    }
    q.cts.push_back(he::Encrypt(ctx, pt, sk, rng));
  }
  return q;
}

he::Ciphertext Answer(const EncodedStore& enc, const VarPirQuery& query,
                      const he::GaloisKeys& keys, AnswerStats* stats) {
  if (query.version_id != enc.version_id()) {
    Fail(ErrorCode::kStaleVersion, "query built for version " +
                                       std::to_string(query.version_id) + ", serving " +
                                       std::to_string(enc.version_id()));
  }
  const EncodingParams& params = enc.params();
  const he::HeContext& ctx = enc.context();
  const PtRange& range = query.range;
  Require(range.w_pt >= 1 && range.w_pt <= params.pt_count && range.l_pt < params.pt_count,
          ErrorCode::kInvalidArgument, "plaintext run outside the store");
  Require((range.l_pt + range.w_pt - 1) % params.pt_count == range.r_pt,
          ErrorCode::kInvalidArgument, "plaintext run endpoints disagree with its width");
  const size_t n = ctx.n();
  Require(query.cts.size() == QueryCiphertextCount(range.w_pt, n), ErrorCode::kInvalidArgument,
          "query ciphertext count does not match the plaintext run");

  he::PlainProductSum sum(ctx);
  AnswerStats local;
  for (size_t b = 0; b < query.cts.size(); ++b) {
    const uint64_t width = std::min<uint64_t>(n, range.w_pt - b * n);
    local.automorphisms += he::ObliviousExpandVisit(
        ctx, query.cts[b], width, keys, [&](size_t k, const he::Ciphertext& ct) {
          const uint64_t pt_id = range.at(b * n + k, params.pt_count);
          std::shared_lock guard(enc.lock(pt_id));
          sum.add(ct, *enc.block(pt_id));
          enc.touch(pt_id);
          ++local.products;
        });
  }
  if (stats) *stats = local;
  return sum.finish();
}

std::vector<DecodedPair> DecodePlaintext(const he::PlainPoly& pt, const EncodingParams& params,
                                         uint64_t pt_id) {
  Require(pt.coeffs.size() == params.ring_degree, ErrorCode::kMalformed,
          "plaintext length mismatch");
  std::vector<DecodedPair> out;
  std::vector<uint8_t> pair(params.pair_bytes);
  for (uint32_t s = 0; s < params.m; ++s) {
    LimbsToPair(std::span(pt.coeffs).subspan(size_t{s} * params.slots_per_pair,
                                             params.slots_per_pair),
                params.limb_bits, pair);
    const uint64_t key = store::PairKey(pair);
    if (key == store::kSentinelKey) continue;
    out.push_back({params.first_position(pt_id) + s, key,
                   std::vector<uint8_t>(pair.begin() + 8, pair.end())});
  }
  return out;
}

std::optional<std::vector<uint8_t>> DecodeAnswer(const he::PlainPoly& pt,
                                                 const pgm::PredictedRange& pred,
                                                 const EncodingParams& params, uint64_t key) {
  const uint64_t pt_id = PosToPtId(pred.lo, params);
  const auto pairs = DecodePlaintext(pt, params, pt_id);
  auto first = std::lower_bound(pairs.begin(), pairs.end(), pred.lo,
                                [](const DecodedPair& p, uint64_t pos) { return p.position < pos; });
  auto last = std::upper_bound(first, pairs.end(), pred.hi,
                               [](uint64_t pos, const DecodedPair& p) { return pos < p.position; });
  auto it = std::lower_bound(first, last, key,
                             [](const DecodedPair& p, uint64_t k) { return p.key < k; });
  if (it != last && it->key == key) return it->value;
  return std::nullopt;
}

}  // namespace rangepir::varpir
