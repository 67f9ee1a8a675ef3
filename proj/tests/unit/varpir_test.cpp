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

#include <gtest/gtest.h>

#include <set>

#include "rangepir/store/dataset.hpp"
#include "rangepir/varpir/varpir.hpp"

namespace rangepir::varpir {
namespace {

using he::HeContext;
using he::HeParams;

std::shared_ptr<const HeContext> SmallContext() {
  HeParams p;
  p.ring_degree = 32;
  return std::make_shared<const HeContext>(p);
}

// 12 pairs of 20 bytes on N = 32: 8 limbs per pair, 4 pairs per plaintext.
store::KvStore TwelvePairStore() {
  std::vector<uint64_t> keys;
  for (uint64_t i = 0; i < 12; ++i) keys.push_back(100 + 10 * i);
  return store::StoreFromKeys(keys, 12);
}

TEST(EncodingParams, DefaultsForSixteenBytePairs) {
  const EncodingParams p = EncodingParams::Derive(HeParams{}, 16, 1 << 20);
  EXPECT_EQ(p.limb_bits, 20u);
  EXPECT_EQ(p.slots_per_pair, 7u);
  EXPECT_EQ(p.m, 585u);
  EXPECT_EQ(p.overlap, 292u);
  EXPECT_EQ(p.step, 293u);
  EXPECT_EQ(p.pt_count, ((1u << 20) + 292) / 293);
  EXPECT_TRUE(p.fits(64));
  EXPECT_TRUE(p.fits(146));
  EXPECT_FALSE(p.fits(147));
  EXPECT_THROW(p.validate(147), Error);
}

TEST(EncodingParams, SmallRingLayout) {
  HeParams he;
  he.ring_degree = 32;
  const EncodingParams p = EncodingParams::Derive(he, 20, 12);
  EXPECT_EQ(p.m, 4u);
  EXPECT_EQ(p.step, 2u);
  EXPECT_EQ(p.pt_count, 6u);
  EXPECT_EQ(PosToPtId(5, p), 2u);
  EXPECT_EQ(PosToPtId(11, p), 5u);
  EXPECT_EQ(PosToPtId(0, p), 0u);
  for (uint64_t j = 0; j < p.pt_count; ++j) EXPECT_EQ(p.first_position(j), 2 * j);
}

TEST(EncodingParams, CoveringMatchesBruteForce) {
  for (auto [n, overlap] : {std::pair<uint64_t, uint32_t>{1000, 292}, {1000, 100}, {77, 0}}) {
    const EncodingParams p = EncodingParams::Derive(HeParams{}, 16, n, overlap);
    for (uint64_t pos = 0; pos < n; ++pos) {
      uint64_t lo = ~uint64_t{0}, hi = 0;
      for (uint64_t j = 0; j < p.pt_count; ++j) {
        if (p.first_position(j) <= pos && pos < p.first_position(j) + p.m) {
          lo = std::min(lo, j);
          hi = std::max(hi, j);
        }
      }
      EXPECT_EQ(p.covering(pos), std::make_pair(lo, hi)) << pos;
    }
  }
}

TEST(EncodingParams, PredictedWindowFitsOnePlaintext) {
  const uint64_t n = 100000;
  const EncodingParams p = EncodingParams::Derive(HeParams{}, 16, n);
  for (uint64_t pos = 0; pos < n; ++pos) {
    const uint64_t lo = pos >= 64 ? pos - 64 : 0;
    const uint64_t hi = std::min(n - 1, pos + 64);
    const uint64_t j = PosToPtId(lo, p);
    ASSERT_EQ(j, std::min(lo / p.step, p.pt_count - 1));
    ASSERT_GE(lo, p.first_position(j));
    ASSERT_LT(hi, p.first_position(j) + p.m) << pos;
  }
}

TEST(Limbs, RoundTrip) {
  SecureRng rng(5);
  for (size_t bytes : {16u, 20u, 24u, 72u}) {
    for (int trial = 0; trial < 2500; ++trial) {
      std::vector<uint8_t> pair(bytes), back(bytes);
      for (auto& b : pair) b = static_cast<uint8_t>(rng());
      std::vector<uint64_t> limbs((bytes * 8 + 19) / 20);
      PairToLimbs(pair, 20, limbs);
      for (uint64_t l : limbs) ASSERT_LT(l, uint64_t{1} << 20);
      LimbsToPair(limbs, 20, back);
      ASSERT_EQ(pair, back);
    }
  }
  // Big-endian: the leading limb carries the top 20 key bits.
  std::vector<uint8_t> pair(16, 0);
  pair[0] = 0xAB;
  pair[1] = 0xCD;
  pair[2] = 0xEF;
  pair[15] = 0x5A;
  std::vector<uint64_t> limbs(7);
  PairToLimbs(pair, 20, limbs);
  EXPECT_EQ(limbs[0], 0xABCDEu);
  EXPECT_EQ(limbs[6], 0x5Au);
}

TEST(Encoding, PlaintextsCarryShiftedWindows) {
  const store::KvStore kv = TwelvePairStore();
  HeParams he;
  he.ring_degree = 32;
  const EncodingParams p = EncodingParams::Derive(he, kv.pair_bytes(), kv.size());
  for (uint64_t j = 0; j < p.pt_count; ++j) {
    const auto pairs = DecodePlaintext(EncodePlaintext(kv, p, j), p, j);
    const uint64_t expect = std::min<uint64_t>(4, kv.size() - 2 * j);
    ASSERT_EQ(pairs.size(), expect) << j;
    for (size_t s = 0; s < pairs.size(); ++s) {
      EXPECT_EQ(pairs[s].position, 2 * j + s);
      EXPECT_EQ(pairs[s].key, kv.key(2 * j + s));
      EXPECT_TRUE(std::equal(pairs[s].value.begin(), pairs[s].value.end(),
                             kv.value(2 * j + s).begin()));
    }
  }
  // Every position from step on sits in exactly m/step plaintexts.
  for (uint64_t pos = 2; pos < 12; ++pos) {
    const auto [lo, hi] = p.covering(pos);
    EXPECT_EQ(hi - lo + 1, 2u);
  }
}

TEST(PlaintextRange, ContiguousWrappedAndFull) {
  HeParams he;
  he.ring_degree = 32;
  const EncodingParams p = EncodingParams::Derive(he, 20, 12);
  EXPECT_EQ(PlaintextRange({dldp::RangeKind::kContiguous, 5, 11, 12}, p), (PtRange{2, 5, 4}));
  EXPECT_EQ(PlaintextRange({dldp::RangeKind::kWrapped, 10, 1, 12}, p), (PtRange{5, 0, 2}));
  EXPECT_EQ(PlaintextRange({dldp::RangeKind::kWrapped, 4, 3, 12}, p), (PtRange{0, 5, 6}));
  EXPECT_EQ(PlaintextRange(dldp::ObfuscatedRange::Full(12), p), (PtRange{0, 5, 6}));
  const PtRange wrapped{5, 0, 2};
  EXPECT_EQ(OffsetInRange(wrapped, 0, 6), 1u);
  EXPECT_EQ(OffsetInRange(wrapped, 3, 6), std::nullopt);
  EXPECT_EQ(QueryCiphertextCount(4096, 4096), 1u);
  EXPECT_EQ(QueryCiphertextCount(4097, 4096), 2u);
}

class VarPirSmall : public ::testing::Test {
 protected:
  void SetUp() override {
    ctx_ = SmallContext();
    rng_ = std::make_unique<SecureRng>(19);
    sk_ = he::KeyGen(*ctx_, *rng_);
    keys_ = he::GenGaloisKeys(*ctx_, sk_, *rng_);
  }
  std::shared_ptr<const HeContext> ctx_;
  std::unique_ptr<SecureRng> rng_;
  he::SecretKey sk_;
  he::GaloisKeys keys_;
};

TEST_F(VarPirSmall, FourPlaintextRunRetrievesTarget) {
  const store::KvStore kv = TwelvePairStore();
  const EncodedStore enc(ctx_, kv, 1);
  const pgm::PredictedRange pred{9, 8, 10};
  const dldp::ObfuscatedRange obf{dldp::RangeKind::kContiguous, 5, 11, 12};
  const VarPirQuery q = BuildQuery(*ctx_, pred, obf, enc.params(), kv.version_id(), sk_, *rng_);
  EXPECT_EQ(q.range, (PtRange{2, 5, 4}));
  ASSERT_EQ(q.cts.size(), 1u);
  // The expanded selector has its one at offset 2 of 4.
  const auto selector = he::ObliviousExpand(*ctx_, q.cts[0], 4, keys_);
  for (size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(he::Decrypt(*ctx_, selector[k], sk_).coeffs[0], k == 2 ? 1u : 0u);
  }
  AnswerStats stats;
  const he::PlainPoly pt = he::Decrypt(*ctx_, Answer(enc, q, keys_, &stats), sk_);
  EXPECT_EQ(stats.products, 4u);
  const auto pairs = DecodePlaintext(pt, enc.params(), 4);
  ASSERT_EQ(pairs.size(), 4u);
  EXPECT_EQ(pairs.front().key, kv.key(8));
  EXPECT_EQ(pairs.back().key, kv.key(11));
  const auto value = DecodeAnswer(pt, pred, enc.params(), kv.key(9));
  ASSERT_TRUE(value.has_value());
  EXPECT_TRUE(std::equal(value->begin(), value->end(), kv.value(9).begin()));
  EXPECT_FALSE(DecodeAnswer(pt, pred, enc.params(), kv.key(9) + 1).has_value());
  EXPECT_FALSE(DecodeAnswer(pt, pred, enc.params(), kv.key(11)).has_value());
}

TEST_F(VarPirSmall, UniformAccessIndependentOfTarget) {
  const store::KvStore kv = TwelvePairStore();
  const EncodedStore enc(ctx_, kv, 1);
  const dldp::ObfuscatedRange obf{dldp::RangeKind::kWrapped, 6, 3, 12};
  for (uint64_t y : {0u, 1u, 7u, 10u, 11u}) {
    const pgm::PredictedRange pred{y, y ? y - 1 : 0, std::min<uint64_t>(11, y + 1)};
    if (!obf.covers(pred.lo, pred.hi)) continue;
    enc.reset_touches();
    const VarPirQuery q =
        BuildQuery(*ctx_, pred, obf, enc.params(), kv.version_id(), sk_, *rng_);
    const he::PlainPoly pt = he::Decrypt(*ctx_, Answer(enc, q, keys_), sk_);
    for (uint64_t j = 0; j < enc.params().pt_count; ++j) {
      EXPECT_EQ(enc.touches(j), OffsetInRange(q.range, j, 6).has_value() ? 1u : 0u);
    }
    EXPECT_EQ(pt, EncodePlaintext(kv, enc.params(), PosToPtId(pred.lo, enc.params())));
  }
}

TEST_F(VarPirSmall, StaleVersionAndMalformedRunsRejected) {
  const store::KvStore kv = TwelvePairStore();
  const EncodedStore enc(ctx_, kv, 1);
  const pgm::PredictedRange pred{3, 2, 4};
  const dldp::ObfuscatedRange obf = dldp::ObfuscatedRange::Full(12);
  VarPirQuery q = BuildQuery(*ctx_, pred, obf, enc.params(), kv.version_id() + 1, sk_, *rng_);
  try {
    Answer(enc, q, keys_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStaleVersion);
  }
  q.version_id = kv.version_id();
  q.range.w_pt = 7;
  EXPECT_THROW(Answer(enc, q, keys_), Error);
  EXPECT_THROW(BuildQuery(*ctx_, pred, {dldp::RangeKind::kContiguous, 5, 8, 12}, enc.params(),
                          1, sk_, *rng_),
               Error);
}

TEST(VarPir, RandomLookupsMatchStoreScan) {
  auto ctx = std::make_shared<const HeContext>(HeParams{});
  SecureRng rng(23);
  const he::SecretKey sk = he::KeyGen(*ctx, rng);
  const he::GaloisKeys keys = he::GenGaloisKeys(*ctx, sk, rng);
  const store::KvStore kv = store::GenerateDataset(1 << 16, store::Distribution::kNormal, 8, 4);
  const pgm::PgmIndex index = pgm::PgmIndex::Build(kv.keys());
  const EncodedStore enc(ctx, kv, index.eps_data());
  dldp::DiscreteLaplaceNoise noise(rng);
  size_t present = 0, absent = 0;
  size_t query_bytes = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const bool want_present = trial % 3 != 0;
    const uint64_t key = want_present ? kv.key(rng.uniform(kv.size())) : rng() >> 1;
    const uint64_t t = trial % 2 ? 200 : 4000;
    const pgm::PredictedRange pred = index.predict(key);
    const dldp::PrivacyParams privacy{1.0 / 64, t};
    const auto obf = dldp::ObfuscateRange(pred, kv.size(), privacy, noise);
    const VarPirQuery q = BuildQuery(*ctx, pred, obf, enc.params(), kv.version_id(), sk, rng);
    query_bytes = std::max(query_bytes, q.cts.size());
    const he::Ciphertext answer = Answer(enc, q, keys);
    EXPECT_GT(he::NoiseBudget(*ctx, answer, sk), 0.0);
    const auto got = DecodeAnswer(he::Decrypt(*ctx, answer, sk), pred, enc.params(), key);
    const auto expect = kv.find(key);
    ASSERT_EQ(got.has_value(), expect.has_value()) << key;
    if (expect) {
      ++present;
      EXPECT_TRUE(std::equal(got->begin(), got->end(), kv.value(*expect).begin()));
    } else {
      ++absent;
    }
  }
  EXPECT_GT(present, 0u);
  EXPECT_GT(absent, 0u);
  EXPECT_EQ(query_bytes, 1u);
}

}  // namespace
}  // namespace rangepir::varpir
