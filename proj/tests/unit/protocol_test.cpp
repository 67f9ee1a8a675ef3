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

#include <chrono>
#include <cmath>

#include "rangepir/protocol/client.hpp"
#include "rangepir/protocol/server.hpp"
#include "rangepir/store/dataset.hpp"

namespace rangepir::protocol {
namespace {

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

TEST(Wire, FrameRoundTripAndHeaderChecks) {
  const Frame f{MessageType::kRespPlain, {1, 2, 3}};
  const Bytes bytes = EncodeFrame(f);
  ASSERT_EQ(bytes.size(), 8u);
  EXPECT_EQ(bytes[0], 3);
  EXPECT_EQ(bytes[4], 0x20);
  const Frame back = DecodeFrame(bytes);
  EXPECT_EQ(back.type, f.type);
  EXPECT_EQ(back.payload, f.payload);

  Bytes bad_type = bytes;
  bad_type[4] = 0x55;
  EXPECT_EQ(CodeOf([&] { DecodeFrame(bad_type); }), ErrorCode::kMalformed);
  Bytes short_body = bytes;
  short_body.pop_back();
  EXPECT_EQ(CodeOf([&] { DecodeFrame(short_body); }), ErrorCode::kMalformed);
  Bytes huge = {0xFF, 0xFF, 0xFF, 0xFF, 0x20};
  EXPECT_EQ(CodeOf([&] { DecodeFrame(huge); }), ErrorCode::kMalformed);
}

TEST(Wire, MessagesRoundTrip) {
  const PlainQuery pq{7, dldp::RangeKind::kWrapped, 90, 3};
  const Frame pf = EncodePlainQuery(pq);
  EXPECT_EQ(pf.payload.size(), 25u);
  const PlainQuery pq2 = DecodePlainQuery(pf);
  EXPECT_EQ(pq2.version_id, 7u);
  EXPECT_EQ(pq2.kind, dldp::RangeKind::kWrapped);
  EXPECT_EQ(pq2.l, 90u);
  EXPECT_EQ(pq2.r, 3u);

  const BatchUpdate bu{{{5, {1, 2}}, {9, {3, 4}}}, {11, 12}};
  const BatchUpdate bu2 = DecodeBatchUpdate(EncodeBatchUpdate(bu));
  ASSERT_EQ(bu2.inserts.size(), 2u);
  EXPECT_EQ(bu2.inserts[1].key, 9u);
  EXPECT_EQ(bu2.inserts[1].value, Bytes({3, 4}));
  EXPECT_EQ(bu2.deletes, std::vector<uint64_t>({11, 12}));

  const StaleNotice sn{4, {9, 9}, {MessageType::kRespPlain, {1}}};
  const StaleNotice sn2 = DecodeStale(EncodeStale(sn));
  EXPECT_EQ(sn2.new_version, 4u);
  EXPECT_EQ(sn2.pgm_blob, sn.pgm_blob);
  EXPECT_EQ(sn2.inner.type, MessageType::kRespPlain);

  EXPECT_EQ(CodeOf([] { RaiseError(EncodeError(ErrorCode::kNotFound, "gone")); }),
            ErrorCode::kNotFound);
  // A reply of the wrong kind that is an ERROR surfaces the carried code.
  EXPECT_EQ(CodeOf([] { DecodePlainQuery(EncodeError(ErrorCode::kConflict, "x")); }),
            ErrorCode::kConflict);
}

TEST(Wire, PlaintextRunFields) {
  EXPECT_EQ(PtRangeFromWire(dldp::RangeKind::kWrapped, 5, 0, 6), (varpir::PtRange{5, 0, 2}));
  EXPECT_EQ(PtRangeFromWire(dldp::RangeKind::kFull, 0, 5, 6), (varpir::PtRange{0, 5, 6}));
  EXPECT_EQ(CodeOf([] { PtRangeFromWire(dldp::RangeKind::kWrapped, 3, 2, 6); }),
            ErrorCode::kMalformed);
  EXPECT_EQ(CodeOf([] { PtRangeFromWire(dldp::RangeKind::kContiguous, 4, 2, 6); }),
            ErrorCode::kMalformed);
  EXPECT_EQ(CodeOf([] { PtRangeFromWire(dldp::RangeKind::kContiguous, 0, 6, 6); }),
            ErrorCode::kMalformed);
  EXPECT_EQ(PtRangeKind({0, 5, 6}, 6), dldp::RangeKind::kFull);
  EXPECT_EQ(PtRangeKind({4, 1, 4}, 6), dldp::RangeKind::kWrapped);
}

TEST(CostModel, KnownInputs) {
  CostInputs in;
  in.bandwidth = 50e6;
  in.rtt = 0;
  in.c_fhe = 1e-3;
  in.pair_bytes = 16;
  in.query_ct_bytes = 65600;
  in.answer_ct_bytes = 65600;
  in.ring_degree = 4096;
  const SchemeCosts c = SelectScheme(25729, 89, in);
  // 25729 pairs * 128 bits at 50 Mbps; two ciphertexts plus 89 ms of compute.
  EXPECT_NEAR(c.plain, 25729.0 * 128 / 50e6, 1e-12);
  EXPECT_NEAR(c.plain, 0.06587, 1e-5);
  EXPECT_NEAR(c.varpir, 2 * 65600.0 * 8 / 50e6 + 0.089, 1e-12);
  EXPECT_NEAR(c.varpir, 0.110, 1e-3);
  EXPECT_EQ(c.choice, Scheme::kPlainDownload);

  in.c_fhe = 0;
  EXPECT_EQ(SelectScheme(25729, 89, in).choice, Scheme::kVarPir);
  // Equal costs: 8200 pairs * 16 bytes = 2 * 65600 bytes.
  const SchemeCosts tie = SelectScheme(8200, 89, in);
  EXPECT_DOUBLE_EQ(tie.plain, tie.varpir);
  EXPECT_EQ(tie.choice, Scheme::kPlainDownload);
  // One more query ciphertext per N plaintexts.
  EXPECT_NEAR(SelectScheme(1, 4097, in).varpir - SelectScheme(1, 4096, in).varpir,
              65600.0 * 8 / 50e6, 1e-12);
  in.rtt = 0.03;
  EXPECT_NEAR(SelectScheme(1, 1, in).plain, 16.0 * 8 / 50e6 + 0.03, 1e-12);
}

TEST(SimulatedLink, DelayArithmetic) {
  SimulatedLink link(50e6, 0.030);
  EXPECT_NEAR(link.TransferDelay(1000000), 0.16, 1e-12);
  link.charge(0);
  link.charge(0);
  EXPECT_NEAR(link.elapsed(), 0.030, 1e-12);
  link.reset();
  link.charge(1000000);
  link.charge(500000);
  EXPECT_NEAR(link.elapsed(), 0.16 + 0.08 + 0.030, 1e-12);
  EXPECT_THROW(SimulatedLink(0, 0), Error);
}

TEST(SimulatedChannel, ChargesBothDirections) {
  auto inner = std::make_unique<LoopbackChannel>(
      [](const Frame&) { return Frame{MessageType::kRespPlain, Bytes(995)}; });
  SimulatedChannel ch(std::move(inner), 8e6, 0.010);
  ch.send({MessageType::kInitReq, {}});
  ch.receive();
  // 5 bytes out, 1000 bytes back, half an rtt each way.
  EXPECT_NEAR(ch.link().elapsed(), 5 * 8 / 8e6 + 1000 * 8 / 8e6 + 0.010, 1e-12);
  EXPECT_EQ(ch.bytes_sent(), 5u);
  EXPECT_EQ(ch.bytes_received(), 1000u);
}

TEST(SimulatedChannel, RealtimeSleepsTheCharge) {
  auto inner = std::make_unique<LoopbackChannel>(
      [](const Frame&) { return Frame{MessageType::kRespPlain, {}}; });
  SimulatedChannel ch(std::move(inner), 1e9, 0.040);
  ch.link().set_realtime(true);
  const auto start = std::chrono::steady_clock::now();
  ch.send({MessageType::kInitReq, {}});
  ch.receive();
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_GE(wall, ch.link().elapsed());
  EXPECT_NEAR(ch.link().elapsed(), 0.040, 1e-6);
}

TEST(Endpoint, Parse) {
  EXPECT_EQ(ParseEndpoint("127.0.0.1:7000"), std::make_pair(std::string("127.0.0.1"), uint16_t{7000}));
  EXPECT_THROW(ParseEndpoint("localhost"), Error);
  EXPECT_THROW(ParseEndpoint("h:99999"), Error);
  EXPECT_THROW(ParseEndpoint("h:12x"), Error);
}

// Shared 2^16-pair deployment at the default HE parameters.
class Deployment : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    kv_ = new store::KvStore(store::GenerateDataset(1 << 16, store::Distribution::kNormal, 8, 12));
    auto ctx = std::make_shared<const he::HeContext>(he::HeParams{});
    store_ = std::make_shared<store::VersionedStore>(ctx, *kv_);
    server_ = new Server(store_);
  }
  static void TearDownTestSuite() {
    delete server_;
    store_.reset();
    delete kv_;
  }

  static store::KvStore* kv_;
  static std::shared_ptr<store::VersionedStore> store_;
  static Server* server_;
};
store::KvStore* Deployment::kv_ = nullptr;
std::shared_ptr<store::VersionedStore> Deployment::store_;
Server* Deployment::server_ = nullptr;

TEST_F(Deployment, InitBundleDescribesTheStore) {
  Client client(server_->connect_loopback(), {.seed = 1});
  const InitBundle& b = client.bundle();
  EXPECT_EQ(b.n, kv_->size());
  EXPECT_EQ(b.kv_bits, 128u);
  EXPECT_EQ(b.schemes.size(), 2u);
  EXPECT_EQ(b.encoding.m, 585u);
  EXPECT_GT(b.c_fhe_per_plaintext, 0.0);
  EXPECT_EQ(client.index().n(), kv_->size());
  for (size_t i = 0; i < kv_->size(); ++i) {
    const auto pred = client.index().predict(kv_->key(i));
    ASSERT_LE(pred.lo, i);
    ASSERT_GE(pred.hi, i);
    ASSERT_LE(pred.hi - pred.lo, 128u);
  }
}

TEST_F(Deployment, CorruptBundleRejected) {
  InitBundle b = server_->bundle();
  b.pgm_blob[0] ^= 0xFF;
  auto corrupt = std::make_unique<LoopbackChannel>(
      [frame = EncodeInitBundle(b)](const Frame&) -> std::optional<Frame> { return frame; });
  EXPECT_EQ(CodeOf([&] { Client c(std::move(corrupt)); }), ErrorCode::kMalformed);

  InitBundle wrong_n = server_->bundle();
  wrong_n.n += 1;
  EXPECT_EQ(CodeOf([&] { DecodeInitBundle(EncodeInitBundle(wrong_n)); }), ErrorCode::kMalformed);
}

TEST_F(Deployment, LookupsUnderBothSchemes) {
  Client client(server_->connect_loopback(), {.seed = 2});
  SecureRng rng(3);
  for (uint64_t t : {200u, 10000u}) {
    for (Scheme scheme : {Scheme::kPlainDownload, Scheme::kVarPir}) {
      for (int i = 0; i < 6; ++i) {
        const size_t pos = rng.uniform(kv_->size());
        const auto r = client.lookup({.key = kv_->key(pos), .t = t, .scheme = scheme});
        ASSERT_TRUE(r.value.has_value()) << pos;
        EXPECT_TRUE(std::ranges::equal(*r.value, kv_->value(pos)));
        EXPECT_EQ(r.scheme, scheme);
        EXPECT_TRUE(r.range.covers(r.predicted.lo, r.predicted.hi));
        uint64_t absent = rng() >> 1;
        while (kv_->find(absent)) ++absent;
        EXPECT_FALSE(client.lookup({.key = absent, .t = t, .scheme = scheme}).value.has_value());
      }
    }
  }
  // Neighbours of present keys are absent too.
  const uint64_t k = kv_->key(1000);
  if (!kv_->find(k + 1)) {
    EXPECT_FALSE(client.lookup({.key = k + 1, .t = 200, .scheme = Scheme::kVarPir}).value);
    EXPECT_FALSE(client.lookup({.key = k + 1, .t = 200, .scheme = Scheme::kPlainDownload}).value);
  }
}

TEST_F(Deployment, ZeroNoisePlainDownloadsPredictedWindow) {
  Client client(server_->connect_loopback(), {.seed = 4});
  dldp::ScriptedNoise zero;
  const size_t pos = kv_->size() / 2;
  const auto r = client.lookup({.key = kv_->key(pos), .t = 200, .scheme = Scheme::kPlainDownload},
                               &zero);
  ASSERT_TRUE(r.value.has_value());
  EXPECT_EQ(r.range.length(), 2u * 64 + 1);
  EXPECT_EQ(r.response_bytes, Frame::kHeaderBytes + (2 * 64 + 1) * kv_->pair_bytes());
}

TEST_F(Deployment, MessageShapeIndependentOfKey) {
  Client client(server_->connect_loopback(), {.seed = 5});
  const auto& enc = client.bundle().encoding;
  const he::HeContext& ctx = client.context();
  SecureRng rng(6);
  const he::SecretKey sk = he::KeyGen(ctx, rng);
  // Two keys far apart (different target plaintexts) under one range.
  const dldp::ObfuscatedRange obf{dldp::RangeKind::kWrapped, kv_->size() - 5000, 9000, kv_->size()};
  const uint64_t n = kv_->size();
  const pgm::PredictedRange a{100, 36, 164}, b{n - 100, n - 164, n - 36};
  ASSERT_TRUE(obf.covers(a.lo, a.hi) && obf.covers(b.lo, b.hi));
  const auto qa = varpir::BuildQuery(ctx, a, obf, enc, 1, sk, rng);
  const auto qb = varpir::BuildQuery(ctx, b, obf, enc, 1, sk, rng);
  ASSERT_NE(varpir::PosToPtId(a.lo, enc), varpir::PosToPtId(b.lo, enc));
  const Frame fa = EncodeVarPirQuery(ctx, qa, enc.pt_count);
  const Frame fb = EncodeVarPirQuery(ctx, qb, enc.pt_count);
  ASSERT_EQ(fa.payload.size(), fb.payload.size());
  // version, kind, l_pt, r_pt, count, blob length: byte-identical.
  const size_t fields = 8 + 1 + 8 + 8 + 2 + 4;
  EXPECT_TRUE(std::equal(fa.payload.begin(), fa.payload.begin() + fields, fb.payload.begin()));
  EXPECT_FALSE(std::equal(fa.payload.begin() + fields, fa.payload.end(), fb.payload.begin() + fields));
  EXPECT_EQ(EncodePlainQuery({1, obf.kind, obf.l, obf.r}).payload,
            EncodePlainQuery({1, obf.kind, obf.l, obf.r}).payload);
}

TEST_F(Deployment, AnswerSizeConstant) {
  Client client(server_->connect_loopback(), {.seed = 7});
  std::set<size_t> sizes;
  for (uint64_t t : {200u, 10000u}) {
    const auto r = client.lookup({.key = kv_->key(77), .t = t, .scheme = Scheme::kVarPir});
    sizes.insert(r.response_bytes);
  }
  EXPECT_EQ(sizes.size(), 1u);
  EXPECT_EQ(*sizes.begin(), Frame::kHeaderBytes + client.context().ciphertext_bytes());
}

TEST_F(Deployment, AdminFramesNeedTheAdminEndpoint) {
  auto client_side = server_->open_session(false);
  const Frame reply = *server_->handle(*client_side, EncodeValueUpdate({kv_->key(0), Bytes(8)}));
  EXPECT_EQ(reply.type, MessageType::kError);
  auto admin_side = server_->open_session(true);
  const Frame refused = *server_->handle(*admin_side, {MessageType::kInitReq, {}});
  EXPECT_EQ(refused.type, MessageType::kError);
  // Queries without uploaded keys are refused.
  const Frame no_keys = *server_->handle(
      *client_side, {MessageType::kQueryVarpir, Bytes(27, 0)});
  EXPECT_EQ(no_keys.type, MessageType::kError);
}

TEST(Protocol, StaleVersionTriggersOneRetry) {
  he::HeParams hp;
  hp.ring_degree = 32;
  auto ctx = std::make_shared<const he::HeContext>(hp);
  std::vector<uint64_t> keys;
  for (uint64_t i = 0; i < 40; ++i) keys.push_back(1000 + 7 * i);
  store::StoreOptions opts;
  opts.eps_data = 1;
  opts.eps_model = 1;
  auto vs = std::make_shared<store::VersionedStore>(ctx, store::StoreFromKeys(keys, 12), opts);
  Server server(vs, {.c_fhe_override = 1e-4});
  Client client(server.connect_loopback(), {.seed = 9});
  auto admin = server.connect_loopback(true);
  EXPECT_EQ(client.version_id(), 1u);

  admin->send(EncodeBatchUpdate({{{1001, Bytes(12, 0x11)}}, {1000 + 7 * 20}}));
  EXPECT_EQ(DecodeAdminAck(admin->receive(), MessageType::kAdminBatchUpdate), 2u);
  // The client still holds version 1, which the server retains for it.
  EXPECT_NE(vs->find(1), nullptr);

  for (Scheme scheme : {Scheme::kVarPir, Scheme::kPlainDownload}) {
    const auto r = client.lookup({.key = 1001, .t = 4, .scheme = scheme});
    ASSERT_TRUE(r.value.has_value());
    EXPECT_EQ(*r.value, Bytes(12, 0x11));
    EXPECT_EQ(r.version_id, 2u);
    EXPECT_EQ(r.stale_retries, scheme == Scheme::kVarPir ? 1u : 0u);
  }
  EXPECT_FALSE(client.lookup({.key = 1000 + 7 * 20, .t = 4}).value.has_value());
  // Having moved on, the client no longer pins version 1.
  EXPECT_EQ(vs->find(1), nullptr);

  admin->send(EncodeValueUpdate({1007, Bytes(12, 0x22)}));
  EXPECT_EQ(DecodeAdminAck(admin->receive(), MessageType::kAdminUpdateValue), 2u);
  for (Scheme scheme : {Scheme::kVarPir, Scheme::kPlainDownload}) {
    EXPECT_EQ(*client.lookup({.key = 1007, .t = 4, .scheme = scheme}).value, Bytes(12, 0x22));
  }
  admin->send(EncodeValueUpdate({1008, Bytes(12)}));
  EXPECT_EQ(CodeOf([&] { DecodeAdminAck(admin->receive(), MessageType::kAdminUpdateValue); }),
            ErrorCode::kNotFound);

  // Retired and expired version: the stale notice carries an error inside.
  admin->send(EncodeBatchUpdate({{{1002, Bytes(12)}}, {}}));
  admin->receive();
  Client other(server.connect_loopback(), {.seed = 10});
  EXPECT_EQ(other.version_id(), 3u);
  client.init();
  EXPECT_EQ(client.version_id(), 3u);
}

TEST(Protocol, RepeatedStalenessGivesUp) {
  he::HeParams hp;
  hp.ring_degree = 32;
  auto ctx = std::make_shared<const he::HeContext>(hp);
  std::vector<uint64_t> keys;
  for (uint64_t i = 0; i < 20; ++i) keys.push_back(10 + i);
  store::StoreOptions opts;
  opts.eps_data = 1;
  opts.eps_model = 1;
  auto vs = std::make_shared<store::VersionedStore>(ctx, store::StoreFromKeys(keys, 12), opts);
  Server server(vs, {.c_fhe_override = 1e-4});
  auto session = std::shared_ptr<Session>(server.open_session());
  uint64_t version = 1;
  auto channel = std::make_unique<LoopbackChannel>([&, session](const Frame& f) -> std::optional<Frame> {
    if (f.type == MessageType::kQueryPlain || f.type == MessageType::kQueryVarpir) {
      return EncodeStale({++version, vs->active()->index_blob, EncodeError(ErrorCode::kStaleVersion, "")});
    }
    return server.handle(*session, f);
  });
  Client client(std::move(channel), {.seed = 1});
  EXPECT_EQ(CodeOf([&] { client.lookup({.key = 12, .t = 4}); }), ErrorCode::kStaleVersion);
  EXPECT_EQ(version, 5u);  // first try plus three retries
}

TEST(Protocol, TcpEndToEnd) {
  he::HeParams hp;
  hp.ring_degree = 32;
  auto ctx = std::make_shared<const he::HeContext>(hp);
  std::vector<uint64_t> keys;
  for (uint64_t i = 0; i < 50; ++i) keys.push_back(3 * i + 1);
  store::StoreOptions opts;
  opts.eps_data = 1;
  opts.eps_model = 1;
  auto vs = std::make_shared<store::VersionedStore>(ctx, store::StoreFromKeys(keys, 12), opts);
  Server server(vs, {.c_fhe_override = 1e-4});
  auto clients = std::make_unique<TcpListener>("127.0.0.1", 0);
  auto admin = std::make_unique<TcpListener>("127.0.0.1", 0);
  const uint16_t port = clients->port(), admin_port = admin->port();
  TcpServer tcp(server, std::move(clients), std::move(admin));

  Client client(TcpChannel::Connect("127.0.0.1", port), {.seed = 2});
  for (Scheme scheme : {Scheme::kVarPir, Scheme::kPlainDownload}) {
    const auto r = client.lookup({.key = 3 * 17 + 1, .t = 4, .scheme = scheme});
    ASSERT_TRUE(r.value.has_value());
    EXPECT_TRUE(std::ranges::equal(*r.value, vs->active()->kv.value(17)));
    EXPECT_FALSE(client.lookup({.key = 3 * 17 + 2, .t = 4, .scheme = scheme}).value);
  }
  auto admin_channel = TcpChannel::Connect("127.0.0.1", admin_port);
  admin_channel->send(EncodeValueUpdate({4, Bytes(12, 0x33)}));
  EXPECT_EQ(DecodeAdminAck(admin_channel->receive(), MessageType::kAdminUpdateValue), 1u);
  EXPECT_EQ(*client.lookup({.key = 4, .t = 4, .scheme = Scheme::kVarPir}).value, Bytes(12, 0x33));
  // Admin frames on the client port are refused.
  auto sneaky = TcpChannel::Connect("127.0.0.1", port);
  sneaky->send(EncodeValueUpdate({4, Bytes(12)}));
  EXPECT_EQ(sneaky->receive().type, MessageType::kError);
  tcp.stop();
  EXPECT_THROW(TcpChannel::Connect("127.0.0.1", port), Error);
}

}  // namespace
}  // namespace rangepir::protocol
