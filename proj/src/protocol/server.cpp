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

#include "rangepir/protocol/server.hpp"

#include <algorithm>
#include <chrono>

namespace rangepir::protocol {

double CalibrateFhe(const varpir::EncodedStore& enc, size_t plaintexts) {
  const he::HeContext& ctx = enc.context();
  const uint64_t w = std::min<uint64_t>(std::max<size_t>(plaintexts, 1), enc.params().pt_count);
  SecureRng rng;
  const he::SecretKey sk = he::KeyGen(ctx, rng);
  const he::GaloisKeys keys = he::GenGaloisKeys(ctx, sk, rng);
  varpir::VarPirQuery q;
  q.version_id = enc.version_id();
  q.range = {0, w - 1, w};
  q.cts.push_back(he::Encrypt(ctx, he::ExpansionQueryPlaintext(ctx, 0, w), sk, rng));
  varpir::Answer(enc, q, keys);
  constexpr int kRuns = 2;
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < kRuns; ++i) varpir::Answer(enc, q, keys);
  const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
  return took.count() / (kRuns * static_cast<double>(w));
}

Server::Server(std::shared_ptr<store::VersionedStore> store, ServerConfig config)
    : store_(std::move(store)), config_(config) {
  c_fhe_ = config_.c_fhe_override
               ? *config_.c_fhe_override
               : CalibrateFhe(*store_->active()->encoded, config_.calibration_plaintexts);
}

std::unique_ptr<Session> Server::open_session(bool admin) {
  return std::make_unique<Session>(store_, next_session_++, admin);
}

InitBundle Server::bundle_for(const store::Version& v) const {
  InitBundle b;
  b.n = v.kv.size();
  b.kv_bits = static_cast<uint32_t>(v.kv.kv_bits());
  b.version_id = v.version_id;
  b.schemes = {Scheme::kPlainDownload, Scheme::kVarPir};
  b.he = store_->context().params();
  b.encoding = v.encoded->params();
  b.pgm_blob = v.index_blob;
  b.c_fhe_per_plaintext = c_fhe_;
  b.bandwidth_hint = config_.bandwidth_hint;
  b.rtt_hint = config_.rtt_hint;
  return b;
}

InitBundle Server::bundle() const { return bundle_for(*store_->active()); }

std::optional<Frame> Server::handle(Session& session, const Frame& request) {
  try {
    const bool admin_frame = request.type == MessageType::kAdminUpdateValue ||
                             request.type == MessageType::kAdminBatchUpdate;
    if (admin_frame != session.admin()) {
      Fail(ErrorCode::kInvalidArgument, std::string(ToString(request.type)) +
                                            " not accepted on this endpoint");
    }
    switch (request.type) {
      case MessageType::kInitReq: {
        const auto v = store_->active();
        store_->acknowledge(session.id(), v->version_id);
        return EncodeInitBundle(bundle_for(*v));
      }
      case MessageType::kGaloisKeys:
        session.set_keys(he::DeserializeGaloisKeys(store_->context(), request.payload));
        return std::nullopt;
      case MessageType::kQueryPlain:
        return handle_plain(session, request);
      case MessageType::kQueryVarpir:
        return handle_varpir(session, request);
      case MessageType::kAdminUpdateValue: {
        const ValueUpdate u = DecodeValueUpdate(request);
        store_->update_value(u.key, u.value);
        return EncodeAdminAck(request.type, store_->active()->version_id);
      }
      case MessageType::kAdminBatchUpdate: {
        BatchUpdate u = DecodeBatchUpdate(request);
        const uint64_t v = store_->batch_update_keys(std::move(u.inserts), std::move(u.deletes));
        return EncodeAdminAck(request.type, v);
      }
      default:
        Fail(ErrorCode::kMalformed, std::string("unexpected ") + ToString(request.type));
    }
  } catch (const Error& e) {
    return EncodeError(e.code(), e.what());
  } catch (const std::exception& e) {
    return EncodeError(ErrorCode::kInternal, e.what());
  }
}

Frame Server::stale_or(const store::Version& served, Frame inner) {
  const auto active = store_->active();
  if (served.version_id == active->version_id) return inner;
  return EncodeStale({active->version_id, active->index_blob, std::move(inner)});
}

Frame Server::handle_plain(Session& session, const Frame& request) {
  const PlainQuery q = DecodePlainQuery(request);
  const auto v = store_->find(q.version_id);
  if (!v) {
    const auto active = store_->active();
    return EncodeStale({active->version_id, active->index_blob,
                        EncodeError(ErrorCode::kStaleVersion, "version retired")});
  }
  const uint64_t n = v->kv.size();
  const dldp::ObfuscatedRange range{q.kind, q.l, q.r, n};
  const bool shaped = (q.kind == dldp::RangeKind::kFull && q.l == 0 && q.r == n - 1) ||
                      (q.kind == dldp::RangeKind::kContiguous && q.l <= q.r) ||
                      (q.kind == dldp::RangeKind::kWrapped && q.l > q.r);
  Require(shaped, ErrorCode::kMalformed, "range fields disagree with its kind");
  if (v == store_->active()) store_->acknowledge(session.id(), v->version_id);
  return stale_or(*v, {MessageType::kRespPlain, store::ReadRange(*v, range)});
}

Frame Server::handle_varpir(Session& session, const Frame& request) {
  const he::GaloisKeys* keys = session.keys();
  Require(keys != nullptr, ErrorCode::kInvalidArgument, "no Galois keys uploaded");
  const VarPirWireQuery wq = DecodeVarPirQuery(request);
  const auto v = store_->find(wq.version_id);
  if (!v) {
    const auto active = store_->active();
    return EncodeStale({active->version_id, active->index_blob,
                        EncodeError(ErrorCode::kStaleVersion, "version retired")});
  }
  const he::HeContext& ctx = store_->context();
  varpir::VarPirQuery q;
  q.version_id = wq.version_id;
  q.range = PtRangeFromWire(wq.kind, wq.l_pt, wq.r_pt, v->encoded->params().pt_count);
  Require(wq.cts.size() == varpir::QueryCiphertextCount(q.range.w_pt, ctx.n()),
          ErrorCode::kMalformed, "ciphertext count disagrees with the run");
  for (const Bytes& blob : wq.cts) q.cts.push_back(he::DeserializeCiphertext(ctx, blob));
  if (v == store_->active()) store_->acknowledge(session.id(), v->version_id);
  const he::Ciphertext answer = varpir::Answer(*v->encoded, q, *keys);
  return stale_or(*v, {MessageType::kRespVarpir, he::SerializeCiphertext(ctx, answer)});
}

std::unique_ptr<LoopbackChannel> Server::connect_loopback(bool admin) {
  std::shared_ptr<Session> session = open_session(admin);
  return std::make_unique<LoopbackChannel>(
      [this, session](const Frame& f) { return handle(*session, f); });
}

void Server::serve(Channel& channel, Session& session) {
  while (true) {
    Frame request;
    try {
      request = channel.receive();
    } catch (const Error&) {
      return;
    }
    if (auto reply = handle(session, request)) {
      try {
        channel.send(*reply);
      } catch (const Error&) {
        return;
      }
    }
  }
}

TcpServer::TcpServer(Server& server, std::unique_ptr<TcpListener> clients,
                     std::unique_ptr<TcpListener> admin)
    : server_(server), clients_(std::move(clients)), admin_(std::move(admin)) {
  std::lock_guard guard(mu_);
  threads_.emplace_back([this] { accept_loop(*clients_, false); });
  if (admin_) threads_.emplace_back([this] { accept_loop(*admin_, true); });
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::accept_loop(TcpListener& listener, bool admin) {
  while (auto channel = listener.accept()) {
    std::lock_guard guard(mu_);
    if (stopping_) return;
    TcpChannel* raw = channel.release();
    open_.push_back(raw);
    threads_.emplace_back([this, raw, admin] {
      {
        auto session = server_.open_session(admin);
        server_.serve(*raw, *session);
      }
      std::lock_guard inner(mu_);
      std::erase(open_, raw);
      delete raw;
    });
  }
}

void TcpServer::stop() {
  std::vector<std::thread> threads;
  {
    std::lock_guard guard(mu_);
    if (stopping_) return;
    stopping_ = true;
    clients_->close();
    if (admin_) admin_->close();
    for (TcpChannel* c : open_) c->shutdown();
  }
  // Connection threads may still append while draining; join until empty.
  while (true) {
    {
      std::lock_guard guard(mu_);
      if (threads_.empty()) break;
      threads.swap(threads_);
    }
    for (auto& t : threads) t.join();
    threads.clear();
  }
}

}  // namespace rangepir::protocol
