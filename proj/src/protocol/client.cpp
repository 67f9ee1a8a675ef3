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

#include "rangepir/protocol/client.hpp"

#include <algorithm>

namespace rangepir::protocol {
namespace {

SecureRng MakeRng(const std::optional<uint64_t>& seed) {
  return seed ? SecureRng(*seed) : SecureRng();
}

}  // namespace

Client::Client(std::unique_ptr<Channel> channel, ClientOptions options)
    : channel_(std::move(channel)), options_(options), rng_(MakeRng(options.seed)), noise_(rng_) {
  init();
}

void Client::init() {
  channel_->send({MessageType::kInitReq, {}});
  InitBundle b = DecodeInitBundle(channel_->receive());
  pgm::PgmIndex index = pgm::PgmIndex::Deserialize(b.pgm_blob);
  const bool fresh_keys = !ctx_ || ctx_->params() != b.he;
  if (fresh_keys) {
    ctx_ = std::make_shared<const he::HeContext>(b.he);
    sk_ = he::KeyGen(*ctx_, rng_);
    const he::GaloisKeys keys = he::GenGaloisKeys(*ctx_, *sk_, rng_);
    channel_->send({MessageType::kGaloisKeys, he::SerializeGaloisKeys(*ctx_, keys)});
  }
  Require(b.version_id >= bundle_.version_id, ErrorCode::kMalformed,
          "server version went backwards");
  bundle_ = std::move(b);
  index_ = std::move(index);
}

void Client::install_version(uint64_t version_id, std::span<const uint8_t> pgm_blob) {
  Require(version_id > bundle_.version_id, ErrorCode::kMalformed,
          "stale notice without a newer version");
  pgm::PgmIndex index = pgm::PgmIndex::Deserialize(pgm_blob);
  bundle_.encoding = varpir::EncodingParams::Derive(bundle_.he, bundle_.pair_bytes(), index.n(),
                                                    bundle_.encoding.overlap);
  bundle_.n = index.n();
  bundle_.version_id = version_id;
  bundle_.pgm_blob.assign(pgm_blob.begin(), pgm_blob.end());
  index_ = std::move(index);
}

void Client::set_link(double bandwidth_bps, double rtt_seconds) {
  bandwidth_ = bandwidth_bps;
  rtt_ = rtt_seconds;
}

CostInputs Client::cost_inputs() const {
  CostInputs in;
  in.bandwidth = bandwidth_.value_or(bundle_.bandwidth_hint);
  in.rtt = rtt_.value_or(bundle_.rtt_hint);
  in.c_fhe = bundle_.c_fhe_per_plaintext;
  in.pair_bytes = bundle_.pair_bytes();
  in.query_ct_bytes = ctx_->ciphertext_bytes();
  in.answer_ct_bytes = ctx_->ciphertext_bytes();
  in.ring_degree = ctx_->n();
  return in;
}

LookupResult Client::lookup(const LookupRequest& request, dldp::NoiseSource* noise) {
  const dldp::PrivacyParams privacy{request.eps_dp, request.t, request.mode};
  privacy.validate(index_.eps_data());
  dldp::NoiseSource& source = noise ? *noise : noise_;
  LookupResult r;
  for (;;) {
    r.version_id = bundle_.version_id;
    r.predicted = index_.predict(request.key);
    r.range = dldp::ObfuscateRange(r.predicted, bundle_.n, privacy, source, options_.reduction);
    r.pt_range = varpir::PlaintextRange(r.range, bundle_.encoding);
    r.costs = SelectScheme(r.range.length(), r.pt_range.w_pt, cost_inputs());
    r.scheme = request.scheme.value_or(r.costs.choice);

    if (r.scheme == Scheme::kPlainDownload) {
      r.request = EncodePlainQuery({bundle_.version_id, r.range.kind, r.range.l, r.range.r});
    } else {
      const varpir::VarPirQuery q = varpir::BuildQuery(
          *ctx_, r.predicted, r.range, bundle_.encoding, bundle_.version_id, *sk_, rng_);
      r.request = EncodeVarPirQuery(*ctx_, q, bundle_.encoding.pt_count);
    }
    channel_->send(r.request);
    const Frame reply = channel_->receive();
    r.response_bytes = reply.wire_size();
    if (reply.type == MessageType::kStaleVersion) {
      if (r.stale_retries == options_.max_stale_retries) {
        Fail(ErrorCode::kStaleVersion, "version kept changing across retries");
      }
      const StaleNotice notice = DecodeStale(reply);
      install_version(notice.new_version, notice.pgm_blob);
      ++r.stale_retries;
      continue;
    }
    if (reply.type == MessageType::kError) RaiseError(reply);
    r.value = r.scheme == Scheme::kPlainDownload ? verify_plain(reply, r, request.key)
                                                 : verify_varpir(reply, r, request.key);
    return r;
  }
}

std::optional<Bytes> Client::verify_plain(const Frame& reply, const LookupResult& r,
                                          uint64_t key) const {
  if (reply.type != MessageType::kRespPlain) Fail(ErrorCode::kMalformed, "expected RESP_PLAIN");
  const size_t pb = bundle_.pair_bytes();
  const uint64_t n = bundle_.n;
  if (reply.payload.size() != r.range.length() * pb) {
    Fail(ErrorCode::kMalformed, "plain download length disagrees with the range");
  }
  // Pairs arrive in cyclic order from the range start; the predicted window
  // never crosses the wrap point, so it is one contiguous run.
  const uint64_t start = r.range.kind == dldp::RangeKind::kFull ? 0 : r.range.l;
  const uint64_t first = (r.predicted.lo + n - start) % n;
  const uint64_t count = r.predicted.hi - r.predicted.lo + 1;
  auto key_at = [&](uint64_t i) {
    return store::PairKey(std::span(reply.payload).subspan((first + i) * pb, pb));
  };
  uint64_t lo = 0, hi = count;
  while (lo < hi) {
    const uint64_t mid = lo + (hi - lo) / 2;
    if (key_at(mid) < key) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo == count || key_at(lo) != key) return std::nullopt;
  const auto value = std::span(reply.payload).subspan((first + lo) * pb + 8, pb - 8);
  return Bytes(value.begin(), value.end());
}

std::optional<Bytes> Client::verify_varpir(const Frame& reply, const LookupResult& r,
                                           uint64_t key) const {
  if (reply.type != MessageType::kRespVarpir) Fail(ErrorCode::kMalformed, "expected RESP_VARPIR");
  const he::Ciphertext ct = he::DeserializeCiphertext(*ctx_, reply.payload);
  const he::PlainPoly pt = he::Decrypt(*ctx_, ct, *sk_);
  return varpir::DecodeAnswer(pt, r.predicted, bundle_.encoding, key);
}

}  // namespace rangepir::protocol
