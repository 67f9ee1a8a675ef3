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

#include "rangepir/store/versioned_store.hpp"

#include <algorithm>
#include <shared_mutex>
#include <unordered_set>

namespace rangepir::store {

VersionedStore::VersionedStore(std::shared_ptr<const he::HeContext> ctx, KvStore initial,
                               StoreOptions options)
    : ctx_(std::move(ctx)), options_(options) {
  active_ = make_version(std::move(initial), nullptr, 0);
}

std::shared_ptr<Version> VersionedStore::make_version(KvStore kv,
                                                      const varpir::EncodedStore* previous,
                                                      uint64_t first_changed_pt) const {
  kv.validate_servable();
  auto v = std::make_shared<Version>();
  v->version_id = kv.version_id();
  v->index = pgm::PgmIndex::Build(kv.keys(), options_.eps_data, options_.eps_model);
  v->index_blob = v->index.serialize();
  v->encoded = previous
                   ? std::make_shared<varpir::EncodedStore>(*previous, kv, first_changed_pt)
                   : std::make_shared<varpir::EncodedStore>(ctx_, kv, options_.eps_data,
                                                            options_.overlap);
  v->kv = std::move(kv);
  return v;
}

std::shared_ptr<Version> VersionedStore::active() const {
  std::lock_guard guard(mu_);
  return active_;
}

std::shared_ptr<Version> VersionedStore::find(uint64_t version_id) const {
  std::lock_guard guard(mu_);
  if (active_->version_id == version_id) return active_;
  auto it = retired_.find(version_id);
  return it == retired_.end() ? nullptr : it->second.version;
}

void VersionedStore::update_value(uint64_t key, std::span<const uint8_t> value) {
  std::lock_guard admin(admin_mu_);
  const std::shared_ptr<Version> v = active();
  Require(value.size() == v->kv.value_bytes(), ErrorCode::kInvalidArgument,
          "value width differs from the store");
  const auto pos = v->kv.find(key);
  if (!pos) Fail(ErrorCode::kNotFound, "key " + std::to_string(key) + " not in store");
  varpir::EncodedStore& enc = *v->encoded;
  const auto [lo, hi] = enc.params().covering(*pos);
  std::vector<std::unique_lock<std::shared_mutex>> held;
  for (uint64_t j = lo; j <= hi; ++j) held.emplace_back(enc.lock(j));
  std::copy(value.begin(), value.end(), v->kv.mutable_value(*pos).begin());
  for (uint64_t j = lo; j <= hi; ++j) enc.reencode(v->kv, j);
}

std::pair<KvStore, uint64_t> MergeKeys(const KvStore& kv, std::vector<InsertPair> inserts,
                                       std::vector<uint64_t> deletes) {
  std::sort(inserts.begin(), inserts.end(),
            [](const InsertPair& a, const InsertPair& b) { return a.key < b.key; });
  for (size_t i = 0; i < inserts.size(); ++i) {
    Require(inserts[i].value.size() == kv.value_bytes(), ErrorCode::kInvalidArgument,
            "insert value width differs from the store");
    Require(inserts[i].key < kSentinelKey, ErrorCode::kInvalidArgument, "reserved key");
    if (i > 0 && inserts[i].key == inserts[i - 1].key) {
      Fail(ErrorCode::kConflict, "duplicate insert key " + std::to_string(inserts[i].key));
    }
    if (kv.find(inserts[i].key)) {
      Fail(ErrorCode::kConflict, "insert key " + std::to_string(inserts[i].key) + " present");
    }
  }
  std::sort(deletes.begin(), deletes.end());
  deletes.erase(std::unique(deletes.begin(), deletes.end()), deletes.end());
  for (uint64_t k : deletes) {
    if (!kv.find(k)) Fail(ErrorCode::kNotFound, "delete key " + std::to_string(k) + " absent");
  }

  uint64_t first_changed = kv.size();
  if (!inserts.empty()) first_changed = kv.lower_bound(inserts.front().key);
  if (!deletes.empty()) first_changed = std::min<uint64_t>(first_changed, *kv.find(deletes.front()));

  const size_t vb = kv.value_bytes();
  std::vector<uint64_t> keys;
  std::vector<uint8_t> values;
  keys.reserve(kv.size() + inserts.size());
  values.reserve((kv.size() + inserts.size()) * vb);
  size_t i = 0, d = 0;
  auto ins = inserts.begin();
  while (i < kv.size() || ins != inserts.end()) {
    if (ins != inserts.end() && (i == kv.size() || ins->key < kv.key(i))) {
      keys.push_back(ins->key);
      values.insert(values.end(), ins->value.begin(), ins->value.end());
      ++ins;
      continue;
    }
    if (d < deletes.size() && deletes[d] == kv.key(i)) {
      ++d;
    } else {
      keys.push_back(kv.key(i));
      const auto val = kv.value(i);
      values.insert(values.end(), val.begin(), val.end());
    }
    ++i;
  }
  return {KvStore(std::move(keys), std::move(values), vb, kv.version_id() + 1), first_changed};
}

uint64_t VersionedStore::batch_update_keys(std::vector<InsertPair> inserts,
                                           std::vector<uint64_t> deletes) {
  std::lock_guard admin(admin_mu_);
  const std::shared_ptr<Version> old = active();
  auto [kv, first_changed] = MergeKeys(old->kv, std::move(inserts), std::move(deletes));
  const uint64_t first_pt = old->encoded->params().covering(first_changed).first;
  std::shared_ptr<Version> next = make_version(std::move(kv), old->encoded.get(), first_pt);
  std::lock_guard guard(mu_);
  retired_[old->version_id] = {old, std::chrono::steady_clock::now()};
  active_ = std::move(next);
  collect_locked();
  return active_->version_id;
}

void VersionedStore::acknowledge(uint64_t session_id, uint64_t version_id) {
  std::lock_guard guard(mu_);
  sessions_[session_id] = version_id;
  collect_locked();
}

void VersionedStore::drop_session(uint64_t session_id) {
  std::lock_guard guard(mu_);
  sessions_.erase(session_id);
  collect_locked();
}

size_t VersionedStore::retained_versions() const {
  std::lock_guard guard(mu_);
  return 1 + retired_.size();
}

void VersionedStore::collect_locked() {
  std::unordered_set<uint64_t> in_use;
  for (const auto& [session, version] : sessions_) in_use.insert(version);
  const auto now = std::chrono::steady_clock::now();
  std::erase_if(retired_, [&](const auto& entry) {
    return !in_use.contains(entry.first) || now - entry.second.since >= options_.retire_timeout;
  });
}

Bytes ReadRange(const Version& version, const dldp::ObfuscatedRange& range) {
  const KvStore& kv = version.kv;
  const varpir::EncodedStore& enc = *version.encoded;
  Require(range.n == kv.size(), ErrorCode::kInvalidArgument, "range built for another store size");
  Require(range.l < kv.size() && range.r < kv.size(), ErrorCode::kInvalidArgument,
          "range outside the store");
  Bytes out;
  out.reserve(range.length() * kv.pair_bytes());
  auto copy = [&](uint64_t begin, uint64_t end) {
    const uint64_t step = enc.params().step;
    while (begin < end) {
      const uint64_t block = varpir::PosToPtId(begin, enc.params());
      const uint64_t stop = block + 1 == enc.params().pt_count
                                ? end
                                : std::min(end, (block + 1) * step);
      std::shared_lock guard(enc.lock(block));
      kv.append_pairs(begin, stop, out);
      begin = stop;
    }
  };
  switch (range.kind) {
    case dldp::RangeKind::kFull:
      copy(0, kv.size());
      break;
    case dldp::RangeKind::kContiguous:
      copy(range.l, range.r + 1);
      break;
    case dldp::RangeKind::kWrapped:
      copy(range.l, kv.size());
      copy(0, range.r + 1);
      break;
  }
  return out;
}

}  // namespace rangepir::store
