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

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "rangepir/dldp/dldp.hpp"
#include "rangepir/pgm/pgm_index.hpp"
#include "rangepir/store/kv_store.hpp"
#include "rangepir/varpir/varpir.hpp"

namespace rangepir::store {

// One servable snapshot. Key set and layout never change; values are edited
// in place under the encoded store's per-block locks.
struct Version {
  uint64_t version_id = 0;
  KvStore kv;
  pgm::PgmIndex index;
  Bytes index_blob;
  std::shared_ptr<varpir::EncodedStore> encoded;
};

struct InsertPair {
  uint64_t key = 0;
  Bytes value;
};

struct StoreOptions {
  uint32_t eps_data = pgm::kDefaultEpsData;
  uint32_t eps_model = pgm::kDefaultEpsModel;
  std::optional<uint32_t> overlap;
  // Retired versions are dropped once every session moved on, or after this.
  std::chrono::steady_clock::duration retire_timeout = std::chrono::seconds(60);
};

class VersionedStore {
 public:
  VersionedStore(std::shared_ptr<const he::HeContext> ctx, KvStore initial,
                 StoreOptions options = {});

  std::shared_ptr<Version> active() const;
  // Active or still-retained retired version, else null.
  std::shared_ptr<Version> find(uint64_t version_id) const;
  const he::HeContext& context() const { return *ctx_; }
  const StoreOptions& options() const { return options_; }

  // Writes the value and re-encodes every block whose coverage holds the
  // key's position. Throws kNotFound for unknown keys.
  void update_value(uint64_t key, std::span<const uint8_t> value);

  // Builds the successor version off to the side and swaps it in. Blocks
  // entirely before the first changed position are shared, not re-encoded.
  // Throws kConflict when an insert collides with a present key, kNotFound
  // when a delete is absent.
  uint64_t batch_update_keys(std::vector<InsertPair> inserts, std::vector<uint64_t> deletes);

  // Session bookkeeping for retirement.
  void acknowledge(uint64_t session_id, uint64_t version_id);
  void drop_session(uint64_t session_id);
  size_t retained_versions() const;

 private:
  std::shared_ptr<Version> make_version(KvStore kv, const varpir::EncodedStore* previous,
                                        uint64_t first_changed_pt) const;
  void collect_locked();

  std::shared_ptr<const he::HeContext> ctx_;
  StoreOptions options_;
  mutable std::mutex mu_;
  std::mutex admin_mu_;  // serializes writers
  std::shared_ptr<Version> active_;
  struct Retired {
    std::shared_ptr<Version> version;
    std::chrono::steady_clock::time_point since;
  };
  std::map<uint64_t, Retired> retired_;
  std::map<uint64_t, uint64_t> sessions_;
};

// Plain download: pairs covered by the range in cyclic order, canonical
// layout. Each block's pairs are copied under its shared lock.
Bytes ReadRange(const Version& version, const dldp::ObfuscatedRange& range);

// Sorted merge of (kv ∪ inserts) \ deletes, with the lowest position whose
// pair changed. Throws as batch_update_keys.
std::pair<KvStore, uint64_t> MergeKeys(const KvStore& kv, std::vector<InsertPair> inserts,
                                       std::vector<uint64_t> deletes);

}  // namespace rangepir::store
