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

#include <memory>
#include <optional>

#include "rangepir/common/rng.hpp"
#include "rangepir/dldp/dldp.hpp"
#include "rangepir/he/he.hpp"
#include "rangepir/pgm/pgm_index.hpp"
#include "rangepir/protocol/cost_model.hpp"
#include "rangepir/protocol/transport.hpp"
#include "rangepir/protocol/wire.hpp"

namespace rangepir::protocol {

struct ClientOptions {
  std::optional<uint64_t> seed;  // reproducible keys and noise when set
  dldp::Reduction reduction = dldp::Reduction::kFoldMagnitude;
  size_t max_stale_retries = 3;
};

struct LookupRequest {
  uint64_t key = 0;
  uint64_t t = 1;
  double eps_dp = dldp::kDefaultEpsDp;
  dldp::TMode mode = dldp::TMode::kAdjusted;
  std::optional<Scheme> scheme;  // overrides the cost model
};

struct LookupResult {
  std::optional<Bytes> value;
  Scheme scheme = Scheme::kPlainDownload;
  uint64_t version_id = 0;  // version the answer came from
  pgm::PredictedRange predicted;
  dldp::ObfuscatedRange range;
  varpir::PtRange pt_range;
  SchemeCosts costs;
  size_t stale_retries = 0;
  Frame request;  // last query frame sent
  size_t response_bytes = 0;
};

// One session against a server; one request at a time.
class Client {
 public:
  // Runs the initialization exchange and uploads Galois keys.
  explicit Client(std::unique_ptr<Channel> channel, ClientOptions options = {});

  // Fetches a fresh bundle (keys are kept when the HE parameters agree).
  void init();

  LookupResult lookup(const LookupRequest& request, dldp::NoiseSource* noise = nullptr);

  const InitBundle& bundle() const { return bundle_; }
  const pgm::PgmIndex& index() const { return index_; }
  uint64_t version_id() const { return bundle_.version_id; }
  const he::HeContext& context() const { return *ctx_; }
  Channel& channel() { return *channel_; }

  // Link figures fed to the cost model; default to the bundle's hints.
  void set_link(double bandwidth_bps, double rtt_seconds);
  CostInputs cost_inputs() const;

 private:
  void install_version(uint64_t version_id, std::span<const uint8_t> pgm_blob);
  std::optional<Bytes> verify_plain(const Frame& reply, const LookupResult& r, uint64_t key) const;
  std::optional<Bytes> verify_varpir(const Frame& reply, const LookupResult& r, uint64_t key) const;

  std::unique_ptr<Channel> channel_;
  ClientOptions options_;
  SecureRng rng_;
  dldp::DiscreteLaplaceNoise noise_;
  InitBundle bundle_;
  pgm::PgmIndex index_;
  std::shared_ptr<const he::HeContext> ctx_;
  std::optional<he::SecretKey> sk_;
  std::optional<double> bandwidth_, rtt_;
};

}  // namespace rangepir::protocol
