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
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "rangepir/protocol/client.hpp"
#include "rangepir/protocol/server.hpp"
#include "rangepir/store/dataset.hpp"
#include "rangepir/store/versioned_store.hpp"

namespace rangepir::bench {

// Server plus store, for in-process experiments.
struct Deployment {
  std::shared_ptr<store::VersionedStore> store;
  std::unique_ptr<protocol::Server> server;
};

Deployment MakeDeployment(store::KvStore kv, he::HeParams he = {},
                          store::StoreOptions options = {},
                          protocol::ServerConfig config = {});

// Client whose link is simulated at the given bandwidth / rtt.
struct SimulatedClient {
  protocol::SimulatedChannel* link = nullptr;  // owned by client
  std::unique_ptr<protocol::Client> client;
};
SimulatedClient ConnectSimulated(protocol::Server& server, double bandwidth_bps, double rtt,
                                 uint64_t seed);

// Lookup latency: wall-clock compute on both sides plus the simulated link
// time accrued during the call. On a realtime link the wall clock already
// contains the link time.
struct TimedLookup {
  protocol::LookupResult result;
  double compute_seconds = 0.0;
  double link_seconds = 0.0;
  bool realtime = false;
  double total() const { return realtime ? compute_seconds : compute_seconds + link_seconds; }
};
TimedLookup TimeLookup(SimulatedClient& c, const protocol::LookupRequest& request);

// Mean obfuscated range length, item vs page granularity.
struct RangeLengthRow {
  std::string mechanism;  // "pgm" or "btree"
  uint64_t t = 0;
  uint64_t trials = 0;
  double mean_len = 0.0;
  double expected_len = 0.0;
  double stddev = 0.0;
  double z = 0.0;  // (mean - expected) / standard error
};
std::vector<RangeLengthRow> BenchRangeLengths(const std::vector<uint64_t>& ts, double eps_dp,
                                              uint32_t eps_data, uint64_t page_m,
                                              uint64_t trials, uint64_t domain, uint64_t seed);

// Client index sizes. The B+tree counts internal nodes only, each
// holding up to page_m (key, child) entries of 16 bytes.
struct IndexSizeRow {
  std::string dataset;
  uint64_t n = 0;
  uint32_t eps_data = 0;
  size_t segments = 0;
  size_t pgm_bytes = 0;
  size_t btree_bytes = 0;
};
size_t BtreeInternalBytes(uint64_t n, uint64_t page_m);
std::vector<IndexSizeRow> BenchIndexSize(const std::vector<store::Distribution>& datasets,
                                         uint64_t n, const std::vector<uint32_t>& eps_list,
                                         uint64_t page_m, uint64_t seed);

// Cost-model choice against measured latency of both schemes.
struct CrossoverRow {
  double bandwidth = 0.0;
  uint64_t t = 0;
  uint64_t queries = 0;
  double predicted_plain = 0.0;
  double predicted_varpir = 0.0;
  protocol::Scheme chosen = protocol::Scheme::kPlainDownload;
  double measured_plain = 0.0;
  double measured_varpir = 0.0;
  protocol::Scheme measured_best = protocol::Scheme::kPlainDownload;
  bool correct = true;
  // measured(chosen) <= (1 + slack) * min(measured)
  bool within_slack(double slack) const;
};
std::vector<CrossoverRow> BenchCrossover(Deployment& d, const std::vector<double>& bandwidths,
                                         const std::vector<uint64_t>& ts, uint64_t queries,
                                         double rtt, uint64_t seed);

// Update overhead and staleness handling.
struct UpdateBenchResult {
  uint64_t queries = 0;
  double base_seconds = 0.0;
  double update_seconds = 0.0;
  double ratio = 1.0;
  uint64_t value_updates = 0;
  uint64_t batch_queries = 0;
  uint64_t stale_queries = 0;
  uint64_t max_stale_retries = 0;
  uint64_t wrong = 0;
  uint64_t final_version = 0;
};
// With realtime set the link delays are slept, so updates on a wall-clock
// interval interleave with queries as they would on a real network.
UpdateBenchResult BenchUpdates(Deployment& d, uint64_t query_count, double update_interval,
                               uint64_t t, double bandwidth, double rtt, uint64_t repeats,
                               uint64_t seed, bool realtime = false);

void WriteCsv(std::ostream& out, const std::vector<RangeLengthRow>& rows);
void WriteCsv(std::ostream& out, const std::vector<IndexSizeRow>& rows);
void WriteCsv(std::ostream& out, const std::vector<CrossoverRow>& rows);
void WriteCsv(std::ostream& out, const UpdateBenchResult& r);

}  // namespace rangepir::bench
