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

#include "rangepir/bench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <map>
#include <mutex>
#include <set>
#include <thread>

namespace rangepir::bench {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::duration d) { return std::chrono::duration<double>(d).count(); }

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : (v[k - 1] + v[k]) / 2;
}

uint64_t AbsentKey(const store::KvStore& kv, SecureRng& rng) {
  for (;;) {
    const uint64_t k = rng() >> 1;
    if (!kv.find(k)) return k;
  }
}

Bytes RandomValue(size_t bytes, SecureRng& rng) {
  Bytes v(bytes);
  for (auto& b : v) b = static_cast<uint8_t>(rng());
  return v;
}

}  // namespace

Deployment MakeDeployment(store::KvStore kv, he::HeParams he, store::StoreOptions options,
                          protocol::ServerConfig config) {
  Deployment d;
  auto ctx = std::make_shared<const he::HeContext>(std::move(he));
  d.store = std::make_shared<store::VersionedStore>(ctx, std::move(kv), options);
  d.server = std::make_unique<protocol::Server>(d.store, config);
  return d;
}

SimulatedClient ConnectSimulated(protocol::Server& server, double bandwidth_bps, double rtt,
                                 uint64_t seed) {
  auto channel = std::make_unique<protocol::SimulatedChannel>(server.connect_loopback(),
                                                              bandwidth_bps, rtt);
  SimulatedClient c;
  c.link = channel.get();
  c.client = std::make_unique<protocol::Client>(std::move(channel),
                                                protocol::ClientOptions{.seed = seed});
  c.client->set_link(bandwidth_bps, rtt);
  return c;
}

TimedLookup TimeLookup(SimulatedClient& c, const protocol::LookupRequest& request) {
  TimedLookup out;
  c.link->link().reset();
  const auto start = Clock::now();
  out.result = c.client->lookup(request);
  out.compute_seconds = Seconds(Clock::now() - start);
  out.link_seconds = c.link->link().elapsed();
  out.realtime = c.link->link().realtime();
  return out;
}

std::vector<RangeLengthRow> BenchRangeLengths(const std::vector<uint64_t>& ts, double eps_dp,
                                              uint32_t eps_data, uint64_t page_m,
                                              uint64_t trials, uint64_t domain, uint64_t seed) {
  Require(trials > 1 && domain > 2ull * eps_data + 1 && page_m >= 1 && domain % page_m == 0,
          ErrorCode::kInvalidArgument, "bad range-length benchmark parameters");
  std::vector<RangeLengthRow> rows;
  SecureRng rng(seed);
  dldp::DiscreteLaplaceNoise noise(rng);
  const uint64_t pages = domain / page_m;
  for (uint64_t t : ts) {
    // Both granularities see the raw distance t.
    const dldp::PrivacyParams params{eps_dp, t, dldp::TMode::kRaw};
    double sum_pgm = 0, sq_pgm = 0, sum_bt = 0, sq_bt = 0;
    for (uint64_t i = 0; i < trials; ++i) {
      const uint64_t pos = rng.uniform(domain);
      const pgm::PredictedRange pred{pos, pos >= eps_data ? pos - eps_data : 0,
                                     std::min(domain - 1, pos + eps_data)};
      const double len_pgm =
          static_cast<double>(dldp::ObfuscateRange(pred, domain, params, noise).length());
      sum_pgm += len_pgm;
      sq_pgm += len_pgm * len_pgm;
      const uint64_t page = pos / page_m;
      const double len_bt = static_cast<double>(
          dldp::BtreeObfuscateRange(page, page, pages, page_m, params, noise).length() * page_m);
      sum_bt += len_bt;
      sq_bt += len_bt * len_bt;
    }
    auto row = [&](const char* name, double sum, double sq, double expected) {
      RangeLengthRow r;
      r.mechanism = name;
      r.t = t;
      r.trials = trials;
      r.mean_len = sum / static_cast<double>(trials);
      const double var = (sq - sum * r.mean_len) / static_cast<double>(trials - 1);
      r.stddev = std::sqrt(std::max(var, 0.0));
      r.expected_len = expected;
      const double se = r.stddev / std::sqrt(static_cast<double>(trials));
      r.z = se > 0 ? (r.mean_len - expected) / se : 0.0;
      rows.push_back(r);
    };
    row("pgm", sum_pgm, sq_pgm, dldp::ExpectedRangeLength(t, eps_dp, eps_data, domain));
    row("btree", sum_bt, sq_bt,
        std::min<double>(static_cast<double>(domain),
                         dldp::BtreeExpectedRangeLength(t, eps_dp, page_m)));
  }
  return rows;
}

size_t BtreeInternalBytes(uint64_t n, uint64_t page_m) {
  Require(page_m >= 2, ErrorCode::kInvalidArgument, "fan-out must be at least 2");
  uint64_t nodes = (n + page_m - 1) / page_m;  // leaves
  size_t bytes = 0;
  while (nodes > 1) {
    const uint64_t parents = (nodes + page_m - 1) / page_m;
    bytes += parents * page_m * 16;
    nodes = parents;
  }
  return bytes;
}

std::vector<IndexSizeRow> BenchIndexSize(const std::vector<store::Distribution>& datasets,
                                         uint64_t n, const std::vector<uint32_t>& eps_list,
                                         uint64_t page_m, uint64_t seed) {
  std::vector<IndexSizeRow> rows;
  for (store::Distribution dist : datasets) {
    const store::KvStore kv = store::GenerateDataset(n, dist, 8, seed);
    for (uint32_t eps : eps_list) {
      const pgm::PgmIndex index = pgm::PgmIndex::Build(kv.keys(), eps);
      IndexSizeRow r;
      r.dataset = std::string(store::ToString(dist));
      r.n = n;
      r.eps_data = eps;
      r.segments = index.segment_count();
      r.pgm_bytes = index.serialize().size();
      r.btree_bytes = BtreeInternalBytes(n, page_m);
      rows.push_back(r);
    }
  }
  return rows;
}

bool CrossoverRow::within_slack(double slack) const {
  const double chosen_cost =
      chosen == protocol::Scheme::kPlainDownload ? measured_plain : measured_varpir;
  return chosen_cost <= (1.0 + slack) * std::min(measured_plain, measured_varpir);
}

std::vector<CrossoverRow> BenchCrossover(Deployment& d, const std::vector<double>& bandwidths,
                                         const std::vector<uint64_t>& ts, uint64_t queries,
                                         double rtt, uint64_t seed) {
  const auto version = d.store->active();
  const store::KvStore& kv = version->kv;
  std::vector<CrossoverRow> rows;
  SecureRng rng(seed);
  for (double bw : bandwidths) {
    SimulatedClient c = ConnectSimulated(*d.server, bw, rtt, rng());
    for (uint64_t t : ts) {
      CrossoverRow row;
      row.bandwidth = bw;
      row.t = t;
      row.queries = queries;
      const dldp::TMode mode =
          t > 2ull * version->index.eps_data() ? dldp::TMode::kAdjusted : dldp::TMode::kRaw;
      for (uint64_t q = 0; q < queries; ++q) {
        const size_t pos = rng.uniform(kv.size());
        for (protocol::Scheme s : {protocol::Scheme::kPlainDownload, protocol::Scheme::kVarPir}) {
          const TimedLookup tl =
              TimeLookup(c, {.key = kv.key(pos), .t = t, .mode = mode, .scheme = s});
          row.correct = row.correct && tl.result.value &&
                        std::ranges::equal(*tl.result.value, kv.value(pos));
          (s == protocol::Scheme::kPlainDownload ? row.measured_plain : row.measured_varpir) +=
              tl.total();
          if (s == protocol::Scheme::kPlainDownload) {
            row.predicted_plain += tl.result.costs.plain;
            row.predicted_varpir += tl.result.costs.varpir;
          }
        }
      }
      const double k = static_cast<double>(queries);
      row.measured_plain /= k;
      row.measured_varpir /= k;
      row.predicted_plain /= k;
      row.predicted_varpir /= k;
      row.chosen = row.predicted_varpir < row.predicted_plain ? protocol::Scheme::kVarPir
                                                              : protocol::Scheme::kPlainDownload;
      row.measured_best = row.measured_varpir < row.measured_plain
                              ? protocol::Scheme::kVarPir
                              : protocol::Scheme::kPlainDownload;
      rows.push_back(row);
    }
  }
  return rows;
}

UpdateBenchResult BenchUpdates(Deployment& d, uint64_t query_count, double update_interval,
                               uint64_t t, double bandwidth, double rtt, uint64_t repeats,
                               uint64_t seed, bool realtime) {
  Require(query_count >= 2 && repeats >= 1, ErrorCode::kInvalidArgument,
          "need at least two queries and one repeat");
  const store::KvStore kv = d.store->active()->kv;  // oracle for the starting version
  const uint64_t v0 = kv.version_id();
  SecureRng rng(seed);

  // Disjoint key roles: hot keys take value updates, victims are deleted by
  // the batch; queries only read the rest, so each has one right answer.
  std::set<size_t> reserved;
  std::vector<uint64_t> hot, victims;
  auto pick = [&](std::vector<uint64_t>& into, size_t count) {
    while (into.size() < count) {
      const size_t pos = rng.uniform(kv.size());
      if (reserved.insert(pos).second) into.push_back(kv.key(pos));
    }
  };
  pick(hot, 32);
  pick(victims, 32);
  std::vector<uint64_t> keys;
  while (keys.size() < query_count) {
    const size_t pos = rng.uniform(kv.size());
    if (keys.size() % 5 == 4) {
      keys.push_back(AbsentKey(kv, rng));
    } else if (!reserved.contains(pos)) {
      keys.push_back(kv.key(pos));
    }
  }
  std::map<uint64_t, Bytes> inserted;
  while (inserted.size() < 32) {
    const uint64_t k = AbsentKey(kv, rng);
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      inserted[k] = RandomValue(kv.value_bytes(), rng);
    }
  }

  auto expect_v0 = [&](uint64_t key) -> std::optional<Bytes> {
    if (const auto pos = kv.find(key)) return Bytes(kv.value(*pos).begin(), kv.value(*pos).end());
    return std::nullopt;
  };
  auto expect_v1 = [&](uint64_t key) -> std::optional<Bytes> {
    if (auto it = inserted.find(key); it != inserted.end()) return it->second;
    if (std::find(victims.begin(), victims.end(), key) != victims.end()) return std::nullopt;
    return expect_v0(key);
  };

  SimulatedClient c = ConnectSimulated(*d.server, bandwidth, rtt, rng());
  c.link->link().set_realtime(realtime);
  auto admin = d.server->connect_loopback(true);
  UpdateBenchResult out;
  out.queries = query_count;
  const dldp::TMode mode =
      t > 2ull * d.store->active()->index.eps_data() ? dldp::TMode::kAdjusted : dldp::TMode::kRaw;

  auto run = [&](bool with_updates) {
    std::mutex mu;
    std::condition_variable cv;
    bool stop = false;
    std::thread updater;
    if (with_updates) {
      updater = std::thread([&, r = rng.fork()]() mutable {
        size_t i = 0;
        std::unique_lock lock(mu);
        while (!cv.wait_for(lock, std::chrono::duration<double>(update_interval),
                            [&] { return stop; })) {
          admin->send(protocol::EncodeValueUpdate(
              {hot[i++ % hot.size()], RandomValue(kv.value_bytes(), r)}));
          protocol::DecodeAdminAck(admin->receive(), protocol::MessageType::kAdminUpdateValue);
          ++out.value_updates;
        }
      });
    }
    double total = 0;
    for (uint64_t key : keys) {
      const TimedLookup tl = TimeLookup(c, {.key = key, .t = t, .mode = mode});
      total += tl.total();
      out.wrong += tl.result.value != expect_v0(key);
    }
    if (with_updates) {
      {
        std::lock_guard lock(mu);
        stop = true;
      }
      cv.notify_all();
      updater.join();
    }
    return total;
  };

  std::vector<double> base, updated;
  for (uint64_t r = 0; r < repeats; ++r) {
    base.push_back(run(false));
    updated.push_back(run(true));
  }
  out.base_seconds = Median(base);
  out.update_seconds = Median(updated);
  out.ratio = out.update_seconds / out.base_seconds;

  // Batch key update issued while a query is in flight.
  std::vector<uint64_t> batch_keys = keys;
  size_t slot = query_count / 2 + 1;
  for (const auto& [k, v] : inserted) {
    if (slot >= batch_keys.size()) break;
    batch_keys[slot] = k;
    slot += 2;
  }
  for (uint64_t victim : victims) {
    if (slot >= batch_keys.size()) break;
    batch_keys[slot] = victim;
    slot += 2;
  }
  std::thread batch;
  for (size_t i = 0; i < batch_keys.size(); ++i) {
    if (i == query_count / 2) {
      batch = std::thread([&] {
        protocol::BatchUpdate u;
        for (const auto& [k, v] : inserted) u.inserts.push_back({k, v});
        u.deletes = victims;
        admin->send(protocol::EncodeBatchUpdate(u));
        out.final_version =
            protocol::DecodeAdminAck(admin->receive(), protocol::MessageType::kAdminBatchUpdate);
      });
    }
    // Keys that only exist after the batch are queried once it has landed.
    if (i == query_count / 2 + 1 && batch.joinable()) batch.join();
    const protocol::LookupResult r =
        c.client->lookup({.key = batch_keys[i], .t = t, .mode = mode});
    ++out.batch_queries;
    out.stale_queries += r.stale_retries > 0;
    out.max_stale_retries = std::max<uint64_t>(out.max_stale_retries, r.stale_retries);
    const auto expect = r.version_id == v0 ? expect_v0(batch_keys[i]) : expect_v1(batch_keys[i]);
    out.wrong += r.value != expect;
  }
  if (batch.joinable()) batch.join();
  return out;
}

void WriteCsv(std::ostream& out, const std::vector<RangeLengthRow>& rows) {
  out << "mechanism,t,trials,mean_len,expected_len,stddev,z\n";
  for (const auto& r : rows) {
    out << r.mechanism << ',' << r.t << ',' << r.trials << ',' << r.mean_len << ','
        << r.expected_len << ',' << r.stddev << ',' << r.z << '\n';
  }
}

void WriteCsv(std::ostream& out, const std::vector<IndexSizeRow>& rows) {
  out << "dataset,n,eps_data,segments,pgm_bytes,pgm_mib,btree_bytes,btree_mib\n";
  for (const auto& r : rows) {
    out << r.dataset << ',' << r.n << ',' << r.eps_data << ',' << r.segments << ','
        << r.pgm_bytes << ',' << r.pgm_bytes / 1048576.0 << ',' << r.btree_bytes << ','
        << r.btree_bytes / 1048576.0 << '\n';
  }
}

void WriteCsv(std::ostream& out, const std::vector<CrossoverRow>& rows) {
  out << "bandwidth_bps,t,queries,predicted_plain_s,predicted_varpir_s,chosen,"
         "measured_plain_s,measured_varpir_s,measured_best,within_20pct,correct\n";
  for (const auto& r : rows) {
    out << r.bandwidth << ',' << r.t << ',' << r.queries << ',' << r.predicted_plain << ','
        << r.predicted_varpir << ',' << protocol::ToString(r.chosen) << ',' << r.measured_plain
        << ',' << r.measured_varpir << ',' << protocol::ToString(r.measured_best) << ','
        << r.within_slack(0.2) << ',' << r.correct << '\n';
  }
}

void WriteCsv(std::ostream& out, const UpdateBenchResult& r) {
  out << "queries,base_s,with_updates_s,ratio,value_updates,batch_queries,stale_queries,"
         "max_stale_retries,wrong,final_version\n";
  out << r.queries << ',' << r.base_seconds << ',' << r.update_seconds << ',' << r.ratio << ','
      << r.value_updates << ',' << r.batch_queries << ',' << r.stale_queries << ','
      << r.max_stale_retries << ',' << r.wrong << ',' << r.final_version << '\n';
}

}  // namespace rangepir::bench
