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

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cli_common.hpp"
#include "rangepir/bench/bench.hpp"

using namespace rangepir;

namespace {

// Writes to --out, or stdout when it is empty.
template <typename T>
void Emit(const std::string& path, const T& rows) {
  if (path.empty()) {
    bench::WriteCsv(std::cout, rows);
    return;
  }
  std::ofstream out(path);
  Require(static_cast<bool>(out), ErrorCode::kInvalidArgument, "cannot open output file");
  bench::WriteCsv(out, rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmarks; each subcommand writes CSV."};
  std::string out;
  uint64_t seed = 1;
  app.add_option("--out", out, "CSV path (default stdout)");
  app.add_option("--seed", seed)->capture_default_str();
  app.require_subcommand(1);
  app.fallthrough();

  auto* ranges = app.add_subcommand(
      "range-lengths",
      "mean obfuscated range length per t, item (pgm) vs page (btree) granularity\n"
      "columns: mechanism,t,trials,mean_len,expected_len,stddev,z");
  std::vector<uint64_t> ts{8, 64, 512, 4096};
  double eps_dp = dldp::kDefaultEpsDp;
  uint32_t eps_data = pgm::kDefaultEpsData;
  uint64_t page_m = 256, trials = 100000, domain = uint64_t{1} << 20;
  ranges->add_option("--t", ts)->capture_default_str();
  ranges->add_option("--eps-dp", eps_dp)->capture_default_str();
  ranges->add_option("--eps-data", eps_data)->capture_default_str();
  ranges->add_option("--page-m", page_m)->capture_default_str();
  ranges->add_option("--trials", trials)->capture_default_str();
  ranges->add_option("--domain", domain, "number of positions")->capture_default_str();

  auto* sizes = app.add_subcommand(
      "index-size",
      "client index bytes per dataset and eps_data\n"
      "columns: dataset,n,eps_data,segments,pgm_bytes,pgm_mib,btree_bytes,btree_mib");
  uint64_t size_n = 1000000;
  std::vector<std::string> datasets{"uniform", "normal", "clustered"};
  std::vector<uint32_t> eps_list{32, 64, 128, 256, 512};
  sizes->add_option("--n", size_n)->capture_default_str();
  sizes->add_option("--datasets", datasets)->capture_default_str();
  sizes->add_option("--eps-data", eps_list)->capture_default_str();
  sizes->add_option("--page-m", page_m)->capture_default_str();

  auto* cross = app.add_subcommand(
      "crossover",
      "predicted and measured latency of both schemes over a simulated link\n"
      "columns: bandwidth_bps,t,queries,predicted_plain_s,predicted_varpir_s,chosen,"
      "measured_plain_s,measured_varpir_s,measured_best,within_20pct,correct");
  std::string gen = "1048576,uniform,7";
  std::vector<double> bandwidths{10e6, 50e6, 100e6, 1000e6};
  std::vector<uint64_t> cross_ts{100, 10000};
  uint64_t queries = 5;
  double rtt = 0.030;
  cross->add_option("--gen", gen, "dataset N,DIST,SEED")->capture_default_str();
  cross->add_option("--bandwidths", bandwidths, "bits/s")->capture_default_str();
  cross->add_option("--t", cross_ts)->capture_default_str();
  cross->add_option("--queries", queries, "per grid cell")->capture_default_str();
  cross->add_option("--rtt", rtt, "seconds")->capture_default_str();

  auto* updates = app.add_subcommand(
      "updates",
      "lookup latency with and without concurrent value updates, then one batch update\n"
      "columns: queries,base_s,with_updates_s,ratio,value_updates,batch_queries,"
      "stale_queries,max_stale_retries,wrong,final_version");
  std::string upd_gen = "1048576,uniform,7";
  uint64_t upd_queries = 200, upd_t = 100, repeats = 3;
  double interval = 0.1, bandwidth = 50e6;
  updates->add_option("--gen", upd_gen, "dataset N,DIST,SEED")->capture_default_str();
  updates->add_option("--queries", upd_queries)->capture_default_str();
  updates->add_option("--t", upd_t)->capture_default_str();
  updates->add_option("--interval", interval, "seconds between value updates")
      ->capture_default_str();
  updates->add_option("--bandwidth", bandwidth, "bits/s")->capture_default_str();
  updates->add_option("--rtt", rtt, "seconds")->capture_default_str();
  updates->add_option("--repeats", repeats)->capture_default_str();
  bool realtime = false;
  updates->add_flag("--realtime", realtime, "sleep the link delays instead of only adding them up");
  CLI11_PARSE(app, argc, argv);

  return tools::Guarded([&] {
    if (ranges->parsed()) {
      Emit(out, bench::BenchRangeLengths(ts, eps_dp, eps_data, page_m, trials, domain, seed));
    } else if (sizes->parsed()) {
      std::vector<store::Distribution> ds;
      for (const auto& name : datasets) ds.push_back(store::ParseDistribution(name));
      Emit(out, bench::BenchIndexSize(ds, size_n, eps_list, page_m, seed));
    } else if (cross->parsed()) {
      auto d = bench::MakeDeployment(tools::GenerateFromArg(gen, 8));
      Emit(out, bench::BenchCrossover(d, bandwidths, cross_ts, queries, rtt, seed));
    } else {
      auto d = bench::MakeDeployment(tools::GenerateFromArg(upd_gen, 8));
      Emit(out, bench::BenchUpdates(d, upd_queries, interval, upd_t, bandwidth, rtt, repeats,
                                    seed, realtime));
    }
    return 0;
  });
}
