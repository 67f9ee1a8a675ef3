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

#include <iostream>

#include <CLI11.hpp>

#include "cli_common.hpp"
#include "rangepir/protocol/client.hpp"

using namespace rangepir;

int main(int argc, char** argv) {
  CLI::App app{"Looks up one key privately."};
  std::string endpoint = "127.0.0.1:7000", scheme = "auto", mode = "adjusted";
  uint64_t key = 0, t = 1000;
  double eps_dp = dldp::kDefaultEpsDp;
  std::optional<uint64_t> seed;
  app.add_option("--endpoint", endpoint, "host:port")->capture_default_str();
  app.add_option("--key", key)->required();
  app.add_option("--t", t, "distance covered by the guarantee")->capture_default_str();
  app.add_option("--eps-dp", eps_dp)->capture_default_str();
  app.add_option("--scheme", scheme)
      ->check(CLI::IsMember({"auto", "plain", "varpir"}))
      ->capture_default_str();
  app.add_option("--mode", mode, "how t is read")
      ->check(CLI::IsMember({"adjusted", "raw"}))
      ->capture_default_str();
  app.add_option("--seed", seed, "fixed seed for keys and noise");
  CLI11_PARSE(app, argc, argv);

  return tools::Guarded([&] {
    const auto [host, port] = protocol::ParseEndpoint(endpoint);
    protocol::Client client(protocol::TcpChannel::Connect(host, port), {.seed = seed});
    protocol::LookupRequest req{.key = key, .t = t, .eps_dp = eps_dp,
                                .mode = mode == "raw" ? dldp::TMode::kRaw : dldp::TMode::kAdjusted};
    if (scheme != "auto") req.scheme = protocol::ParseScheme(scheme);
    const auto r = client.lookup(req);
    std::cout << (r.value ? tools::ToHex(*r.value) : "absent") << '\n';
    std::cerr << "scheme=" << protocol::ToString(r.scheme) << " version=" << r.version_id
              << " range=[" << r.range.l << "," << r.range.r << "] len=" << r.range.length()
              << " w_pt=" << r.pt_range.w_pt << " sent=" << client.channel().bytes_sent()
              << " received=" << client.channel().bytes_received()
              << " est_plain=" << r.costs.plain << " est_varpir=" << r.costs.varpir << '\n';
    return 0;
  });
}
