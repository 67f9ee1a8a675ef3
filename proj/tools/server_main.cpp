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

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "cli_common.hpp"
#include "rangepir/protocol/server.hpp"

using namespace rangepir;

int main(int argc, char** argv) {
  CLI::App app{"Serves a sorted key-value store for private lookups."};
  std::string data, gen, host = "0.0.0.0";
  size_t value_bytes = 8;
  uint16_t port = 7000, admin_port = 7001;
  uint32_t eps_data = pgm::kDefaultEpsData, eps_model = pgm::kDefaultEpsModel;
  size_t he_n = he::kDefaultRingDegree;
  double bandwidth_hint = 50e6, rtt_hint = 0.030;
  auto* source = app.add_option_group("source");
  source->add_option("--data", data, "SOSD key file");
  source->add_option("--gen", gen, "synthetic dataset N,DIST,SEED (uniform|normal|clustered)");
  source->require_option(1);
  app.add_option("--value-bytes", value_bytes, "value width (multiple of 8)")->capture_default_str();
  app.add_option("--host", host, "client listen address")->capture_default_str();
  app.add_option("--port", port, "client port")->capture_default_str();
  app.add_option("--admin-port", admin_port, "admin port, bound to 127.0.0.1 (0 disables)")
      ->capture_default_str();
  app.add_option("--eps-data", eps_data)->capture_default_str();
  app.add_option("--eps-model", eps_model)->capture_default_str();
  app.add_option("--he-n", he_n, "ring degree")->capture_default_str();
  app.add_option("--bandwidth-hint", bandwidth_hint, "bits/s advertised to clients")
      ->capture_default_str();
  app.add_option("--rtt-hint", rtt_hint, "seconds advertised to clients")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  return tools::Guarded([&] {
    store::KvStore kv = data.empty() ? tools::GenerateFromArg(gen, value_bytes)
                                     : store::LoadSosd(data, value_bytes);
    he::HeParams hp;
    hp.ring_degree = he_n;
    auto ctx = std::make_shared<const he::HeContext>(hp);
    store::StoreOptions opts;
    opts.eps_data = eps_data;
    opts.eps_model = eps_model;
    std::cerr << "encoding " << kv.size() << " pairs\n";
    auto vs = std::make_shared<store::VersionedStore>(ctx, std::move(kv), opts);
    protocol::Server server(vs, {.bandwidth_hint = bandwidth_hint, .rtt_hint = rtt_hint});
    std::cerr << "c_fhe " << server.c_fhe() << " s/plaintext\n";

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    auto clients = std::make_unique<protocol::TcpListener>(host, port);
    auto admin = admin_port ? std::make_unique<protocol::TcpListener>("127.0.0.1", admin_port)
                            : nullptr;
    std::cerr << "listening on " << host << ':' << clients->port();
    if (admin) std::cerr << ", admin on 127.0.0.1:" << admin->port();
    std::cerr << '\n';
    protocol::TcpServer tcp(server, std::move(clients), std::move(admin));
    int sig = 0;
    sigwait(&signals, &sig);
    tcp.stop();
    return 0;
  });
}
