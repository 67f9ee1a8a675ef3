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
#include "rangepir/protocol/transport.hpp"

using namespace rangepir;

int main(int argc, char** argv) {
  CLI::App app{"Sends store updates to a server's local admin endpoint."};
  std::string endpoint = "127.0.0.1:7001";
  app.add_option("--endpoint", endpoint, "admin host:port")->capture_default_str();
  app.require_subcommand(1);
  app.fallthrough();

  auto* update = app.add_subcommand("update-value", "replace one value");
  uint64_t key = 0;
  std::string value_hex;
  update->add_option("--key", key)->required();
  update->add_option("--value", value_hex, "new value, hex")->required();

  auto* batch = app.add_subcommand("batch", "insert and delete keys as one new version");
  std::vector<std::string> inserts;
  std::vector<uint64_t> deletes;
  batch->add_option("--insert", inserts, "KEY:VALUEHEX");
  batch->add_option("--delete", deletes, "KEY");
  CLI11_PARSE(app, argc, argv);

  return tools::Guarded([&] {
    const auto [host, port] = protocol::ParseEndpoint(endpoint);
    auto channel = protocol::TcpChannel::Connect(host, port);
    if (update->parsed()) {
      channel->send(protocol::EncodeValueUpdate({key, tools::FromHex(value_hex)}));
      const uint64_t v =
          protocol::DecodeAdminAck(channel->receive(), protocol::MessageType::kAdminUpdateValue);
      std::cout << "version " << v << '\n';
    } else {
      protocol::BatchUpdate u;
      for (const std::string& s : inserts) {
        const size_t colon = s.find(':');
        Require(colon != std::string::npos, ErrorCode::kInvalidArgument, "--insert KEY:VALUEHEX");
        u.inserts.push_back({std::stoull(s.substr(0, colon)), tools::FromHex(s.substr(colon + 1))});
      }
      u.deletes = deletes;
      channel->send(protocol::EncodeBatchUpdate(u));
      const uint64_t v =
          protocol::DecodeAdminAck(channel->receive(), protocol::MessageType::kAdminBatchUpdate);
      std::cout << "version " << v << '\n';
    }
    return 0;
  });
}
