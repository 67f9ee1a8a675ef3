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

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "rangepir/he/he.hpp"
#include "rangepir/protocol/transport.hpp"
#include "rangepir/protocol/wire.hpp"
#include "rangepir/store/versioned_store.hpp"

namespace rangepir::protocol {

struct ServerConfig {
  double bandwidth_hint = 50e6;
  double rtt_hint = 0.030;
  // Plaintexts in the startup c_fhe measurement.
  size_t calibration_plaintexts = 64;
  // Skips the measurement when set.
  std::optional<double> c_fhe_override;
};

// Per-connection state. Admin sessions accept update frames and nothing
// else; client sessions never accept them.
class Session {
 public:
  Session(std::shared_ptr<store::VersionedStore> store, uint64_t id, bool admin)
      : store_(std::move(store)), id_(id), admin_(admin) {}
  ~Session() { store_->drop_session(id_); }
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  uint64_t id() const { return id_; }
  bool admin() const { return admin_; }
  const he::GaloisKeys* keys() const { return keys_ ? &*keys_ : nullptr; }
  void set_keys(he::GaloisKeys keys) { keys_ = std::move(keys); }

 private:
  std::shared_ptr<store::VersionedStore> store_;
  uint64_t id_;
  bool admin_;
  std::optional<he::GaloisKeys> keys_;
};

// Mean seconds per plaintext of a VarPIR answer (expansion plus product)
// over the first `plaintexts` blocks, one warm-up run excluded.
double CalibrateFhe(const varpir::EncodedStore& enc, size_t plaintexts);

class Server {
 public:
  Server(std::shared_ptr<store::VersionedStore> store, ServerConfig config = {});

  std::unique_ptr<Session> open_session(bool admin = false);
  // Never throws; failures become ERROR frames.
  std::optional<Frame> handle(Session& session, const Frame& request);

  InitBundle bundle() const;
  double c_fhe() const { return c_fhe_; }
  store::VersionedStore& store() { return *store_; }

  // In-process client connection with its own session.
  std::unique_ptr<LoopbackChannel> connect_loopback(bool admin = false);

  // Reads frames until the peer disconnects.
  void serve(Channel& channel, Session& session);

 private:
  Frame handle_plain(Session& session, const Frame& request);
  Frame handle_varpir(Session& session, const Frame& request);
  Frame stale_or(const store::Version& served, Frame inner);
  InitBundle bundle_for(const store::Version& v) const;

  std::shared_ptr<store::VersionedStore> store_;
  ServerConfig config_;
  double c_fhe_ = 0.0;
  std::atomic<uint64_t> next_session_{1};
};

// Accepts client and (optionally) admin connections, one thread each.
class TcpServer {
 public:
  TcpServer(Server& server, std::unique_ptr<TcpListener> clients,
            std::unique_ptr<TcpListener> admin = nullptr);
  ~TcpServer();
  void stop();

 private:
  void accept_loop(TcpListener& listener, bool admin);

  Server& server_;
  std::unique_ptr<TcpListener> clients_, admin_;
  std::mutex mu_;
  std::vector<std::thread> threads_;
  std::vector<TcpChannel*> open_;
  bool stopping_ = false;
};

}  // namespace rangepir::protocol
