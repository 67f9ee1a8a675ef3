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
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "rangepir/protocol/wire.hpp"

namespace rangepir::protocol {

// Bidirectional, in-order frame stream. Counts wire bytes both ways.
class Channel {
 public:
  virtual ~Channel() = default;

  void send(const Frame& frame) {
    sent_ += frame.wire_size();
    do_send(frame);
  }
  Frame receive() {
    Frame f = do_receive();
    received_ += f.wire_size();
    return f;
  }

  uint64_t bytes_sent() const { return sent_; }
  uint64_t bytes_received() const { return received_; }

 protected:
  virtual void do_send(const Frame& frame) = 0;
  virtual Frame do_receive() = 0;

 private:
  uint64_t sent_ = 0;
  uint64_t received_ = 0;
};

// Request handler on the far side of an in-process channel. Returns the
// reply frame, if any.
using FrameHandler = std::function<std::optional<Frame>(const Frame&)>;

// In-process channel: every frame is encoded to bytes and decoded again,
// then handed synchronously to the handler.
class LoopbackChannel final : public Channel {
 public:
  explicit LoopbackChannel(FrameHandler handler) : handler_(std::move(handler)) {}

 protected:
  void do_send(const Frame& frame) override;
  Frame do_receive() override;

 private:
  FrameHandler handler_;
  std::deque<Bytes> inbox_;
};

// Deterministic link model. Each frame costs wire_bytes*8/bandwidth plus
// rtt/2 in its direction; the costs accumulate on a virtual clock. In
// realtime mode the channel also sleeps for each charge.
class SimulatedLink {
 public:
  SimulatedLink(double bandwidth_bps, double rtt_seconds);

  double bandwidth() const { return bandwidth_; }
  double rtt() const { return rtt_; }
  double elapsed() const { return elapsed_; }
  bool realtime() const { return realtime_; }
  void set_realtime(bool on) { realtime_ = on; }
  void reset() { elapsed_ = 0.0; }
  // Returns the delay charged for one frame.
  double charge(size_t wire_bytes) {
    const double d = TransferDelay(wire_bytes) + rtt_ / 2;
    elapsed_ += d;
    return d;
  }
  double TransferDelay(size_t bytes) const { return static_cast<double>(bytes) * 8.0 / bandwidth_; }

 private:
  double bandwidth_;
  double rtt_;
  double elapsed_ = 0.0;
  bool realtime_ = false;
};

class SimulatedChannel final : public Channel {
 public:
  SimulatedChannel(std::unique_ptr<Channel> inner, double bandwidth_bps, double rtt_seconds)
      : inner_(std::move(inner)), link_(bandwidth_bps, rtt_seconds) {}

  SimulatedLink& link() { return link_; }

 protected:
  void do_send(const Frame& frame) override;
  Frame do_receive() override;

 private:
  std::unique_ptr<Channel> inner_;
  SimulatedLink link_;
};

// Blocking TCP stream.
class TcpChannel final : public Channel {
 public:
  explicit TcpChannel(int fd) : fd_(fd) {}
  ~TcpChannel() override;
  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  // host:port; throws kTransport.
  static std::unique_ptr<TcpChannel> Connect(const std::string& host, uint16_t port);

  // Half-closes and wakes a peer blocked in receive.
  void shutdown();

 protected:
  void do_send(const Frame& frame) override;
  Frame do_receive() override;

 private:
  int fd_;
};

class TcpListener {
 public:
  // Binds host:port (port 0 picks a free port).
  TcpListener(const std::string& host, uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  uint16_t port() const { return port_; }
  // Blocks for the next connection; returns null once close() was called.
  std::unique_ptr<TcpChannel> accept();
  void close();

 private:
  int fd_;
  uint16_t port_ = 0;
};

// Parses "host:port".
std::pair<std::string, uint16_t> ParseEndpoint(const std::string& endpoint);

}  // namespace rangepir::protocol
