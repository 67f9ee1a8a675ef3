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

#include "rangepir/protocol/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

namespace rangepir::protocol {
namespace {

[[noreturn]] void FailErrno(const std::string& what) {
  Fail(ErrorCode::kTransport, what + ": " + std::strerror(errno));
}

void WriteAll(int fd, const uint8_t* data, size_t len) {
  while (len > 0) {
    const ssize_t k = ::send(fd, data, len, MSG_NOSIGNAL);
    if (k < 0) {
      if (errno == EINTR) continue;
      FailErrno("send");
    }
    data += k;
    len -= static_cast<size_t>(k);
  }
}

void ReadAll(int fd, uint8_t* data, size_t len) {
  while (len > 0) {
    const ssize_t k = ::recv(fd, data, len, 0);
    if (k < 0) {
      if (errno == EINTR) continue;
      FailErrno("recv");
    }
    if (k == 0) Fail(ErrorCode::kTransport, "connection closed");
    data += k;
    len -= static_cast<size_t>(k);
  }
}

}  // namespace

void LoopbackChannel::do_send(const Frame& frame) {
  const Frame request = DecodeFrame(EncodeFrame(frame));
  if (auto reply = handler_(request)) inbox_.push_back(EncodeFrame(*reply));
}

Frame LoopbackChannel::do_receive() {
  if (inbox_.empty()) Fail(ErrorCode::kTransport, "no reply pending");
  Frame f = DecodeFrame(inbox_.front());
  inbox_.pop_front();
  return f;
}

SimulatedLink::SimulatedLink(double bandwidth_bps, double rtt_seconds)
    : bandwidth_(bandwidth_bps), rtt_(rtt_seconds) {
  Require(bandwidth_bps > 0 && rtt_seconds >= 0, ErrorCode::kInvalidArgument,
          "bandwidth must be positive and rtt non-negative");
}

namespace {

void Delay(const SimulatedLink& link, double seconds) {
  if (link.realtime()) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

}  // namespace

void SimulatedChannel::do_send(const Frame& frame) {
  Delay(link_, link_.charge(frame.wire_size()));
  inner_->send(frame);
}

Frame SimulatedChannel::do_receive() {
  Frame f = inner_->receive();
  Delay(link_, link_.charge(f.wire_size()));
  return f;
}

TcpChannel::~TcpChannel() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<TcpChannel> TcpChannel::Connect(const std::string& host, uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res);
  if (rc != 0) Fail(ErrorCode::kTransport, "resolve " + host + ": " + ::gai_strerror(rc));
  int fd = -1;
  for (addrinfo* a = res; a; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) FailErrno("connect " + host + ":" + std::to_string(port));
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return std::make_unique<TcpChannel>(fd);
}

void TcpChannel::shutdown() { ::shutdown(fd_, SHUT_RDWR); }

void TcpChannel::do_send(const Frame& frame) {
  const Bytes bytes = EncodeFrame(frame);
  WriteAll(fd_, bytes.data(), bytes.size());
}

Frame TcpChannel::do_receive() {
  std::array<uint8_t, Frame::kHeaderBytes> header;
  ReadAll(fd_, header.data(), header.size());
  Frame f;
  const uint32_t len = ParseFrameHeader(header, f.type);
  f.payload.resize(len);
  ReadAll(fd_, f.payload.data(), len);
  return f;
}

TcpListener::TcpListener(const std::string& host, uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) FailErrno("socket");
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    Fail(ErrorCode::kInvalidArgument, "listen address must be IPv4: " + host);
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(fd_, 64) != 0) {
    const int saved = errno;
    ::close(fd_);
    errno = saved;
    FailErrno("bind " + host + ":" + std::to_string(port));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() { close(); }

std::unique_ptr<TcpChannel> TcpListener::accept() {
  while (true) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return std::make_unique<TcpChannel>(fd);
    }
    if (errno == EINTR || errno == ECONNABORTED) continue;
    return nullptr;
  }
}

void TcpListener::close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

std::pair<std::string, uint16_t> ParseEndpoint(const std::string& endpoint) {
  const size_t colon = endpoint.rfind(':');
  Require(colon != std::string::npos && colon + 1 < endpoint.size(), ErrorCode::kInvalidArgument,
          "endpoint must be host:port");
  const std::string port = endpoint.substr(colon + 1);
  unsigned long value = 0;
  try {
    size_t used = 0;
    value = std::stoul(port, &used);
    if (used != port.size()) throw std::invalid_argument(port);
  } catch (const std::exception&) {
    Fail(ErrorCode::kInvalidArgument, "bad port in endpoint " + endpoint);
  }
  Require(value <= 65535, ErrorCode::kInvalidArgument, "port out of range");
  return {endpoint.substr(0, colon), static_cast<uint16_t>(value)};
}

}  // namespace rangepir::protocol
