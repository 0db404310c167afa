// Copyright 2026 The poxsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "poxsim/transport.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

#include "poxsim/errors.h"

namespace poxsim {
namespace {

// One direction of an in-memory pipe.
struct Channel {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<uint8_t> bytes;
  bool closed = false;
};

class InMemoryTransport : public Transport {
 public:
  InMemoryTransport(std::shared_ptr<Channel> in, std::shared_ptr<Channel> out)
      : in_(std::move(in)), out_(std::move(out)) {}
  ~InMemoryTransport() override { Close(); }

  void WriteAll(std::span<const uint8_t> octets) override {
    std::lock_guard lock(out_->mu);
    if (out_->closed) throw TransportError("write on closed in-memory stream");
    out_->bytes.insert(out_->bytes.end(), octets.begin(), octets.end());
    out_->cv.notify_all();
  }

  size_t ReadSome(std::span<uint8_t> buf, Timeout timeout) override {
    std::unique_lock lock(in_->mu);
    auto ready = [&] { return !in_->bytes.empty() || in_->closed; };
    if (timeout) {
      if (!in_->cv.wait_for(lock, *timeout, ready)) {
        throw TimeoutError("in-memory read timed out");
      }
    } else {
      in_->cv.wait(lock, ready);
    }
    size_t n = 0;
    while (n < buf.size() && !in_->bytes.empty()) {
      buf[n++] = in_->bytes.front();
      in_->bytes.pop_front();
    }
    return n;
  }

  void Close() override {
    for (auto* ch : {in_.get(), out_.get()}) {
      std::lock_guard lock(ch->mu);
      ch->closed = true;
      ch->cv.notify_all();
    }
  }

 private:
  std::shared_ptr<Channel> in_;
  std::shared_ptr<Channel> out_;
};

std::string ErrnoText(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

// Waits for `events` on fd; throws TimeoutError on expiry.
void WaitFd(int fd, short events, Timeout timeout) {
  pollfd p{fd, events, 0};
  while (true) {
    const int rc = ::poll(&p, 1, timeout ? static_cast<int>(timeout->count()) : -1);
    if (rc > 0) return;
    if (rc == 0) throw TimeoutError("socket wait timed out");
    if (errno != EINTR) throw TransportError(ErrnoText("poll"));
  }
}

class TcpTransport : public Transport {
 public:
  explicit TcpTransport(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  ~TcpTransport() override { Close(); }

  void WriteAll(std::span<const uint8_t> octets) override {
    size_t sent = 0;
    while (sent < octets.size()) {
      const ssize_t n = ::send(fd_, octets.data() + sent, octets.size() - sent,
                               MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(ErrnoText("send"));
      }
      sent += static_cast<size_t>(n);
    }
  }

  size_t ReadSome(std::span<uint8_t> buf, Timeout timeout) override {
    if (fd_ < 0) return 0;
    WaitFd(fd_, POLLIN, timeout);
    while (true) {
      const ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
      if (n >= 0) return static_cast<size_t>(n);
      if (errno == EINTR) continue;
      if (errno == ECONNRESET) return 0;
      throw TransportError(ErrnoText("recv"));
    }
  }

  void Close() override {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  int fd_;
};

sockaddr_in ToSockaddr(const Endpoint& ep) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(ep.port);
  const std::string host = ep.host == "localhost" ? "127.0.0.1" : ep.host;
  if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1) {
    throw Error("not an IPv4 address: " + ep.host);
  }
  return sa;
}

}  // namespace

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>>
MakeInMemoryPair() {
  auto a_to_b = std::make_shared<Channel>();
  auto b_to_a = std::make_shared<Channel>();
  return {std::make_unique<InMemoryTransport>(b_to_a, a_to_b),
          std::make_unique<InMemoryTransport>(a_to_b, b_to_a)};
}

Endpoint Endpoint::Parse(const std::string& text) {
  const size_t colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw Error("expected host:port, got '" + text + "'");
  }
  Endpoint ep;
  ep.host = text.substr(0, colon);
  const char* first = text.data() + colon + 1;
  const char* last = text.data() + text.size();
  auto [end, ec] = std::from_chars(first, last, ep.port);
  if (ec != std::errc() || end != last) throw Error("bad port in '" + text + "'");
  return ep;
}

TcpListener::TcpListener(const Endpoint& at) {
  const sockaddr_in sa = ToSockaddr(at);
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) throw TransportError(ErrnoText("socket"));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&sa), sizeof(sa)) != 0 ||
      ::listen(fd_, 4) != 0) {
    const std::string msg = ErrnoText("bind/listen");
    ::close(fd_);
    throw TransportError(msg);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Transport> TcpListener::Accept(Timeout timeout) {
  WaitFd(fd_, POLLIN, timeout);
  const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
  if (fd < 0) throw TransportError(ErrnoText("accept"));
  return std::make_unique<TcpTransport>(fd);
}

std::unique_ptr<Transport> TcpConnect(const Endpoint& to) {
  const sockaddr_in sa = ToSockaddr(to);
  const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) throw TransportError(ErrnoText("socket"));
  if (::connect(fd, reinterpret_cast<const sockaddr*>(&sa), sizeof(sa)) != 0) {
    const std::string msg = ErrnoText("connect");
    ::close(fd);
    throw TransportError(msg);
  }
  return std::make_unique<TcpTransport>(fd);
}

}  // namespace poxsim
