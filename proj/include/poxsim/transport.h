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

// Reliable ordered byte streams: an in-memory duplex pair and TCP.

#ifndef POXSIM_TRANSPORT_H_
#define POXSIM_TRANSPORT_H_

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>

namespace poxsim {

using Timeout = std::optional<std::chrono::milliseconds>;

class Transport {
 public:
  virtual ~Transport() = default;

  // Throws TransportError.
  virtual void WriteAll(std::span<const uint8_t> octets) = 0;
  // Reads up to buf.size() octets. Returns 0 once the peer has closed.
  // Throws TimeoutError if nothing arrives in time.
  virtual size_t ReadSome(std::span<uint8_t> buf, Timeout timeout) = 0;
  // Closes this end. Idempotent.
  virtual void Close() = 0;
};

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>>
MakeInMemoryPair();

// "host:port"; host may be a dotted IPv4 address or "localhost".
struct Endpoint {
  std::string host;
  uint16_t port = 0;

  // Throws Error on malformed input.
  static Endpoint Parse(const std::string& text);
};

class TcpListener {
 public:
  explicit TcpListener(const Endpoint& at);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  uint16_t port() const { return port_; }
  std::unique_ptr<Transport> Accept(Timeout timeout = std::nullopt);

 private:
  int fd_ = -1;
  uint16_t port_ = 0;
};

std::unique_ptr<Transport> TcpConnect(const Endpoint& to);

}  // namespace poxsim

#endif  // POXSIM_TRANSPORT_H_
