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

// Framed verifier <-> prover protocol.
//
//   frame = length(4, big-endian, = payload size + 1) || type(1) || payload
//
// Payloads: AttestRequest carries a serialized Challenge, AttestResponse a
// serialized AttestReport, Error a single code octet.

#ifndef POXSIM_PROTOCOL_H_
#define POXSIM_PROTOCOL_H_

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "poxsim/attestation.h"
#include "poxsim/machine.h"
#include "poxsim/monitor.h"
#include "poxsim/transport.h"

namespace poxsim {

enum class MessageType : uint8_t {
  kAttestRequest = 0x01,
  kAttestResponse = 0x02,
  kError = 0xFF,
};

inline constexpr uint8_t kErrorBadToken = 0x01;
inline constexpr uint8_t kErrorMalformed = 0x02;
inline constexpr size_t kMaxPayload = 4096;
inline constexpr std::chrono::milliseconds kDefaultVerifyTimeout{5000};

struct Message {
  MessageType type = MessageType::kError;
  std::vector<uint8_t> payload;

  friend bool operator==(const Message&, const Message&) = default;
};

// Throws ProtocolError(kFrameTooLarge) for oversized payloads.
std::vector<uint8_t> EncodeMessage(const Message& msg);

// Decodes the first frame in `stream`; returns it with the number of octets
// consumed. Throws ProtocolError: kTruncatedFrame, kFrameTooLarge,
// kUnknownType.
std::pair<Message, size_t> DecodeMessage(std::span<const uint8_t> stream);

// Reads one frame. Returns nullopt if the stream ends cleanly before the
// first octet; throws ProtocolError(kTruncatedFrame) if it ends mid-frame.
std::optional<Message> ReadMessage(Transport& transport, Timeout timeout);
void WriteMessage(Transport& transport, const Message& msg);

struct SessionLog {
  std::vector<std::string> events;
  int responses = 0;
  int errors_sent = 0;
};

// Prover loop: answers each AttestRequest with a measurement of `machine`
// until the peer closes or sends something undecodable.
SessionLog ServeProver(Transport& transport, const Machine& machine,
                       const MonitorState& monitor, const MonitorConfig& cfg,
                       const AttestKey& key);

// Verifier: issues one challenge, awaits one response and verifies it.
Verdict RunVerifier(Transport& transport, const ExpectedState& expected,
                    const AttestKey& key, uint64_t rng_seed,
                    std::chrono::milliseconds timeout = kDefaultVerifyTimeout);

}  // namespace poxsim

#endif  // POXSIM_PROTOCOL_H_
