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

#include "poxsim/protocol.h"

#include "poxsim/errors.h"

namespace poxsim {
namespace {

constexpr size_t kHeaderSize = 5;

ProtocolError Truncated(const std::string& why) {
  return ProtocolError(ProtocolError::Kind::kTruncatedFrame, why);
}

uint32_t ReadBe32(std::span<const uint8_t> in) {
  return static_cast<uint32_t>(in[0]) << 24 | static_cast<uint32_t>(in[1]) << 16 |
         static_cast<uint32_t>(in[2]) << 8 | in[3];
}

// Validates the length and type octets of a frame header.
std::pair<MessageType, size_t> ParseHeader(std::span<const uint8_t> header) {
  const uint32_t length = ReadBe32(header);
  if (length == 0) throw Truncated("frame length 0 leaves no type octet");
  if (length - 1 > kMaxPayload) {
    throw ProtocolError(ProtocolError::Kind::kFrameTooLarge,
                        "frame payload of " + std::to_string(length - 1) +
                            " octets exceeds 4096");
  }
  const uint8_t type = header[4];
  if (type != 0x01 && type != 0x02 && type != 0xFF) {
    throw ProtocolError(ProtocolError::Kind::kUnknownType,
                        "unknown message type " + std::to_string(type));
  }
  return {static_cast<MessageType>(type), length - 1};
}

// Fills `buf` completely. Returns false on EOF before the first octet when
// `eof_ok` is set.
bool ReadExact(Transport& t, std::span<uint8_t> buf, Timeout timeout, bool eof_ok) {
  size_t got = 0;
  while (got < buf.size()) {
    const size_t n = t.ReadSome(buf.subspan(got), timeout);
    if (n == 0) {
      if (got == 0 && eof_ok) return false;
      throw Truncated("stream ended inside a frame");
    }
    got += n;
  }
  return true;
}

Message ErrorMessage(uint8_t code) { return {MessageType::kError, {code}}; }

}  // namespace

std::vector<uint8_t> EncodeMessage(const Message& msg) {
  if (msg.payload.size() > kMaxPayload) {
    throw ProtocolError(ProtocolError::Kind::kFrameTooLarge,
                        "payload exceeds 4096 octets");
  }
  const auto length = static_cast<uint32_t>(msg.payload.size() + 1);
  std::vector<uint8_t> out = {
      static_cast<uint8_t>(length >> 24), static_cast<uint8_t>(length >> 16),
      static_cast<uint8_t>(length >> 8), static_cast<uint8_t>(length),
      static_cast<uint8_t>(msg.type)};
  out.insert(out.end(), msg.payload.begin(), msg.payload.end());
  return out;
}

std::pair<Message, size_t> DecodeMessage(std::span<const uint8_t> stream) {
  if (stream.size() < kHeaderSize) throw Truncated("incomplete frame header");
  const auto [type, payload_size] = ParseHeader(stream.first(kHeaderSize));
  if (stream.size() < kHeaderSize + payload_size) {
    throw Truncated("incomplete frame payload");
  }
  Message msg{type, {stream.begin() + kHeaderSize,
                     stream.begin() + kHeaderSize + payload_size}};
  return {std::move(msg), kHeaderSize + payload_size};
}

std::optional<Message> ReadMessage(Transport& transport, Timeout timeout) {
  std::array<uint8_t, kHeaderSize> header{};
  if (!ReadExact(transport, header, timeout, /*eof_ok=*/true)) return std::nullopt;
  const auto [type, payload_size] = ParseHeader(header);
  Message msg{type, std::vector<uint8_t>(payload_size)};
  ReadExact(transport, msg.payload, timeout, /*eof_ok=*/false);
  return msg;
}

void WriteMessage(Transport& transport, const Message& msg) {
  transport.WriteAll(EncodeMessage(msg));
}

SessionLog ServeProver(Transport& transport, const Machine& machine,
                       const MonitorState& monitor, const MonitorConfig& cfg,
                       const AttestKey& key) {
  SessionLog log;
  auto reply_error = [&](uint8_t code) {
    WriteMessage(transport, ErrorMessage(code));
    ++log.errors_sent;
  };
  try {
    while (true) {
      std::optional<Message> msg;
      try {
        msg = ReadMessage(transport, std::nullopt);
      } catch (const ProtocolError& e) {
        log.events.push_back(std::string("protocol error: ") + e.what());
        break;
      }
      if (!msg) {
        log.events.push_back("peer closed");
        break;
      }
      if (msg->type != MessageType::kAttestRequest) {
        log.events.push_back("unexpected message type");
        reply_error(kErrorMalformed);
        continue;
      }
      Challenge chal;
      try {
        chal = Challenge::Parse(msg->payload);
      } catch (const ProtocolError&) {
        log.events.push_back("malformed challenge");
        reply_error(kErrorMalformed);
        continue;
      }
      try {
        const AttestReport report = Measure(machine, monitor, chal, key, cfg);
        WriteMessage(transport, {MessageType::kAttestResponse, report.Serialize()});
        ++log.responses;
        log.events.push_back(report.exec ? "attested exec=1" : "attested exec=0");
      } catch (const BadRequestToken&) {
        log.events.push_back("bad request token");
        reply_error(kErrorBadToken);
      }
    }
  } catch (const TransportError& e) {
    log.events.push_back(std::string("transport error: ") + e.what());
  }
  transport.Close();
  return log;
}

Verdict RunVerifier(Transport& transport, const ExpectedState& expected,
                    const AttestKey& key, uint64_t rng_seed,
                    std::chrono::milliseconds timeout) {
  VerifierSession session(key, expected);
  try {
    const Challenge chal = session.Issue(rng_seed);
    WriteMessage(transport, {MessageType::kAttestRequest, chal.Serialize()});
    const auto reply = ReadMessage(transport, timeout);
    if (!reply) return Verdict::Reject(RejectReason::kTransport);
    if (reply->type == MessageType::kError) {
      return Verdict::Reject(RejectReason::kProverError);
    }
    if (reply->type != MessageType::kAttestResponse) {
      return Verdict::Reject(RejectReason::kMalformed);
    }
    return session.VerifySerialized(reply->payload);
  } catch (const TimeoutError&) {
    return Verdict::Reject(RejectReason::kTimeout);
  } catch (const TransportError&) {
    return Verdict::Reject(RejectReason::kTransport);
  } catch (const ProtocolError&) {
    return Verdict::Reject(RejectReason::kMalformed);
  }
}

}  // namespace poxsim
