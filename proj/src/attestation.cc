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

#include "poxsim/attestation.h"

#include <algorithm>

#include "poxsim/errors.h"

namespace poxsim {
namespace {

constexpr std::string_view kRequestTag = "REQ";
constexpr size_t kReportFixedSize = 32 + 1 + 4 * 2 + 2 + 32;

void PutBe16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(v >> 8);
  out.push_back(v & 0xFF);
}

uint16_t GetBe16(std::span<const uint8_t> in, size_t at) {
  return static_cast<uint16_t>(in[at] << 8 | in[at + 1]);
}

void Append(std::vector<uint8_t>& out, std::span<const uint8_t> bytes) {
  out.insert(out.end(), bytes.begin(), bytes.end());
}

void PutLayout(std::vector<uint8_t>& out, const RegionLayout& layout) {
  PutBe16(out, layout.er.min);
  PutBe16(out, layout.er.max);
  PutBe16(out, layout.out.min);
  PutBe16(out, layout.out.max);
}

std::span<const uint8_t> Region(const MemoryImage& mem, const AddressRange& r) {
  return {mem.bytes.data() + r.min, r.size()};
}

}  // namespace

AttestKey AttestKey::FromHex(const std::string& hex) {
  const auto bytes = poxsim::FromHex(hex);
  if (bytes.size() != 32) throw Error("attestation key must be 32 octets");
  AttestKey key;
  std::copy(bytes.begin(), bytes.end(), key.bytes.begin());
  return key;
}

AttestKey AttestKey::Default() {
  AttestKey key;
  for (size_t i = 0; i < key.bytes.size(); ++i) {
    key.bytes[i] = static_cast<uint8_t>(0xA0 + i);
  }
  return key;
}

std::vector<uint8_t> Challenge::Serialize() const {
  std::vector<uint8_t> out(nonce.begin(), nonce.end());
  Append(out, auth_token);
  return out;
}

Challenge Challenge::Parse(std::span<const uint8_t> octets) {
  if (octets.size() != kSerializedSize) {
    throw ProtocolError(ProtocolError::Kind::kMalformed,
                        "challenge must be 64 octets");
  }
  Challenge chal;
  std::copy_n(octets.begin(), 32, chal.nonce.begin());
  std::copy_n(octets.begin() + 32, 32, chal.auth_token.begin());
  return chal;
}

Challenge MakeChallenge(const AttestKey& key, const Nonce& nonce) {
  std::vector<uint8_t> msg(kRequestTag.begin(), kRequestTag.end());
  Append(msg, nonce);
  return {nonce, HmacSha256(key.bytes, msg)};
}

Challenge NewChallenge(const AttestKey& key, uint64_t seed) {
  SeededRng rng(seed);
  return MakeChallenge(key, rng.NextBlock());
}

bool ChallengeAuthentic(const Challenge& chal, const AttestKey& key) {
  return ConstantTimeEqual(MakeChallenge(key, chal.nonce).auth_token,
                           chal.auth_token);
}

std::vector<uint8_t> AttestReport::Serialize() const {
  std::vector<uint8_t> out(nonce.begin(), nonce.end());
  out.push_back(exec ? 1 : 0);
  PutLayout(out, layout);
  PutBe16(out, static_cast<uint16_t>(or_bytes.size()));
  Append(out, or_bytes);
  Append(out, mac);
  return out;
}

AttestReport AttestReport::Parse(std::span<const uint8_t> in) {
  auto malformed = [](const char* why) {
    return ProtocolError(ProtocolError::Kind::kMalformed,
                         std::string("malformed report: ") + why);
  };
  if (in.size() < kReportFixedSize) throw malformed("too short");
  AttestReport r;
  std::copy_n(in.begin(), 32, r.nonce.begin());
  if (in[32] > 1) throw malformed("exec octet is not 0 or 1");
  r.exec = in[32] == 1;
  r.layout.er = {GetBe16(in, 33), GetBe16(in, 35)};
  r.layout.out = {GetBe16(in, 37), GetBe16(in, 39)};
  const uint16_t or_len = GetBe16(in, 41);
  if (in.size() != kReportFixedSize + or_len) throw malformed("length");
  if (r.layout.out.min > r.layout.out.max ||
      or_len != r.layout.out.size()) {
    throw malformed("or_len does not match OR bounds");
  }
  r.or_bytes.assign(in.begin() + 43, in.begin() + 43 + or_len);
  std::copy_n(in.begin() + 43 + or_len, 32, r.mac.begin());
  return r;
}

ExpectedState ExpectedState::FromImage(const MemoryImage& image,
                                       const RegionLayout& layout) {
  ExpectedState expected;
  expected.layout = layout;
  const auto er = Region(image, layout.er);
  expected.er_image.assign(er.begin(), er.end());
  std::copy_n(image.bytes.begin() + memmap::kIvtMin, memmap::kIvtSize,
              expected.ivt_image.begin());
  return expected;
}

Digest ComputeReportMac(const AttestKey& key, const Nonce& nonce, bool exec,
                        const RegionLayout& layout,
                        std::span<const uint8_t> er_bytes,
                        std::span<const uint8_t> or_bytes,
                        std::span<const uint8_t> ivt_bytes) {
  std::vector<uint8_t> msg(nonce.begin(), nonce.end());
  msg.reserve(32 + 1 + 8 + er_bytes.size() + or_bytes.size() +
              ivt_bytes.size());
  msg.push_back(exec ? 1 : 0);
  PutLayout(msg, layout);
  Append(msg, er_bytes);
  Append(msg, or_bytes);
  Append(msg, ivt_bytes);
  return HmacSha256(key.bytes, msg);
}

AttestReport Measure(const Machine& machine, const MonitorState& monitor,
                     const Challenge& chal, const AttestKey& key,
                     const MonitorConfig& cfg) {
  if (!ChallengeAuthentic(chal, key)) throw BadRequestToken();
  const auto& mem = machine.memory();
  AttestReport report;
  report.nonce = chal.nonce;
  report.exec = ExecBit(monitor);
  report.layout = {cfg.er, cfg.out};
  const auto out = Region(mem, cfg.out);
  report.or_bytes.assign(out.begin(), out.end());
  report.mac = ComputeReportMac(key, report.nonce, report.exec, report.layout,
                                Region(mem, cfg.er), out,
                                Region(mem, kIvtRange));
  return report;
}

std::string_view RejectReasonName(RejectReason reason) {
  switch (reason) {
    case RejectReason::kNonceMismatch:
      return "NonceMismatch";
    case RejectReason::kMacMismatch:
      return "MacMismatch";
    case RejectReason::kExecZero:
      return "ExecZero";
    case RejectReason::kLayoutMismatch:
      return "LayoutMismatch";
    case RejectReason::kMalformed:
      return "Malformed";
    case RejectReason::kProverError:
      return "ProverError";
    case RejectReason::kTransport:
      return "Transport";
    case RejectReason::kTimeout:
      return "Timeout";
  }
  return "?";
}

std::string Verdict::ToString() const {
  if (accepted()) return "Accept";
  return "Reject(" + std::string(RejectReasonName(*reject)) + ")";
}

Verdict VerifyReport(const AttestReport& report, const ExpectedState& expected,
                     const Nonce& nonce, const AttestKey& key) {
  if (!ConstantTimeEqual(report.nonce, nonce)) {
    return Verdict::Reject(RejectReason::kNonceMismatch);
  }
  if (report.layout != expected.layout ||
      report.or_bytes.size() != expected.layout.out.size() ||
      expected.er_image.size() != expected.layout.er.size()) {
    return Verdict::Reject(RejectReason::kLayoutMismatch);
  }
  const Digest mac =
      ComputeReportMac(key, nonce, report.exec, expected.layout,
                       expected.er_image, report.or_bytes, expected.ivt_image);
  if (!ConstantTimeEqual(mac, report.mac)) {
    return Verdict::Reject(RejectReason::kMacMismatch);
  }
  if (!report.exec) return Verdict::Reject(RejectReason::kExecZero);
  return Verdict::Accept();
}

Challenge VerifierSession::Issue(uint64_t seed) {
  if (outstanding_) throw Error("a challenge is already outstanding");
  Challenge chal = NewChallenge(key_, seed);
  outstanding_ = chal.nonce;
  return chal;
}

Verdict VerifierSession::Verify(const AttestReport& report) {
  if (!outstanding_) return Verdict::Reject(RejectReason::kNonceMismatch);
  const Nonce nonce = *outstanding_;
  outstanding_.reset();
  return VerifyReport(report, expected_, nonce, key_);
}

Verdict VerifierSession::VerifySerialized(std::span<const uint8_t> octets) {
  AttestReport report;
  try {
    report = AttestReport::Parse(octets);
  } catch (const ProtocolError&) {
    outstanding_.reset();
    return Verdict::Reject(RejectReason::kMalformed);
  }
  return Verify(report);
}

}  // namespace poxsim
