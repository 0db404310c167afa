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

// Prover-side measurement and verifier-side checking of proof-of-execution
// reports.
//
// The report MAC is HMAC-SHA-256 over
//
//   nonce(32) || exec(1) || er_min || er_max || or_min || or_max
//             || ER octets || OR octets || IVT octets(32)
//
// with every address encoded as 16-bit big-endian. The key never enters the
// simulated address space.

#ifndef POXSIM_ATTESTATION_H_
#define POXSIM_ATTESTATION_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "poxsim/crypto.h"
#include "poxsim/machine.h"
#include "poxsim/monitor.h"

namespace poxsim {

struct AttestKey {
  std::array<uint8_t, 32> bytes{};

  // Throws Error unless `hex` is exactly 64 hex digits.
  static AttestKey FromHex(const std::string& hex);
  // Fixed key used by bundled scenarios and tests.
  static AttestKey Default();
};

using Nonce = std::array<uint8_t, 32>;

struct Challenge {
  Nonce nonce{};
  Digest auth_token{};  // HMAC(key, "REQ" || nonce)

  static constexpr size_t kSerializedSize = 64;
  std::vector<uint8_t> Serialize() const;
  // Throws ProtocolError(kMalformed) on a size mismatch.
  static Challenge Parse(std::span<const uint8_t> octets);

  friend bool operator==(const Challenge&, const Challenge&) = default;
};

Challenge MakeChallenge(const AttestKey& key, const Nonce& nonce);
// Draws the nonce from a generator seeded with `seed`.
Challenge NewChallenge(const AttestKey& key, uint64_t seed);
bool ChallengeAuthentic(const Challenge& chal, const AttestKey& key);

struct AttestReport {
  Nonce nonce{};
  bool exec = false;
  RegionLayout layout;
  std::vector<uint8_t> or_bytes;
  Digest mac{};

  // nonce(32) || exec(1) || er_min(2) || er_max(2) || or_min(2) || or_max(2)
  //   || or_len(2) || or_bytes || mac(32), integers big-endian.
  std::vector<uint8_t> Serialize() const;
  // Throws ProtocolError(kMalformed) on any structural inconsistency.
  static AttestReport Parse(std::span<const uint8_t> octets);

  friend bool operator==(const AttestReport&, const AttestReport&) = default;
};

struct ExpectedState {
  RegionLayout layout;
  std::vector<uint8_t> er_image;
  std::array<uint8_t, memmap::kIvtSize> ivt_image{};

  static ExpectedState FromImage(const MemoryImage& image,
                                 const RegionLayout& layout);
};

Digest ComputeReportMac(const AttestKey& key, const Nonce& nonce, bool exec,
                        const RegionLayout& layout,
                        std::span<const uint8_t> er_bytes,
                        std::span<const uint8_t> or_bytes,
                        std::span<const uint8_t> ivt_bytes);

// Prover side. Reads live memory and the EXEC bit; mutates nothing.
// Throws BadRequestToken if the challenge is not authentic.
AttestReport Measure(const Machine& machine, const MonitorState& monitor,
                     const Challenge& chal, const AttestKey& key,
                     const MonitorConfig& cfg);

enum class RejectReason : uint8_t {
  kNonceMismatch,
  kMacMismatch,
  kExecZero,
  kLayoutMismatch,
  kMalformed,
  kProverError,
  kTransport,
  kTimeout,
};

std::string_view RejectReasonName(RejectReason reason);

struct Verdict {
  std::optional<RejectReason> reject;

  static Verdict Accept() { return {}; }
  static Verdict Reject(RejectReason reason) { return {reason}; }
  bool accepted() const { return !reject.has_value(); }
  // "Accept" or "Reject(<Reason>)".
  std::string ToString() const;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

// Checks, in order: nonce, layout, MAC (constant time), EXEC.
Verdict VerifyReport(const AttestReport& report, const ExpectedState& expected,
                     const Nonce& nonce, const AttestKey& key);

// Verifier session holding at most one outstanding nonce. The nonce is
// consumed by the first Verify call. Not thread-safe.
class VerifierSession {
 public:
  VerifierSession(AttestKey key, ExpectedState expected)
      : key_(key), expected_(std::move(expected)) {}

  // Throws Error if a challenge is already outstanding.
  Challenge Issue(uint64_t seed);
  void Abandon() { outstanding_.reset(); }
  bool has_outstanding() const { return outstanding_.has_value(); }

  Verdict Verify(const AttestReport& report);
  Verdict VerifySerialized(std::span<const uint8_t> octets);

 private:
  AttestKey key_;
  ExpectedState expected_;
  std::optional<Nonce> outstanding_;
};

}  // namespace poxsim

#endif  // POXSIM_ATTESTATION_H_
