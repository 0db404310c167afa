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

#include <gtest/gtest.h>

#include <random>

#include "poxsim/crypto.h"
#include "poxsim/errors.h"
#include "poxsim/scenario.h"

namespace poxsim {
namespace {

Scenario Load(const std::string& name) {
  return Scenario::LoadFile(std::string(POXSIM_SCENARIO_DIR) + "/" + name + ".toml");
}

std::vector<uint8_t> Bytes(std::string_view s) { return {s.begin(), s.end()}; }

TEST(CryptoTest, HmacSha256KnownAnswer) {
  // RFC 4231 test case 2.
  const Digest mac = HmacSha256(Bytes("Jefe"), Bytes("what do ya want for nothing?"));
  EXPECT_EQ(ToHex(mac), "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
}

TEST(CryptoTest, HexRoundTripAndErrors) {
  const std::vector<uint8_t> v = {0x00, 0x7F, 0xAB, 0xFF};
  EXPECT_EQ(ToHex(v), "007fabff");
  EXPECT_EQ(FromHex("007FabfF"), v);
  EXPECT_THROW(FromHex("abc"), Error);
  EXPECT_THROW(FromHex("zz"), Error);
}

TEST(CryptoTest, ConstantTimeEqual) {
  const std::vector<uint8_t> a = {1, 2, 3}, b = {1, 2, 3}, c = {1, 2, 4}, d = {1, 2};
  EXPECT_TRUE(ConstantTimeEqual(a, b));
  EXPECT_FALSE(ConstantTimeEqual(a, c));
  EXPECT_FALSE(ConstantTimeEqual(a, d));
}

TEST(ChallengeTest, SeedsGiveDistinctReproducibleNonces) {
  const AttestKey key = AttestKey::Default();
  EXPECT_NE(NewChallenge(key, 1).nonce, NewChallenge(key, 2).nonce);
  EXPECT_EQ(NewChallenge(key, 9), NewChallenge(key, 9));
}

TEST(ChallengeTest, TokenVerifiesUnderSameKeyOnly) {
  const AttestKey key = AttestKey::Default();
  const Challenge chal = NewChallenge(key, 3);
  EXPECT_TRUE(ChallengeAuthentic(chal, key));
  std::vector<uint8_t> req = {'R', 'E', 'Q'};
  req.insert(req.end(), chal.nonce.begin(), chal.nonce.end());
  EXPECT_EQ(chal.auth_token, HmacSha256(key.bytes, req));
  AttestKey other = key;
  other.bytes[0] ^= 1;
  EXPECT_FALSE(ChallengeAuthentic(chal, other));
}

TEST(ChallengeTest, SerializeParse) {
  const Challenge chal = NewChallenge(AttestKey::Default(), 4);
  const auto octets = chal.Serialize();
  ASSERT_EQ(octets.size(), Challenge::kSerializedSize);
  EXPECT_EQ(Challenge::Parse(octets), chal);
  EXPECT_THROW(Challenge::Parse(std::span(octets).first(63)), ProtocolError);
}

TEST(AttestKeyTest, FromHex) {
  const std::string hex(64, 'a');
  EXPECT_EQ(AttestKey::FromHex(hex).bytes[5], 0xAA);
  EXPECT_THROW(AttestKey::FromHex("abcd"), Error);
}

class MeasureTest : public ::testing::Test {
 protected:
  void SetUp() override {
    scenario_ = Load("fig5a");
    sim_ = Simulate(scenario_);
  }
  Scenario scenario_;
  Simulation sim_;
  AttestKey key_ = AttestKey::Default();
};

TEST_F(MeasureTest, CleanReportVerifies) {
  const Challenge chal = NewChallenge(key_, 10);
  const AttestReport r = Measure(sim_.machine, sim_.monitor, chal, key_, sim_.built.cfg);
  EXPECT_TRUE(r.exec);
  EXPECT_EQ(r.nonce, chal.nonce);
  EXPECT_EQ(r.or_bytes, sim_.machine.ReadMem(0x0300, 32));
  EXPECT_EQ(r.or_bytes[0], 0x5A);
  EXPECT_EQ(VerifyReport(r, sim_.built.Expected(), chal.nonce, key_), Verdict::Accept());
}

TEST_F(MeasureTest, MacCoversDocumentedOctetLayout) {
  const Challenge chal = NewChallenge(key_, 11);
  const AttestReport r = Measure(sim_.machine, sim_.monitor, chal, key_, sim_.built.cfg);
  const auto& cfg = sim_.built.cfg;
  std::vector<uint8_t> msg(chal.nonce.begin(), chal.nonce.end());
  msg.push_back(1);
  for (uint16_t v : {cfg.er.min, cfg.er.max, cfg.out.min, cfg.out.max}) {
    msg.push_back(static_cast<uint8_t>(v >> 8));
    msg.push_back(static_cast<uint8_t>(v));
  }
  const auto er = sim_.machine.ReadMem(cfg.er.min, cfg.er.size());
  const auto out = sim_.machine.ReadMem(cfg.out.min, cfg.out.size());
  const auto ivt = sim_.machine.ReadMem(0xFFE0, 32);
  msg.insert(msg.end(), er.begin(), er.end());
  msg.insert(msg.end(), out.begin(), out.end());
  msg.insert(msg.end(), ivt.begin(), ivt.end());
  EXPECT_EQ(r.mac, HmacSha256(key_.bytes, msg));
}

TEST_F(MeasureTest, BadTokenIsRefused) {
  Challenge chal = NewChallenge(key_, 12);
  chal.auth_token[31] ^= 0x80;
  EXPECT_THROW(Measure(sim_.machine, sim_.monitor, chal, key_, sim_.built.cfg), BadRequestToken);
}

TEST_F(MeasureTest, MeasureLeavesMachineAndMonitorUntouched) {
  const Machine machine_before = sim_.machine;
  const MonitorState monitor_before = sim_.monitor;
  Measure(sim_.machine, sim_.monitor, NewChallenge(key_, 13), key_, sim_.built.cfg);
  EXPECT_EQ(sim_.machine, machine_before);
  EXPECT_EQ(sim_.monitor, monitor_before);
}

TEST_F(MeasureTest, ReportSerializationLayout) {
  const Challenge chal = NewChallenge(key_, 14);
  const AttestReport r = Measure(sim_.machine, sim_.monitor, chal, key_, sim_.built.cfg);
  const auto octets = r.Serialize();
  ASSERT_EQ(octets.size(), 32u + 1 + 8 + 2 + 32 + 32);
  EXPECT_TRUE(std::equal(chal.nonce.begin(), chal.nonce.end(), octets.begin()));
  EXPECT_EQ(octets[32], 1);
  EXPECT_EQ(octets[33], 0xE1);
  EXPECT_EQ(octets[34], 0x00);
  EXPECT_EQ(octets[35], 0xE1);
  EXPECT_EQ(octets[36], 0xBF);
  EXPECT_EQ(octets[37], 0x03);
  EXPECT_EQ(octets[38], 0x00);
  EXPECT_EQ(octets[41], 0x00);
  EXPECT_EQ(octets[42], 32);
  EXPECT_EQ(AttestReport::Parse(octets), r);
  EXPECT_THROW(AttestReport::Parse(std::span(octets).first(octets.size() - 1)), ProtocolError);
  auto bad_exec = octets;
  bad_exec[32] = 2;
  EXPECT_THROW(AttestReport::Parse(bad_exec), ProtocolError);
  auto bad_len = octets;
  bad_len[42] = 31;
  EXPECT_THROW(AttestReport::Parse(bad_len), ProtocolError);
}

TEST(VerifyTest, Fig5bReportCarriesExecZero) {
  const Simulation sim = Simulate(Load("fig5b"));
  const AttestKey key = AttestKey::Default();
  const Challenge chal = NewChallenge(key, 20);
  const AttestReport r = Measure(sim.machine, sim.monitor, chal, key, sim.built.cfg);
  EXPECT_FALSE(r.exec);
  EXPECT_EQ(r.Serialize()[32], 0x00);
  EXPECT_EQ(VerifyReport(r, sim.built.Expected(), chal.nonce, key),
            Verdict::Reject(RejectReason::kExecZero));
}

TEST(VerifyTest, ApexRunOfFig5aIsRejected) {
  Scenario s = Load("fig5a");
  s.mode = Mode::kApex;
  EXPECT_EQ(RunScenario(s, 1).verdict, Verdict::Reject(RejectReason::kExecZero));
  s.mode = Mode::kAsap;
  EXPECT_EQ(RunScenario(s, 1).verdict, Verdict::Accept());
}

TEST(VerifyTest, FlippedOrBitsAndReplayAreRejected) {
  const Simulation sim = Simulate(Load("fig5a"));
  const AttestKey key = AttestKey::Default();
  const ExpectedState expected = sim.built.Expected();
  const Challenge chal = NewChallenge(key, 21);
  const AttestReport r = Measure(sim.machine, sim.monitor, chal, key, sim.built.cfg);
  for (size_t i = 0; i < r.or_bytes.size() * 8; ++i) {
    AttestReport t = r;
    t.or_bytes[i / 8] ^= static_cast<uint8_t>(1 << (i % 8));
    ASSERT_EQ(VerifyReport(t, expected, chal.nonce, key), Verdict::Reject(RejectReason::kMacMismatch));
  }
  const Challenge fresh = NewChallenge(key, 22);
  EXPECT_EQ(VerifyReport(r, expected, fresh.nonce, key), Verdict::Reject(RejectReason::kNonceMismatch));
  AttestReport moved = r;
  moved.layout.out.max = 0x033F;
  moved.or_bytes.resize(64);
  EXPECT_EQ(VerifyReport(moved, expected, chal.nonce, key), Verdict::Reject(RejectReason::kLayoutMismatch));
}

TEST(VerifierSessionTest, OneOutstandingNonceConsumedByVerify) {
  const Simulation sim = Simulate(Load("clean"));
  const AttestKey key = AttestKey::Default();
  VerifierSession session(key, sim.built.Expected());
  const Challenge chal = session.Issue(30);
  EXPECT_THROW(session.Issue(31), Error);
  const AttestReport r = Measure(sim.machine, sim.monitor, chal, key, sim.built.cfg);
  EXPECT_EQ(session.Verify(r), Verdict::Accept());
  EXPECT_FALSE(session.has_outstanding());
  EXPECT_EQ(session.Verify(r), Verdict::Reject(RejectReason::kNonceMismatch));
  session.Issue(32);
  session.Abandon();
  EXPECT_EQ(session.VerifySerialized(r.Serialize()), Verdict::Reject(RejectReason::kNonceMismatch));
  const Challenge next = session.Issue(33);
  auto octets = Measure(sim.machine, sim.monitor, next, key, sim.built.cfg).Serialize();
  octets.pop_back();
  EXPECT_EQ(session.VerifySerialized(octets), Verdict::Reject(RejectReason::kMalformed));
}

TEST(VerifyTest, AcceptIffErAndIvtMatchAndExecSet) {
  const Simulation base = Simulate(Load("clean"));
  const AttestKey key = AttestKey::Default();
  const ExpectedState expected = base.built.Expected();
  const MonitorConfig& cfg = base.built.cfg;
  std::mt19937_64 rng(99);
  for (int i = 0; i < 2000; ++i) {
    Machine m = base.machine;
    MonitorState mon = base.monitor;
    if (rng() % 5 == 0) mon.phase = Phase::kNotExec;
    const int mutations = static_cast<int>(rng() % 3);
    for (int k = 0; k < mutations; ++k) {
      uint16_t addr = 0;
      switch (rng() % 4) {
        case 0: addr = static_cast<uint16_t>(cfg.er.min + rng() % cfg.er.size()); break;
        case 1: addr = static_cast<uint16_t>(0xFFE0 + rng() % 32); break;
        case 2: addr = static_cast<uint16_t>(cfg.out.min + rng() % cfg.out.size()); break;
        default: addr = static_cast<uint16_t>(0x0200 + rng() % 0x100); break;
      }
      const uint8_t v = static_cast<uint8_t>(rng());
      m.WriteMem(addr, std::span(&v, 1));
    }
    const Challenge chal = NewChallenge(key, rng());
    const AttestReport r = Measure(m, mon, chal, key, cfg);
    const bool er_ok = m.ReadMem(cfg.er.min, cfg.er.size()) == expected.er_image;
    const auto ivt = m.ReadMem(0xFFE0, 32);
    const bool ivt_ok = std::equal(ivt.begin(), ivt.end(), expected.ivt_image.begin());
    const bool should_accept = er_ok && ivt_ok && ExecBit(mon);
    ASSERT_EQ(VerifyReport(r, expected, chal.nonce, key).accepted(), should_accept) << i;
  }
}

TEST(VerdictTest, ToString) {
  EXPECT_EQ(Verdict::Accept().ToString(), "Accept");
  EXPECT_EQ(Verdict::Reject(RejectReason::kExecZero).ToString(), "Reject(ExecZero)");
}

}  // namespace
}  // namespace poxsim
