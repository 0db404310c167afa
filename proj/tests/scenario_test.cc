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


#include "poxsim/scenario.h"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "poxsim/errors.h"
#include "poxsim/ltl.h"

namespace poxsim {
namespace {

const std::string kDir = POXSIM_SCENARIO_DIR;

Scenario Load(const std::string& name) { return Scenario::LoadFile(kDir + "/" + name + ".toml"); }

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int ParseErrorLine(std::string_view text) {
  try {
    Scenario::Parse(text).Validate();
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

constexpr std::string_view kMinimal = R"(name = "mini"
mode = "apex"
er_min = 0xE200
or_min = 0x0400
or_max = 0x040F
run_cycles = 50

[[section]]
name = "exec.start"
label = "s"
source = '''
  NOP
  JMP l
'''

[[section]]
name = "exec.leave"
label = "l"
source = '''
  HALT
'''

[[section]]
name = "data"
label = "tbl"
source = '''
  .byte 1, 2
'''

[[event]]
cycle = 3
action = "dma_write"
addr = 0x0500
data = [0x01, 0x02]

[[event]]
cycle = 4
action = "raise_irq"
line = 6
)";

TEST(ScenarioParseTest, Minimal) {
  const Scenario s = Scenario::Parse(kMinimal);
  EXPECT_EQ(s.name, "mini");
  EXPECT_EQ(s.mode, Mode::kApex);
  EXPECT_EQ(s.hints.er_min, 0xE200);
  EXPECT_EQ(s.hints.out, (AddressRange{0x0400, 0x040F}));
  EXPECT_EQ(s.run_cycles, 50u);
  EXPECT_FALSE(s.attest_at.has_value());
  ASSERT_EQ(s.sections.size(), 3u);
  EXPECT_EQ(s.sections[0].kind, SectionKind::kExecStart);
  EXPECT_EQ(s.sections[0].first_line, 12);
  EXPECT_EQ(s.sections[2].kind, SectionKind::kData);
  ASSERT_EQ(s.events.size(), 2u);
  EXPECT_EQ(s.events[0].action, ScenarioEvent::Action::kDmaWrite);
  EXPECT_EQ(s.events[0].data, (std::vector<uint8_t>{1, 2}));
  EXPECT_EQ(s.events[1].line, 6);
  const BuiltScenario b = BuildScenario(s);
  EXPECT_EQ(b.entry, 0xE200);
  EXPECT_EQ(b.cfg.er, (AddressRange{0xE200, 0xE20B}));
}

TEST(ScenarioParseTest, ErrorsPointAtLines) {
  std::string text(kMinimal);
  EXPECT_EQ(ParseErrorLine(text + "bogus = 1\n"), 40);
  EXPECT_EQ(ParseErrorLine(std::string(kMinimal).replace(text.find("\"apex\""), 6, "\"x\"")), 2);
  EXPECT_EQ(ParseErrorLine(text + "\n[[event]]\ncycle = 1\naction = \"raise_irq\"\nline = 1\n"), 41);
  EXPECT_EQ(ParseErrorLine(text + "\n[[event]]\ncycle = 9\naction = \"jump\"\n"), 43);
  EXPECT_EQ(ParseErrorLine(std::string(kMinimal).replace(text.find("run_cycles = 50"), 15,
                                                         "attest_at = 2")),
            36);
  EXPECT_EQ(ParseErrorLine("[[section]]\nname = \"exec.start\"\nsource = '''\nNOP\n"), 3);
}

TEST(ScenarioParseTest, AssemblyErrorsUseFileLines) {
  std::string text(kMinimal);
  text.replace(text.find("  NOP\n  JMP l"), 13, "  NOP\n  JMP nowhere_label\n  FROB");
  try {
    BuildScenario(Scenario::Parse(text));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 14"), std::string::npos) << e.what();
  }
}

TEST(ScenarioParseTest, LoadFileReportsPath) {
  EXPECT_THROW(Scenario::LoadFile(kDir + "/does_not_exist.toml"), Error);
}

struct Expectation {
  std::string name;
  Mode mode;
  bool accepted;
  std::optional<uint64_t> first_fall;
};

class BundledScenarioTest : public ::testing::TestWithParam<Expectation> {};

TEST_P(BundledScenarioTest, MatchesGoldenTraceAndVerdict) {
  const auto& want = GetParam();
  const Scenario s = Load(want.name);
  EXPECT_EQ(s.mode, want.mode);
  const RunResult r = RunScenario(s, 123);
  EXPECT_EQ(r.verdict.accepted(), want.accepted) << r.verdict.ToString();
  EXPECT_EQ(r.first_exec_fall, want.first_fall);
  if (!want.accepted) {
    EXPECT_EQ(r.verdict, Verdict::Reject(RejectReason::kExecZero));
  }
  EXPECT_EQ(TraceToCsv(r.sim.trace), ReadFile(kDir + "/golden/" + want.name + ".csv"));

  const auto t = ltl::Trace::FromExecution(r.sim.trace, r.sim.built.cfg);
  for (const auto& [name, f] : ltl::FormulasFor(s.mode)) {
    EXPECT_TRUE(ltl::CheckGlobally(f, t).holds()) << name;
  }
}

INSTANTIATE_TEST_SUITE_P(
    Fixtures, BundledScenarioTest,
    ::testing::Values(Expectation{"fig5a", Mode::kAsap, true, std::nullopt},
                      Expectation{"fig5b", Mode::kAsap, false, 45},
                      Expectation{"fig5c", Mode::kApex, false, 44},
                      Expectation{"clean", Mode::kAsap, true, std::nullopt},
                      Expectation{"pump", Mode::kAsap, true, std::nullopt},
                      Expectation{"pump_abort", Mode::kAsap, true, std::nullopt},
                      Expectation{"pump_abort_untrusted", Mode::kAsap, false, 11},
                      Expectation{"ivt_store", Mode::kAsap, false, 5},
                      Expectation{"ivt_dma", Mode::kAsap, false, 6},
                      Expectation{"ivt_post", Mode::kAsap, false, 14}),
    [](const auto& info) { return info.param.name; });

TEST(GoldenCsvTest, ReadWriteIsAFixpoint) {
  for (const char* name : {"fig5a", "fig5b", "fig5c", "pump", "ivt_dma"}) {
    const std::string csv = ReadFile(kDir + "/golden/" + std::string(name) + ".csv");
    std::istringstream in(csv);
    EXPECT_EQ(TraceToCsv(ReadTraceCsv(in)), csv) << name;
  }
}

TEST(GoldenCsvTest, MalformedCsvIsRejected) {
  std::istringstream bad_header("cycle,pc\n0,0x0000\n");
  EXPECT_THROW(ReadTraceCsv(bad_header), Error);
  std::istringstream bad_exec(std::string(kTraceCsvHeader) +
                              "\n0,0xE000,NOP,0,0x0000,0,0x0000,0,0,1,NotExec\n");
  EXPECT_THROW(ReadTraceCsv(bad_exec), Error);
}

TEST(InterruptFixtureTest, DispatchAddressesMatchFixtureLayout) {
  const auto a = Simulate(Load("fig5a")).trace;
  ASSERT_TRUE(a[44].signals.irq);
  EXPECT_EQ(a[44].signals.pc, 0xE1AC);
  EXPECT_EQ(a[45].signals.pc, 0xE1B0);
  const auto b = Simulate(Load("fig5b")).trace;
  EXPECT_EQ(b[45].signals.pc, 0xE0D4);
  EXPECT_TRUE(ExecBit(b[44].monitor));
  EXPECT_FALSE(ExecBit(b[45].monitor));
}

TEST(PumpTest, SleepsBetweenActuationStartAndStop) {
  const auto trace = Simulate(Load("pump")).trace;
  std::vector<size_t> outs;
  for (size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].signals.w_en && trace[i].signals.d_addr == memmap::kGpioOut) outs.push_back(i);
  }
  ASSERT_EQ(outs.size(), 2u);
  int idle = 0;
  for (size_t i = outs[0]; i < outs[1]; ++i) idle += trace[i].signals.kind == CycleKind::kIdle;
  EXPECT_GE(idle, 1);
  const auto sim = Simulate(Load("pump"));
  EXPECT_EQ(sim.machine.memory().bytes[memmap::kGpioOut], 0);
  EXPECT_EQ(sim.machine.memory().bytes[0x0301], 1);
  EXPECT_EQ(Simulate(Load("pump_abort")).machine.memory().bytes[0x0301], 2);
}

TEST(CompareTest, ModesDifferOnlyWhereInterruptsMatter) {
  auto outcome = [](const std::string& name) {
    const auto v = Compare(Load(name), 1);
    EXPECT_EQ(v[0].mode, Mode::kApex);
    EXPECT_EQ(v[1].mode, Mode::kAsap);
    return std::make_pair(v[0].verdict.accepted(), v[1].verdict.accepted());
  };
  EXPECT_EQ(outcome("fig5a"), std::make_pair(false, true));
  EXPECT_EQ(outcome("clean"), std::make_pair(true, true));
  EXPECT_EQ(outcome("ivt_store"), std::make_pair(false, false));
  EXPECT_EQ(outcome("ivt_dma"), std::make_pair(false, false));
  EXPECT_EQ(Compare(Load("fig5a"), 1)[0].first_exec_fall, 44u);
}

TEST(SimulateTest, StopsAtAttestAt) {
  Scenario s = Load("fig5a");
  s.attest_at = 20;
  EXPECT_EQ(Simulate(s).trace.size(), 20u);
}

// CLI exit codes and output.
struct CliResult {
  int status;
  std::string out;
};

CliResult RunCli(const std::string& args) {
  const std::string cmd = std::string(POXSIM_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  char buf[512];
  while (size_t n = fread(buf, 1, sizeof(buf), p)) out.append(buf, n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

TEST(CliTest, RunExitCodes) {
  EXPECT_EQ(RunCli("run " + kDir + "/fig5a.toml --seed 1").status, 0);
  EXPECT_EQ(RunCli("run " + kDir + "/fig5a.toml --seed 1 --mode apex").status, 1);
  EXPECT_EQ(RunCli("run " + kDir + "/fig5b.toml").status, 1);
  EXPECT_EQ(RunCli("run").status, 2);
  EXPECT_EQ(RunCli("frobnicate").status, 2);
  EXPECT_EQ(RunCli("run " + kDir + "/fig5a.toml --mode sideways").status, 2);
  EXPECT_EQ(RunCli("run /nonexistent.toml").status, 2);
}

TEST(CliTest, TraceAndCheck) {
  const std::string trace = ::testing::TempDir() + "/cli_fig5c.csv";
  const auto run = RunCli("run " + kDir + "/fig5c.toml --trace " + trace);
  EXPECT_EQ(run.status, 1);
  EXPECT_NE(run.out.find("first_exec_fall: 44"), std::string::npos) << run.out;
  EXPECT_EQ(ReadFile(trace), ReadFile(kDir + "/golden/fig5c.csv"));
  const auto check = RunCli("check --trace " + trace + " --scenario " + kDir + "/fig5c.toml");
  EXPECT_EQ(check.status, 0);
  EXPECT_EQ(check.out, "formula,result,index\nltl1,Holds,-\nltl2,Holds,-\nltl3,Holds,-\nltl4,Holds,-\n");
  // fig5a's trace under APEX formulas violates ltl3 at the trusted ISR entry.
  const auto apex = RunCli("check --trace " + kDir + "/golden/fig5a.csv --mode apex"
                           " --er-min 0xE100 --er-max 0xE1BF --or-min 0x0300 --or-max 0x031F");
  EXPECT_EQ(apex.status, 1);
  EXPECT_NE(apex.out.find("ltl3,ViolatedAt,44"), std::string::npos) << apex.out;
  EXPECT_EQ(RunCli("check --trace " + trace).status, 2);
}

TEST(CliTest, CompareAttestAndBuild) {
  const auto cmp = RunCli("compare " + kDir + "/fig5a.toml --seed 3");
  EXPECT_EQ(cmp.out, "mode,first_exec_fall,verdict\napex,44,Reject(ExecZero)\nasap,none,Accept\n");
  EXPECT_EQ(cmp.status, 1);
  const auto attest = RunCli("attest " + kDir + "/clean.toml --seed 3");
  EXPECT_EQ(attest.status, 0);
  EXPECT_NE(attest.out.find("exec: 1"), std::string::npos);
  const std::string image = ::testing::TempDir() + "/cli_image.bin";
  const auto build = RunCli("build " + kDir + "/fig5a.toml --image " + image);
  EXPECT_EQ(build.status, 0);
  EXPECT_NE(build.out.find("\"er_min\": \"0xE100\""), std::string::npos) << build.out;
  EXPECT_EQ(MemoryImage::LoadFile(image), BuildScenario(Load("fig5a")).linked.image);
}

}  // namespace
}  // namespace poxsim
