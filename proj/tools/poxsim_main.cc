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

// poxsim: build images, run scenarios, attest locally or over TCP, check
// traces against the LTL formulas, and compare APEX with ASAP.
//
// Exit codes: 0 Accept/Holds, 1 Reject/Violated, 2 usage or input error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "poxsim/attestation.h"
#include "poxsim/errors.h"
#include "poxsim/ltl.h"
#include "poxsim/protocol.h"
#include "poxsim/scenario.h"
#include "poxsim/trace.h"
#include "poxsim/transport.h"

namespace {

using namespace poxsim;

constexpr int kExitOk = 0;
constexpr int kExitRejected = 1;
constexpr int kExitUsage = 2;

struct CommonOptions {
  std::string scenario_path;
  std::string mode;
  std::string trace_path;
  std::string key_hex;
  std::optional<uint64_t> seed;
};

void AddMode(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--mode", opts.mode, "Monitor rules to apply")
      ->check(CLI::IsMember({"apex", "asap"}));
}

void AddSeed(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--seed", opts.seed, "Seed for challenge nonces");
}

void AddKey(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--key", opts.key_hex, "Attestation key, 64 hex digits");
}

Scenario LoadScenario(const CommonOptions& opts) {
  Scenario s = Scenario::LoadFile(opts.scenario_path);
  if (!opts.mode.empty()) s.mode = *ModeFromName(opts.mode);
  return s;
}

AttestKey KeyOf(const CommonOptions& opts) {
  return opts.key_hex.empty() ? AttestKey::Default()
                              : AttestKey::FromHex(opts.key_hex);
}

uint64_t SeedOf(const CommonOptions& opts) {
  if (opts.seed) return *opts.seed;
  std::random_device rd;
  return (static_cast<uint64_t>(rd()) << 32) | rd();
}

std::string FallText(const std::optional<uint64_t>& cycle) {
  return cycle ? std::to_string(*cycle) : "none";
}

void WriteTrace(const std::string& path, const ExecutionTrace& trace) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary);
  WriteTraceCsv(out, trace);
  if (!out) throw Error("cannot write trace " + path);
}

int CmdBuild(const CommonOptions& opts, const std::string& image_path,
             const std::string& manifest_path) {
  const BuiltScenario built = BuildScenario(LoadScenario(opts));
  if (!image_path.empty()) built.linked.image.SaveFile(image_path);
  const std::string json = built.linked.manifest.ToJson();
  if (manifest_path.empty()) {
    std::cout << json << "\n";
  } else {
    std::ofstream(manifest_path) << json << "\n";
  }
  return kExitOk;
}

int CmdRun(const CommonOptions& opts) {
  const Scenario s = LoadScenario(opts);
  const RunResult r = RunScenario(s, SeedOf(opts), KeyOf(opts));
  WriteTrace(opts.trace_path, r.sim.trace);
  std::cout << "scenario: " << s.name << "\n"
            << "mode: " << ModeName(s.mode) << "\n"
            << "cycles: " << r.sim.trace.size() << "\n"
            << "exec: " << (ExecBit(r.sim.monitor) ? 1 : 0) << "\n"
            << "first_exec_fall: " << FallText(r.first_exec_fall) << "\n";
  if (r.sim.machine.fault()) {
    std::cout << "fault: " << r.sim.machine.fault()->Describe() << "\n";
  }
  std::cout << "verdict: " << r.verdict.ToString() << "\n";
  return r.verdict.accepted() ? kExitOk : kExitRejected;
}

int CmdAttest(const CommonOptions& opts, const std::string& report_path) {
  const Scenario s = LoadScenario(opts);
  const RunResult r = RunScenario(s, SeedOf(opts), KeyOf(opts));
  WriteTrace(opts.trace_path, r.sim.trace);
  const auto bytes = r.report.Serialize();
  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }
  char bounds[64];
  std::snprintf(bounds, sizeof(bounds), "er=[0x%04X,0x%04X] or=[0x%04X,0x%04X]",
                r.report.layout.er.min, r.report.layout.er.max,
                r.report.layout.out.min, r.report.layout.out.max);
  std::cout << "nonce: " << ToHex(r.report.nonce) << "\n"
            << "exec: " << (r.report.exec ? 1 : 0) << "\n"
            << "layout: " << bounds << "\n"
            << "or_bytes: " << ToHex(r.report.or_bytes) << "\n"
            << "mac: " << ToHex(r.report.mac) << "\n"
            << "report: " << ToHex(bytes) << "\n"
            << "verdict: " << r.verdict.ToString() << "\n";
  return r.verdict.accepted() ? kExitOk : kExitRejected;
}

int CmdServe(const CommonOptions& opts, const std::string& listen, bool once) {
  const Scenario s = LoadScenario(opts);
  const Simulation sim = Simulate(s);
  const AttestKey key = KeyOf(opts);
  TcpListener listener(Endpoint::Parse(listen));
  std::cout << "listening on port " << listener.port() << std::endl;
  do {
    auto conn = listener.Accept();
    const SessionLog log =
        ServeProver(*conn, sim.machine, sim.monitor, sim.built.cfg, key);
    for (const auto& e : log.events) std::cerr << "session: " << e << "\n";
  } while (!once);
  return kExitOk;
}

int CmdVerify(const CommonOptions& opts, const std::string& connect,
              int timeout_ms) {
  const Scenario s = LoadScenario(opts);
  const BuiltScenario built = BuildScenario(s);
  Verdict verdict;
  try {
    auto conn = TcpConnect(Endpoint::Parse(connect));
    verdict = RunVerifier(*conn, built.Expected(), KeyOf(opts), SeedOf(opts),
                          std::chrono::milliseconds(timeout_ms));
  } catch (const TransportError&) {
    verdict = Verdict::Reject(RejectReason::kTransport);
  }
  std::cout << "verdict: " << verdict.ToString() << "\n";
  return verdict.accepted() ? kExitOk : kExitRejected;
}

int CmdCheck(const CommonOptions& opts, std::optional<int> er_min,
             std::optional<int> er_max, std::optional<int> or_min,
             std::optional<int> or_max) {
  MonitorConfig cfg;
  if (!opts.scenario_path.empty()) {
    const Scenario s = LoadScenario(opts);
    cfg = BuildScenario(s).cfg;
  } else if (er_min && er_max && or_min && or_max) {
    cfg.er = {static_cast<uint16_t>(*er_min), static_cast<uint16_t>(*er_max)};
    cfg.out = {static_cast<uint16_t>(*or_min), static_cast<uint16_t>(*or_max)};
    cfg.Validate();
  } else {
    throw CLI::ValidationError("check needs --scenario or all four bounds");
  }
  if (!opts.mode.empty()) cfg.mode = *ModeFromName(opts.mode);

  std::ifstream in(opts.trace_path);
  if (!in) throw Error("cannot open trace " + opts.trace_path);
  const ExecutionTrace records = ReadTraceCsv(in);
  const ltl::Trace trace = ltl::Trace::FromExecution(records, cfg);
  bool all_hold = true;
  std::cout << "formula,result,index\n";
  for (const auto& [name, formula] : ltl::FormulasFor(cfg.mode)) {
    const auto result = ltl::CheckGlobally(formula, trace);
    if (result.holds()) {
      std::cout << name << ",Holds,-\n";
    } else {
      all_hold = false;
      std::cout << name << ",ViolatedAt," << *result.violated_at << "\n";
    }
  }
  return all_hold ? kExitOk : kExitRejected;
}

int CmdCompare(const CommonOptions& opts) {
  const Scenario s = LoadScenario(opts);
  const auto outcomes = Compare(s, SeedOf(opts), KeyOf(opts));
  std::cout << "mode,first_exec_fall,verdict\n";
  bool all_accept = true;
  for (const auto& o : outcomes) {
    std::cout << ModeName(o.mode) << "," << FallText(o.first_exec_fall) << ","
              << o.verdict.ToString() << "\n";
    all_accept = all_accept && o.verdict.accepted();
  }
  return all_accept ? kExitOk : kExitRejected;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proof-of-execution MCU simulator and attestation toolchain"};
  app.require_subcommand(1);
  CommonOptions opts;

  auto* build = app.add_subcommand("build", "Assemble and link a scenario image");
  std::string image_path, manifest_path;
  build->add_option("scenario", opts.scenario_path)->required();
  build->add_option("--image", image_path, "Write the 64 KiB memory image here");
  build->add_option("--manifest", manifest_path, "Write the layout manifest (JSON)");

  auto* run = app.add_subcommand("run", "Run a scenario and verify its attestation");
  run->add_option("scenario", opts.scenario_path)->required();
  run->add_option("--trace", opts.trace_path, "Write the trace CSV here");
  AddMode(run, opts);
  AddSeed(run, opts);
  AddKey(run, opts);

  auto* attest = app.add_subcommand("attest", "Run a scenario and print its report");
  std::string report_path;
  attest->add_option("scenario", opts.scenario_path)->required();
  attest->add_option("--report", report_path, "Write the serialized report here");
  attest->add_option("--trace", opts.trace_path, "Write the trace CSV here");
  AddMode(attest, opts);
  AddSeed(attest, opts);
  AddKey(attest, opts);

  auto* serve = app.add_subcommand("serve", "Run a scenario, then answer attestation requests");
  std::string listen;
  bool once = false;
  serve->add_option("scenario", opts.scenario_path)->required();
  serve->add_option("--listen", listen, "host:port (port 0 picks one)")->required();
  serve->add_flag("--once", once, "Exit after one session");
  AddMode(serve, opts);
  AddKey(serve, opts);

  auto* verify = app.add_subcommand("verify", "Attest a remote prover");
  std::string connect;
  int timeout_ms = 5000;
  verify->add_option("scenario", opts.scenario_path, "Scenario describing the expected image")
      ->required();
  verify->add_option("--connect", connect, "host:port")->required();
  verify->add_option("--timeout-ms", timeout_ms, "Response timeout");
  AddMode(verify, opts);
  AddSeed(verify, opts);
  AddKey(verify, opts);

  auto* check = app.add_subcommand("check", "Check a trace CSV against the LTL formulas");
  std::optional<int> er_min, er_max, or_min, or_max;
  check->add_option("--trace", opts.trace_path, "Trace CSV")->required();
  check->add_option("--scenario", opts.scenario_path, "Take bounds from a scenario");
  check->add_option("--er-min", er_min);
  check->add_option("--er-max", er_max);
  check->add_option("--or-min", or_min);
  check->add_option("--or-max", or_max);
  AddMode(check, opts);

  auto* compare = app.add_subcommand("compare", "Run a scenario under APEX and ASAP");
  compare->add_option("scenario", opts.scenario_path)->required();
  AddSeed(compare, opts);
  AddKey(compare, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*build) return CmdBuild(opts, image_path, manifest_path);
    if (*run) return CmdRun(opts);
    if (*attest) return CmdAttest(opts, report_path);
    if (*serve) return CmdServe(opts, listen, once);
    if (*verify) return CmdVerify(opts, connect, timeout_ms);
    if (*check) return CmdCheck(opts, er_min, er_max, or_min, or_max);
    if (*compare) return CmdCompare(opts);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
