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

// Declarative scenarios: program sections, layout hints, a schedule of
// external events, and when to attest. File syntax is a TOML subset:
//
//   mode = "asap"            # or "apex"
//   er_min = 0xE190
//   or_min = 0x0300
//   or_max = 0x0303
//   run_cycles = 400
//   attest_at = "end"        # or a cycle number
//   entry = "boot"           # label where the CPU starts; default er_min
//
//   [[section]]
//   name = "exec.body"       # exec.start|exec.body|exec.leave|untrusted|data
//   label = "isr"
//   irq_line = 3             # optional
//   addr = 0xE0D4            # optional, untrusted only
//   source = '''
//     ...assembly...
//   '''
//
//   [[event]]
//   cycle = 40
//   action = "raise_irq"     # or dma_write / host_write
//   line = 3                 # raise_irq
//   addr = 0xFFE0            # dma_write / host_write
//   data = [0x00, 0xE0]

#ifndef POXSIM_SCENARIO_H_
#define POXSIM_SCENARIO_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "poxsim/attestation.h"
#include "poxsim/imager.h"
#include "poxsim/machine.h"
#include "poxsim/monitor.h"
#include "poxsim/trace.h"

namespace poxsim {

struct ScenarioEvent {
  enum class Action : uint8_t { kRaiseIrq, kDmaWrite, kHostWrite };

  uint64_t cycle = 0;
  Action action = Action::kRaiseIrq;
  int line = 0;
  uint16_t addr = 0;
  std::vector<uint8_t> data;
  int source_line = 0;
};

struct Scenario {
  std::string name;
  Mode mode = Mode::kAsap;
  LinkHints hints;
  std::vector<Section> sections;
  std::vector<ScenarioEvent> events;
  uint64_t run_cycles = 1000;
  std::optional<uint64_t> attest_at;  // nullopt: attest at the end
  std::string entry;                  // empty: start at er_min

  // Throws ParseError with file line numbers.
  static Scenario Parse(std::string_view text, std::string name = "");
  static Scenario LoadFile(const std::filesystem::path& path);

  // Events sorted by cycle; attest_at not before the last event.
  void Validate() const;
};

// Linked image plus the monitor configuration derived from it.
struct BuiltScenario {
  LinkedImage linked;
  MonitorConfig cfg;
  uint16_t entry = 0;

  ExpectedState Expected() const {
    return ExpectedState::FromImage(linked.image, linked.manifest.layout());
  }
};

// Links and runs the static layout check; throws Error listing violations.
BuiltScenario BuildScenario(const Scenario& scenario);

struct Simulation {
  BuiltScenario built;
  Machine machine;
  MonitorState monitor;
  ExecutionTrace trace;
};

// Steps machine and monitor in lockstep until run_cycles, HALT or
// attest_at, applying events at their cycles.
Simulation Simulate(const Scenario& scenario);

// Steps machine and monitor in lockstep, applying each event just before
// the cycle it is scheduled for. Stops at max_cycles, stop_at or HALT.
void RunLockstep(Machine& m, Monitor& monitor,
                 std::span<const ScenarioEvent> events, uint64_t max_cycles,
                 std::optional<uint64_t> stop_at, ExecutionTrace& trace);

struct RunResult {
  Simulation sim;
  AttestReport report;
  Verdict verdict;
  std::optional<uint64_t> first_exec_fall;
};

// Simulates, measures at the attestation point with a challenge drawn from
// `seed`, and verifies against the built image.
RunResult RunScenario(const Scenario& scenario, uint64_t seed,
                      const AttestKey& key = AttestKey::Default());

std::optional<uint64_t> FirstExecFall(const ExecutionTrace& trace);

struct ModeOutcome {
  Mode mode;
  std::optional<uint64_t> first_exec_fall;
  Verdict verdict;
};

// Runs the scenario under APEX and under ASAP.
std::vector<ModeOutcome> Compare(const Scenario& scenario, uint64_t seed,
                                 const AttestKey& key = AttestKey::Default());

}  // namespace poxsim

#endif  // POXSIM_SCENARIO_H_
