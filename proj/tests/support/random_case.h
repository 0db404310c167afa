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
// Random images, region bounds and event schedules for fuzz campaigns.

#ifndef POXSIM_TESTS_SUPPORT_RANDOM_CASE_H_
#define POXSIM_TESTS_SUPPORT_RANDOM_CASE_H_

#include <cstdint>
#include <random>
#include <vector>

#include "poxsim/machine.h"
#include "poxsim/monitor.h"
#include "poxsim/scenario.h"
#include "poxsim/trace.h"

namespace poxsim::testing {

struct CaseOptions {
  bool interrupts = true;  // irq events, EI and timer stores
  bool ivt_writes = true;  // stores and DMA aimed at the IVT
  int max_cycles = 256;
};

struct RandomCase {
  MemoryImage image;
  uint16_t entry = 0;
  MonitorConfig cfg;
  std::vector<ScenarioEvent> events;
  uint64_t cycles = 0;
};

RandomCase GenerateCase(std::mt19937_64& rng, const CaseOptions& opts = {});

// Runs the case under cfg with its mode replaced by `mode`.
ExecutionTrace RunCase(const RandomCase& c, Mode mode);

// True if some cycle raised an interrupt or wrote the IVT.
bool TouchesIrqOrIvt(const ExecutionTrace& trace);

}  // namespace poxsim::testing

#endif  // POXSIM_TESTS_SUPPORT_RANDOM_CASE_H_
