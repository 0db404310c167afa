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

#include "poxsim/monitor.h"

#include "poxsim/errors.h"

namespace poxsim {

std::string_view ModeName(Mode mode) {
  return mode == Mode::kApex ? "apex" : "asap";
}

std::optional<Mode> ModeFromName(std::string_view name) {
  if (name == "apex" || name == "APEX") return Mode::kApex;
  if (name == "asap" || name == "ASAP") return Mode::kAsap;
  return std::nullopt;
}

std::string_view PhaseName(Phase phase) {
  switch (phase) {
    case Phase::kNotExec:
      return "NotExec";
    case Phase::kExecuting:
      return "Executing";
    case Phase::kPostExec:
      return "PostExec";
  }
  return "?";
}

std::optional<Phase> PhaseFromName(std::string_view name) {
  for (Phase p : {Phase::kNotExec, Phase::kExecuting, Phase::kPostExec}) {
    if (PhaseName(p) == name) return p;
  }
  return std::nullopt;
}

void MonitorConfig::Validate() const {
  if (er.min >= er.max) throw InvalidConfig("er_min must be below er_max");
  if (er.min % 4 != 0 || (er.max + 1) % 4 != 0) {
    throw InvalidConfig("ER must start and end on 4-octet boundaries");
  }
  if (out.min > out.max) throw InvalidConfig("or_min must not exceed or_max");
  if (er.Overlaps(kIvtRange)) throw InvalidConfig("ER overlaps the IVT");
  if (out.Overlaps(kIvtRange)) throw InvalidConfig("OR overlaps the IVT");
  if (er.Overlaps(out)) throw InvalidConfig("ER overlaps OR");
}

MonitorState MonitorStep(const MonitorState& state, const BusSignals* prev,
                         const BusSignals& cur, const MonitorConfig& cfg) {
  Phase phase = state.phase;
  bool violation = false;
  const bool cur_in_er = cfg.er.Contains(cur.pc);

  if (prev != nullptr) {
    const bool prev_in_er = cfg.er.Contains(prev->pc);
    // Entry only through er_min.
    if (!prev_in_er && cur_in_er && cur.pc != cfg.er.min) violation = true;
    // Exit only through the last instruction.
    if (prev_in_er && !cur_in_er) {
      if (prev->pc != cfg.er_exit()) {
        violation = true;
      } else if (phase == Phase::kExecuting) {
        phase = Phase::kPostExec;
      }
    }
  }

  if (cfg.mode == Mode::kApex && cur_in_er && cur.irq) violation = true;

  const bool cpu_write = cur.w_en;
  const uint32_t w_len = cur.w_len == 0 ? 1 : cur.w_len;
  auto written = [&](const AddressRange& r) {
    return (cpu_write && r.Overlaps(cur.d_addr, w_len)) ||
           (cur.dma_en && r.Contains(cur.dma_addr));
  };

  // IVT immutability, both modes.
  if (written(kIvtRange)) violation = true;
  // ER immutability from execution until attestation.
  if (phase != Phase::kNotExec && written(cfg.er)) violation = true;
  // Data and OR protection.
  if (phase == Phase::kExecuting) {
    if (cur.dma_en && (kDataRange.Contains(cur.dma_addr) ||
                       cfg.out.Contains(cur.dma_addr))) {
      violation = true;
    }
    if (cpu_write && cfg.out.Overlaps(cur.d_addr, w_len) && !cur_in_er) {
      violation = true;
    }
  } else if (phase == Phase::kPostExec && written(cfg.out)) {
    violation = true;
  }

  if (violation) return {Phase::kNotExec};
  if (cur.pc == cfg.er.min) return {Phase::kExecuting};
  return {phase};
}

const MonitorState& Monitor::Observe(const BusSignals& cur) {
  state_ = MonitorStep(state_, prev_ ? &*prev_ : nullptr, cur, cfg_);
  prev_ = cur;
  return state_;
}

}  // namespace poxsim
