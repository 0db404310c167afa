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

// Cycle-synchronous model of the proof-of-execution hardware monitor. It
// observes BusSignals and maintains the EXEC flag. Nothing in the simulated
// address space maps to it.

#ifndef POXSIM_MONITOR_H_
#define POXSIM_MONITOR_H_

#include <cstdint>
#include <optional>
#include <string_view>

#include "poxsim/machine.h"

namespace poxsim {

enum class Mode : uint8_t { kApex, kAsap };

std::string_view ModeName(Mode mode);
std::optional<Mode> ModeFromName(std::string_view name);

struct AddressRange {
  uint16_t min = 0;
  uint16_t max = 0;

  bool Contains(uint32_t addr) const { return addr >= min && addr <= max; }
  // True if [first, first + len) intersects this range.
  bool Overlaps(uint32_t first, uint32_t len) const {
    return len > 0 && first <= max && first + len - 1 >= min;
  }
  bool Overlaps(const AddressRange& other) const {
    return min <= other.max && other.min <= max;
  }
  uint32_t size() const { return static_cast<uint32_t>(max) - min + 1; }

  friend bool operator==(const AddressRange&, const AddressRange&) = default;
};

inline constexpr AddressRange kIvtRange{memmap::kIvtMin, memmap::kIvtMax};
inline constexpr AddressRange kDataRange{memmap::kDataMin, memmap::kDataMax};

// ER and OR bounds, as attested and as produced by the linker.
struct RegionLayout {
  AddressRange er;
  AddressRange out;

  friend bool operator==(const RegionLayout&, const RegionLayout&) = default;
};

struct MonitorConfig {
  Mode mode = Mode::kAsap;
  AddressRange er;
  AddressRange out;  // OR

  // Address of the final instruction slot of ER; "PC = ER_MAX" compares
  // against this because instructions are four octets wide.
  RegionLayout layout() const { return {er, out}; }

  uint16_t er_exit() const { return static_cast<uint16_t>(er.max - 3); }

  // Throws InvalidConfig unless er is 4-aligned at both ends, or is
  // non-empty, and ER, OR and the IVT are pairwise disjoint.
  void Validate() const;

  friend bool operator==(const MonitorConfig&, const MonitorConfig&) = default;
};

enum class Phase : uint8_t { kNotExec, kExecuting, kPostExec };

std::string_view PhaseName(Phase phase);
std::optional<Phase> PhaseFromName(std::string_view name);

struct MonitorState {
  Phase phase = Phase::kNotExec;

  friend bool operator==(const MonitorState&, const MonitorState&) = default;
};

// Reads EXEC: 1 iff phase != NotExec.
inline bool ExecBit(const MonitorState& state) {
  return state.phase != Phase::kNotExec;
}

// Judges one cycle. `prev` is the preceding cycle's record (nullptr at
// cycle 0). Pure and total.
MonitorState MonitorStep(const MonitorState& state, const BusSignals* prev,
                         const BusSignals& cur, const MonitorConfig& cfg);

// Convenience wrapper that remembers the previous record.
class Monitor {
 public:
  explicit Monitor(MonitorConfig cfg) : cfg_(cfg) { cfg_.Validate(); }

  const MonitorState& Observe(const BusSignals& cur);
  void Reset() {
    state_ = {};
    prev_.reset();
  }

  const MonitorState& state() const { return state_; }
  const MonitorConfig& config() const { return cfg_; }
  bool exec() const { return ExecBit(state_); }

 private:
  MonitorConfig cfg_;
  MonitorState state_;
  std::optional<BusSignals> prev_;
};

}  // namespace poxsim

#endif  // POXSIM_MONITOR_H_
