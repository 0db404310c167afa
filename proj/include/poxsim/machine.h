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

// Instruction-level model of a small 16-bit MCU: 64 KiB flat address space,
// a 16-line vectored interrupt controller, a one-octet-per-cycle DMA engine,
// a countdown timer and two memory-mapped GPIO ports.

#ifndef POXSIM_MACHINE_H_
#define POXSIM_MACHINE_H_

#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "poxsim/isa.h"

namespace poxsim {

namespace memmap {

inline constexpr uint16_t kGpioIn = 0x0010;
inline constexpr uint16_t kGpioOut = 0x0014;
// Writing N > 0 here raises kTimerLine N cycles later.
inline constexpr uint16_t kTimerReload = 0x0018;
inline constexpr int kTimerLine = 4;

inline constexpr uint16_t kDataMin = 0x0200;
inline constexpr uint16_t kDataMax = 0x1FFF;
inline constexpr uint32_t kStackTop = 0x2000;

inline constexpr uint16_t kProgramMin = 0xE000;
inline constexpr uint16_t kProgramMax = 0xFFDF;

inline constexpr uint16_t kIvtMin = 0xFFE0;
inline constexpr uint16_t kIvtMax = 0xFFFF;
inline constexpr int kIvtEntries = 16;
inline constexpr int kIvtSize = 32;

inline constexpr uint32_t kAddressSpace = 0x10000;

}  // namespace memmap

struct MemoryImage {
  std::array<uint8_t, memmap::kAddressSpace> bytes{};

  uint16_t IvtEntry(int line) const;
  void SetIvtEntry(int line, uint16_t target);

  // Raw 65536-octet binary files.
  static MemoryImage LoadFile(const std::filesystem::path& path);
  void SaveFile(const std::filesystem::path& path) const;

  friend bool operator==(const MemoryImage&, const MemoryImage&) = default;
};

// What the machine did with one cycle.
enum class CycleKind : uint8_t {
  kInstruction,
  kDispatch,
  kDma,
  kIdle,
  kHost,
  kFault,
  kHalted,
};

// Per-cycle signal tuple observed by the hardware monitor.
struct BusSignals {
  uint64_t cycle = 0;
  uint16_t pc = 0;
  bool w_en = false;
  uint16_t d_addr = 0;
  // Octets written starting at d_addr: 1 for STORE/OUT, 2 for stack pushes.
  uint8_t w_len = 0;
  bool dma_en = false;
  uint16_t dma_addr = 0;
  bool irq = false;
  uint8_t irq_line = 0;

  CycleKind kind = CycleKind::kIdle;
  Opcode op = Opcode::kNop;  // valid iff kind == kInstruction

  friend bool operator==(const BusSignals&, const BusSignals&) = default;
};

// The `opcode` column of a trace: a mnemonic for executed instructions,
// otherwise one of <IRQ>, <DMA>, <IDLE>, <HOST>, <FAULT>, <HALTED>.
std::string OpcodeColumn(const BusSignals& s);

struct CpuState {
  uint16_t pc = 0;
  std::array<uint16_t, kRegisterCount> regs{};
  bool gie = false;
  bool zero = false;
  bool sleeping = false;
  bool halted = false;

  friend bool operator==(const CpuState&, const CpuState&) = default;
};

struct InterruptController {
  uint16_t pending = 0;

  friend bool operator==(const InterruptController&,
                         const InterruptController&) = default;
};

// Staged octets (host-injected transfers) drain first, then any
// memory-to-memory block transfer.
struct DmaController {
  uint16_t src = 0;
  uint16_t dst = 0;
  uint32_t remaining = 0;
  std::deque<std::pair<uint16_t, uint8_t>> staged;

  bool active() const { return remaining > 0 || !staged.empty(); }

  friend bool operator==(const DmaController&, const DmaController&) = default;
};

struct Fault {
  enum class Kind { kIllegalOpcode, kStackOverflow, kMisalignedFetch };
  Kind kind;
  uint16_t pc;
  std::array<uint8_t, 4> octets{};

  std::string Describe() const;
  friend bool operator==(const Fault&, const Fault&) = default;
};

class Machine {
 public:
  Machine() = default;
  Machine(const MemoryImage& image, uint16_t entry);

  // Advances exactly one cycle. Priority: interrupt dispatch, then DMA,
  // then sleep, then one instruction. A halted machine only counts cycles.
  BusSignals Step();

  // Idempotent per line; line must be < 16.
  void RaiseIrq(int line);

  // Host-side access. Throws OutOfRange if addr + len > 0x10000.
  std::vector<uint8_t> ReadMem(uint32_t addr, size_t len) const;
  // Setup write: no signals, no cycles.
  void WriteMem(uint32_t addr, std::span<const uint8_t> octets);
  // Mid-run write: one synthetic dma_en record (and cycle) per octet.
  std::vector<BusSignals> HostWrite(uint32_t addr,
                                    std::span<const uint8_t> octets);

  // Queues octets for the DMA engine, one per cycle starting next step.
  void InjectDma(uint16_t dst, std::span<const uint8_t> octets);
  void StartDmaCopy(uint16_t src, uint16_t dst, uint32_t length);

  const MemoryImage& memory() const { return memory_; }
  const CpuState& cpu() const { return cpu_; }
  CpuState& mutable_cpu() { return cpu_; }
  const InterruptController& interrupts() const { return irq_; }
  const DmaController& dma() const { return dma_; }
  uint16_t timer() const { return timer_; }
  uint64_t cycle() const { return cycle_; }
  const std::optional<Fault>& fault() const { return fault_; }
  bool halted() const { return cpu_.halted; }

  friend bool operator==(const Machine&, const Machine&) = default;

 private:
  void WriteOctet(uint16_t addr, uint8_t value);
  uint16_t Read16(uint16_t addr) const;
  // Returns false (and faults) on stack overflow.
  bool Push16(uint16_t value, BusSignals& s);
  uint16_t Pop16();
  void Execute(const Instruction& inst, BusSignals& s);
  void Halt(Fault fault);

  MemoryImage memory_;
  CpuState cpu_;
  InterruptController irq_;
  DmaController dma_;
  uint16_t timer_ = 0;
  uint64_t cycle_ = 0;
  std::optional<Fault> fault_;
};

}  // namespace poxsim

#endif  // POXSIM_MACHINE_H_
