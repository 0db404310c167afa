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

#include "poxsim/machine.h"

#include <bit>
#include <cstdio>
#include <fstream>

#include "poxsim/errors.h"

namespace poxsim {

using namespace memmap;

uint16_t MemoryImage::IvtEntry(int line) const {
  const size_t at = kIvtMin + 2 * line;
  return static_cast<uint16_t>(bytes[at] | bytes[at + 1] << 8);
}

void MemoryImage::SetIvtEntry(int line, uint16_t target) {
  const size_t at = kIvtMin + 2 * line;
  bytes[at] = target & 0xFF;
  bytes[at + 1] = target >> 8;
}

MemoryImage MemoryImage::LoadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open image " + path.string());
  MemoryImage image;
  in.read(reinterpret_cast<char*>(image.bytes.data()), image.bytes.size());
  if (in.gcount() != static_cast<std::streamsize>(image.bytes.size()) ||
      in.peek() != std::char_traits<char>::eof()) {
    throw Error("image " + path.string() + " is not exactly 65536 octets");
  }
  return image;
}

void MemoryImage::SaveFile(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  if (!out) throw Error("cannot write image " + path.string());
}

std::string OpcodeColumn(const BusSignals& s) {
  switch (s.kind) {
    case CycleKind::kInstruction:
      return std::string(Mnemonic(s.op));
    case CycleKind::kDispatch:
      return "<IRQ>";
    case CycleKind::kDma:
      return "<DMA>";
    case CycleKind::kIdle:
      return "<IDLE>";
    case CycleKind::kHost:
      return "<HOST>";
    case CycleKind::kFault:
      return "<FAULT>";
    case CycleKind::kHalted:
      return "<HALTED>";
  }
  return "?";
}

std::string Fault::Describe() const {
  char buf[96];
  switch (kind) {
    case Kind::kIllegalOpcode:
      return IllegalOpcode(pc, octets).what();
    case Kind::kStackOverflow:
      std::snprintf(buf, sizeof(buf), "stack overflow at 0x%04X", pc);
      return buf;
    case Kind::kMisalignedFetch:
      std::snprintf(buf, sizeof(buf), "misaligned fetch at 0x%04X", pc);
      return buf;
  }
  return "fault";
}

Machine::Machine(const MemoryImage& image, uint16_t entry) : memory_(image) {
  cpu_.pc = entry;
  cpu_.regs[kStackPointer] = static_cast<uint16_t>(kStackTop);
}

void Machine::RaiseIrq(int line) {
  if (line < 0 || line >= kIvtEntries) {
    throw OutOfRange("irq line " + std::to_string(line) + " out of range");
  }
  irq_.pending |= static_cast<uint16_t>(1u << line);
}

std::vector<uint8_t> Machine::ReadMem(uint32_t addr, size_t len) const {
  if (addr + len > kAddressSpace) throw OutOfRange("read past 0xFFFF");
  return {memory_.bytes.begin() + addr, memory_.bytes.begin() + addr + len};
}

void Machine::WriteMem(uint32_t addr, std::span<const uint8_t> octets) {
  if (addr + octets.size() > kAddressSpace) {
    throw OutOfRange("write past 0xFFFF");
  }
  for (size_t i = 0; i < octets.size(); ++i) {
    memory_.bytes[addr + i] = octets[i];
  }
}

std::vector<BusSignals> Machine::HostWrite(uint32_t addr,
                                           std::span<const uint8_t> octets) {
  if (addr + octets.size() > kAddressSpace) {
    throw OutOfRange("write past 0xFFFF");
  }
  std::vector<BusSignals> records;
  records.reserve(octets.size());
  for (size_t i = 0; i < octets.size(); ++i) {
    const auto at = static_cast<uint16_t>(addr + i);
    WriteOctet(at, octets[i]);
    BusSignals s;
    s.cycle = cycle_++;
    s.pc = cpu_.pc;
    s.dma_en = true;
    s.dma_addr = at;
    s.kind = CycleKind::kHost;
    records.push_back(s);
  }
  return records;
}

void Machine::InjectDma(uint16_t dst, std::span<const uint8_t> octets) {
  for (size_t i = 0; i < octets.size(); ++i) {
    dma_.staged.emplace_back(static_cast<uint16_t>(dst + i), octets[i]);
  }
}

void Machine::StartDmaCopy(uint16_t src, uint16_t dst, uint32_t length) {
  dma_.src = src;
  dma_.dst = dst;
  dma_.remaining = length;
}

void Machine::WriteOctet(uint16_t addr, uint8_t value) {
  memory_.bytes[addr] = value;
  if (addr == kTimerReload) timer_ = value;
}

uint16_t Machine::Read16(uint16_t addr) const {
  return static_cast<uint16_t>(memory_.bytes[addr] |
                               memory_.bytes[static_cast<uint16_t>(addr + 1)]
                                   << 8);
}

bool Machine::Push16(uint16_t value, BusSignals& s) {
  const int sp = (cpu_.regs[kStackPointer] & ~1) - 2;
  if (sp < kDataMin) {
    Halt({Fault::Kind::kStackOverflow, cpu_.pc});
    s.kind = CycleKind::kFault;
    s.irq = false;
    return false;
  }
  const auto at = static_cast<uint16_t>(sp);
  WriteOctet(at, value & 0xFF);
  WriteOctet(at + 1, value >> 8);
  cpu_.regs[kStackPointer] = at;
  s.w_en = true;
  s.d_addr = at;
  s.w_len = 2;
  return true;
}

uint16_t Machine::Pop16() {
  const auto sp = static_cast<uint16_t>(cpu_.regs[kStackPointer] & ~1);
  const uint16_t value = Read16(sp);
  cpu_.regs[kStackPointer] = static_cast<uint16_t>(sp + 2);
  return value;
}

void Machine::Halt(Fault fault) {
  fault_ = fault;
  cpu_.halted = true;
}

BusSignals Machine::Step() {
  BusSignals s;
  s.cycle = cycle_++;
  s.pc = cpu_.pc;
  if (cpu_.halted) {
    s.kind = CycleKind::kHalted;
    return s;
  }

  if (timer_ > 0 && --timer_ == 0) {
    irq_.pending |= 1u << kTimerLine;
  }

  if (cpu_.gie && irq_.pending != 0) {
    const int line = std::countr_zero(irq_.pending);
    s.kind = CycleKind::kDispatch;
    s.irq = true;
    s.irq_line = static_cast<uint8_t>(line);
    if (!Push16(cpu_.pc, s)) return s;
    cpu_.gie = false;
    cpu_.sleeping = false;
    irq_.pending &= static_cast<uint16_t>(~(1u << line));
    cpu_.pc = memory_.IvtEntry(line);
    return s;
  }

  if (dma_.active()) {
    s.kind = CycleKind::kDma;
    s.dma_en = true;
    if (!dma_.staged.empty()) {
      auto [at, value] = dma_.staged.front();
      dma_.staged.pop_front();
      s.dma_addr = at;
      WriteOctet(at, value);
    } else {
      s.dma_addr = dma_.dst;
      WriteOctet(dma_.dst, memory_.bytes[dma_.src]);
      ++dma_.src;
      ++dma_.dst;
      --dma_.remaining;
    }
    return s;
  }

  if (cpu_.sleeping) {
    s.kind = CycleKind::kIdle;
    return s;
  }

  const uint16_t pc = cpu_.pc;
  if (pc % kInstructionSize != 0) {
    Halt({Fault::Kind::kMisalignedFetch, pc});
    s.kind = CycleKind::kFault;
    return s;
  }
  const std::span<const uint8_t, kInstructionSize> word(
      memory_.bytes.data() + pc, kInstructionSize);
  const auto inst = TryDecode(word);
  if (!inst) {
    Halt({Fault::Kind::kIllegalOpcode, pc, {word[0], word[1], word[2], word[3]}});
    s.kind = CycleKind::kFault;
    return s;
  }
  s.kind = CycleKind::kInstruction;
  s.op = inst->op;
  Execute(*inst, s);
  return s;
}

void Machine::Execute(const Instruction& inst, BusSignals& s) {
  auto& r = cpu_.regs;
  const auto operand = static_cast<uint16_t>(
      (inst.rb == kNoReg ? 0 : r[inst.rb]) + inst.imm);
  const auto next = static_cast<uint16_t>(cpu_.pc + kInstructionSize);
  uint16_t& dst = r[inst.ra];
  cpu_.pc = next;

  switch (inst.op) {
    case Opcode::kNop:
      break;
    case Opcode::kLoadi:
      dst = inst.imm;
      break;
    case Opcode::kLoad:
      dst = memory_.bytes[operand];
      break;
    case Opcode::kStore:
      WriteOctet(operand, dst & 0xFF);
      s.w_en = true;
      s.d_addr = operand;
      s.w_len = 1;
      break;
    case Opcode::kMov:
      dst = operand;
      break;
    case Opcode::kAdd:
      dst = static_cast<uint16_t>(dst + operand);
      cpu_.zero = dst == 0;
      break;
    case Opcode::kSub:
      dst = static_cast<uint16_t>(dst - operand);
      cpu_.zero = dst == 0;
      break;
    case Opcode::kAnd:
      dst &= operand;
      cpu_.zero = dst == 0;
      break;
    case Opcode::kCmp:
      cpu_.zero = dst == operand;
      break;
    case Opcode::kJmp:
      cpu_.pc = operand;
      break;
    case Opcode::kJz:
      if (cpu_.zero) cpu_.pc = operand;
      break;
    case Opcode::kJnz:
      if (!cpu_.zero) cpu_.pc = operand;
      break;
    case Opcode::kCall:
      cpu_.pc = s.pc;
      if (Push16(next, s)) cpu_.pc = operand;
      break;
    case Opcode::kRet:
      cpu_.pc = Pop16();
      break;
    case Opcode::kReti:
      cpu_.pc = Pop16();
      cpu_.gie = true;
      break;
    case Opcode::kEi:
      cpu_.gie = true;
      break;
    case Opcode::kDi:
      cpu_.gie = false;
      break;
    case Opcode::kSleep:
      cpu_.sleeping = true;
      break;
    case Opcode::kOut:
      WriteOctet(kGpioOut, dst & 0xFF);
      s.w_en = true;
      s.d_addr = kGpioOut;
      s.w_len = 1;
      break;
    case Opcode::kHalt:
      cpu_.pc = s.pc;
      cpu_.halted = true;
      break;
  }
}

}  // namespace poxsim
