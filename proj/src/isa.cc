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

#include "poxsim/isa.h"

#include <cstdio>

#include "poxsim/errors.h"

namespace poxsim {
namespace {

constexpr std::array<std::string_view, kOpcodeCount> kMnemonics = {
    "NOP", "LOADI", "LOAD", "STORE", "MOV",  "ADD",   "SUB",
    "AND", "CMP",   "JMP",  "JZ",    "JNZ",  "CALL",  "RET",
    "RETI", "EI",   "DI",   "SLEEP", "OUT",  "HALT"};

std::string Reg(uint8_t r) { return "R" + std::to_string(r); }

std::string Hex(uint16_t v) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "0x%04X", v);
  return buf;
}

// Second-operand text: "Rb", "imm" or "Rb, imm".
std::string Source(const Instruction& inst) {
  if (inst.rb == kNoReg) return Hex(inst.imm);
  if (inst.imm == 0) return Reg(inst.rb);
  return Reg(inst.rb) + ", " + Hex(inst.imm);
}

}  // namespace

InstructionWord Encode(const Instruction& inst) {
  return {static_cast<uint8_t>(inst.op),
          static_cast<uint8_t>((inst.ra & 0x0F) << 4 | (inst.rb & 0x0F)),
          static_cast<uint8_t>(inst.imm & 0xFF),
          static_cast<uint8_t>(inst.imm >> 8)};
}

std::optional<Instruction> TryDecode(
    std::span<const uint8_t, kInstructionSize> word) {
  if (word[0] >= kOpcodeCount) return std::nullopt;
  const uint8_t ra = word[1] >> 4;
  const uint8_t rb = word[1] & 0x0F;
  if (ra >= kRegisterCount || rb > kNoReg) return std::nullopt;
  return Instruction{static_cast<Opcode>(word[0]), ra, rb,
                     static_cast<uint16_t>(word[2] | word[3] << 8)};
}

Instruction Decode(uint16_t pc, std::span<const uint8_t, kInstructionSize> word) {
  if (auto inst = TryDecode(word)) return *inst;
  throw IllegalOpcode(pc, {word[0], word[1], word[2], word[3]});
}

std::string_view Mnemonic(Opcode op) {
  return kMnemonics[static_cast<size_t>(op)];
}

std::optional<Opcode> OpcodeFromMnemonic(std::string_view mnemonic) {
  for (size_t i = 0; i < kMnemonics.size(); ++i) {
    if (kMnemonics[i] == mnemonic) return static_cast<Opcode>(i);
  }
  return std::nullopt;
}

std::string Disassemble(const Instruction& inst) {
  std::string text(Mnemonic(inst.op));
  switch (inst.op) {
    case Opcode::kLoadi:
      return text + " " + Reg(inst.ra) + ", " + Hex(inst.imm);
    case Opcode::kLoad:
    case Opcode::kStore:
    case Opcode::kMov:
    case Opcode::kAdd:
    case Opcode::kSub:
    case Opcode::kAnd:
    case Opcode::kCmp:
      return text + " " + Reg(inst.ra) + ", " + Source(inst);
    case Opcode::kJmp:
    case Opcode::kJz:
    case Opcode::kJnz:
    case Opcode::kCall:
      return text + " " + Source(inst);
    case Opcode::kOut:
      return text + " " + Reg(inst.ra);
    default:
      return text;
  }
}

}  // namespace poxsim
