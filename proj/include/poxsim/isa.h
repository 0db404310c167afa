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

#ifndef POXSIM_ISA_H_
#define POXSIM_ISA_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace poxsim {

// Every instruction occupies exactly four octets:
//
//   octet 0   opcode
//   octet 1   bits 7..4 = ra (0-7), bits 3..0 = rb (0-7, or kNoReg)
//   octet 2-3 16-bit immediate, little-endian
//
// The second operand of every instruction that takes one is
// `(rb == kNoReg ? 0 : R[rb]) + imm`, so "ADD R2, R3", "ADD R2, 5" and
// "ADD R2, R3, 5" share one encoding scheme.
enum class Opcode : uint8_t {
  kNop = 0x00,
  kLoadi = 0x01,
  kLoad = 0x02,
  kStore = 0x03,
  kMov = 0x04,
  kAdd = 0x05,
  kSub = 0x06,
  kAnd = 0x07,
  kCmp = 0x08,
  kJmp = 0x09,
  kJz = 0x0A,
  kJnz = 0x0B,
  kCall = 0x0C,
  kRet = 0x0D,
  kReti = 0x0E,
  kEi = 0x0F,
  kDi = 0x10,
  kSleep = 0x11,
  kOut = 0x12,
  kHalt = 0x13,
};

inline constexpr int kOpcodeCount = 20;
inline constexpr int kInstructionSize = 4;
inline constexpr uint8_t kNoReg = 0x8;
inline constexpr int kRegisterCount = 8;
inline constexpr int kStackPointer = 1;

struct Instruction {
  Opcode op = Opcode::kNop;
  uint8_t ra = 0;
  uint8_t rb = kNoReg;
  uint16_t imm = 0;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

using InstructionWord = std::array<uint8_t, kInstructionSize>;

InstructionWord Encode(const Instruction& inst);

// Returns nullopt for an unassigned opcode or a malformed register nibble.
std::optional<Instruction> TryDecode(std::span<const uint8_t, kInstructionSize> word);

// Throws IllegalOpcode(pc, word) where TryDecode would return nullopt.
Instruction Decode(uint16_t pc, std::span<const uint8_t, kInstructionSize> word);

std::string_view Mnemonic(Opcode op);
std::optional<Opcode> OpcodeFromMnemonic(std::string_view mnemonic);

// Canonical assembly text for an instruction; parses back to the same
// instruction through the assembler.
std::string Disassemble(const Instruction& inst);

}  // namespace poxsim

#endif  // POXSIM_ISA_H_
