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

// Grammar, one statement per line:
//
//   [LABEL:]... [MNEMONIC [operand {, operand}]] [; comment]
//   [LABEL:]... [.byte|.word|.zero value {, value}]  (data sections only)
//
// Operands are R0-R7, 0x-hex or decimal immediates, or label names.

#include <algorithm>
#include <cctype>
#include <charconv>

#include "poxsim/errors.h"
#include "poxsim/imager.h"

namespace poxsim {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

bool IsIdentStart(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

bool IsIdentChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

bool IsIdentifier(std::string_view s) {
  return !s.empty() && IsIdentStart(s[0]) &&
         std::all_of(s.begin(), s.end(), IsIdentChar);
}

std::string Upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

struct Operand {
  enum class Kind { kRegister, kImmediate, kLabel } kind;
  uint8_t reg = 0;
  uint16_t imm = 0;
  std::string label;
};

std::optional<uint16_t> ParseImmediate(std::string_view s) {
  bool negative = false;
  if (!s.empty() && s[0] == '-') {
    negative = true;
    s.remove_prefix(1);
  }
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  if (s.empty()) return std::nullopt;
  uint32_t value = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value, base);
  if (ec != std::errc() || end != s.data() + s.size()) return std::nullopt;
  if (negative ? value > 0x8000 : value > 0xFFFF) return std::nullopt;
  return static_cast<uint16_t>(negative ? 0x10000 - value : value);
}

Operand ParseOperand(std::string_view text, int line) {
  if (text.size() == 2 && (text[0] == 'R' || text[0] == 'r') &&
      text[1] >= '0' && text[1] <= '7') {
    return {Operand::Kind::kRegister, static_cast<uint8_t>(text[1] - '0'), 0, {}};
  }
  if (auto imm = ParseImmediate(text)) {
    return {Operand::Kind::kImmediate, 0, *imm, {}};
  }
  if (IsIdentifier(text)) return {Operand::Kind::kLabel, 0, 0, std::string(text)};
  throw ParseError(line, "bad operand '" + std::string(text) + "'");
}

std::vector<std::string_view> SplitOperands(std::string_view text) {
  std::vector<std::string_view> out;
  if (Trim(text).empty()) return out;
  size_t start = 0;
  while (true) {
    const size_t comma = text.find(',', start);
    out.push_back(Trim(text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

enum class Shape { kNone, kRegImm, kRegSrc, kSrc, kReg };

Shape ShapeOf(Opcode op) {
  switch (op) {
    case Opcode::kLoadi:
      return Shape::kRegImm;
    case Opcode::kLoad:
    case Opcode::kStore:
    case Opcode::kMov:
    case Opcode::kAdd:
    case Opcode::kSub:
    case Opcode::kAnd:
    case Opcode::kCmp:
      return Shape::kRegSrc;
    case Opcode::kJmp:
    case Opcode::kJz:
    case Opcode::kJnz:
    case Opcode::kCall:
      return Shape::kSrc;
    case Opcode::kOut:
      return Shape::kReg;
    default:
      return Shape::kNone;
  }
}

}  // namespace

AssemblyUnit AssemblyUnit::Parse(std::string_view text, bool allow_data,
                                 int first_line) {
  AssemblyUnit unit;
  int line_no = first_line - 1;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const size_t semi = line.find(';'); semi != std::string_view::npos) {
      line = line.substr(0, semi);
    }
    line = Trim(line);

    // Leading labels.
    while (true) {
      const size_t colon = line.find(':');
      if (colon == std::string_view::npos) break;
      const auto name = Trim(line.substr(0, colon));
      if (!IsIdentifier(name)) {
        throw ParseError(line_no, "bad label '" + std::string(name) + "'");
      }
      for (const auto& [existing, offset] : unit.labels_) {
        if (existing == name) {
          throw ParseError(line_no, "duplicate label '" + std::string(name) + "'");
        }
      }
      unit.labels_.emplace_back(std::string(name), unit.size_);
      line = Trim(line.substr(colon + 1));
    }
    if (line.empty()) continue;

    const size_t space = line.find_first_of(" \t");
    const std::string mnemonic =
        Upper(line.substr(0, std::min(space, line.size())));
    const auto operands = SplitOperands(
        space == std::string_view::npos ? std::string_view{} : line.substr(space));

    if (mnemonic[0] == '.') {
      if (!allow_data) {
        throw ParseError(line_no, "data directive outside a data section");
      }
      if (operands.empty()) throw ParseError(line_no, mnemonic + " needs a value");
      for (auto op_text : operands) {
        const Operand op = ParseOperand(op_text, line_no);
        Item item;
        item.line = line_no;
        item.is_instruction = false;
        if (mnemonic == ".BYTE") {
          if (op.kind != Operand::Kind::kImmediate || op.imm > 0xFF) {
            throw ParseError(line_no, ".byte needs a value in 0..255");
          }
          item.data = {static_cast<uint8_t>(op.imm)};
        } else if (mnemonic == ".WORD") {
          if (op.kind == Operand::Kind::kRegister) {
            throw ParseError(line_no, ".word needs a value or label");
          }
          item.inst.imm = op.imm;
          item.imm_label = op.label;
          item.data = {static_cast<uint8_t>(op.imm & 0xFF),
                       static_cast<uint8_t>(op.imm >> 8)};
        } else if (mnemonic == ".ZERO") {
          if (op.kind != Operand::Kind::kImmediate) {
            throw ParseError(line_no, ".zero needs a count");
          }
          item.data.assign(op.imm, 0);
        } else {
          throw ParseError(line_no, "unknown directive " + mnemonic);
        }
        unit.size_ += static_cast<uint32_t>(item.data.size());
        unit.items_.push_back(std::move(item));
      }
      continue;
    }

    const auto opcode = OpcodeFromMnemonic(mnemonic);
    if (!opcode) throw ParseError(line_no, "unknown mnemonic " + mnemonic);
    if (allow_data) {
      throw ParseError(line_no, "instruction inside a data section");
    }
    Item item;
    item.line = line_no;
    item.inst.op = *opcode;
    item.inst.rb = 0;

    auto want_reg = [&](std::string_view t) {
      const Operand op = ParseOperand(t, line_no);
      if (op.kind != Operand::Kind::kRegister) {
        throw ParseError(line_no, "expected a register, got '" + std::string(t) + "'");
      }
      return op.reg;
    };
    auto set_imm = [&](const Operand& op) {
      if (op.kind == Operand::Kind::kRegister) {
        throw ParseError(line_no, "expected an immediate or label");
      }
      item.inst.imm = op.imm;
      item.imm_label = op.label;
    };
    auto set_src = [&](std::span<const std::string_view> ops) {
      if (ops.empty() || ops.size() > 2) {
        throw ParseError(line_no, "wrong operand count for " + mnemonic);
      }
      const Operand first = ParseOperand(ops[0], line_no);
      if (first.kind == Operand::Kind::kRegister) {
        item.inst.rb = first.reg;
        if (ops.size() == 2) set_imm(ParseOperand(ops[1], line_no));
      } else {
        if (ops.size() == 2) throw ParseError(line_no, "base register must come first");
        item.inst.rb = kNoReg;
        set_imm(first);
      }
    };

    switch (ShapeOf(*opcode)) {
      case Shape::kNone:
        if (!operands.empty()) throw ParseError(line_no, mnemonic + " takes no operands");
        break;
      case Shape::kRegImm:
        if (operands.size() != 2) throw ParseError(line_no, mnemonic + " needs Rd, imm");
        item.inst.ra = want_reg(operands[0]);
        set_imm(ParseOperand(operands[1], line_no));
        break;
      case Shape::kRegSrc:
        if (operands.size() < 2) throw ParseError(line_no, mnemonic + " needs Rd, source");
        item.inst.ra = want_reg(operands[0]);
        set_src(std::span(operands).subspan(1));
        break;
      case Shape::kSrc:
        set_src(operands);
        break;
      case Shape::kReg:
        if (operands.size() != 1) throw ParseError(line_no, mnemonic + " needs one register");
        item.inst.ra = want_reg(operands[0]);
        break;
    }
    unit.size_ += kInstructionSize;
    unit.items_.push_back(std::move(item));
  }
  return unit;
}

std::optional<Opcode> AssemblyUnit::last_opcode() const {
  if (items_.empty() || !items_.back().is_instruction) return std::nullopt;
  return items_.back().inst.op;
}

std::vector<uint8_t> AssemblyUnit::Emit(const SymbolTable& symbols) const {
  std::vector<uint8_t> out;
  out.reserve(size_);
  for (const auto& item : items_) {
    uint16_t imm = item.inst.imm;
    if (!item.imm_label.empty()) {
      auto it = symbols.find(item.imm_label);
      if (it == symbols.end()) throw UnknownLabel(item.imm_label);
      imm = it->second;
    }
    if (item.is_instruction) {
      Instruction inst = item.inst;
      inst.imm = imm;
      const auto word = Encode(inst);
      out.insert(out.end(), word.begin(), word.end());
    } else if (!item.imm_label.empty()) {
      out.push_back(imm & 0xFF);
      out.push_back(imm >> 8);
    } else {
      out.insert(out.end(), item.data.begin(), item.data.end());
    }
  }
  return out;
}

std::vector<uint8_t> Assemble(std::string_view text, uint16_t base) {
  const auto unit = AssemblyUnit::Parse(text, /*allow_data=*/false);
  SymbolTable symbols;
  for (const auto& [name, offset] : unit.labels()) {
    symbols[name] = static_cast<uint16_t>(base + offset);
  }
  return unit.Emit(symbols);
}

}  // namespace poxsim
