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

#include "poxsim/trace.h"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "poxsim/errors.h"

namespace poxsim {
namespace {

std::vector<std::string_view> SplitCommas(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

uint64_t ParseNumber(std::string_view text, int line, int base = 10) {
  if (base == 16) {
    if (text.size() < 3 || text.substr(0, 2) != "0x") {
      throw ParseError(line, "expected 0x-prefixed hex, got '" +
                                 std::string(text) + "'");
    }
    text.remove_prefix(2);
  }
  uint64_t value = 0;
  auto [end, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value, base);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ParseError(line, "bad number '" + std::string(text) + "'");
  }
  return value;
}

bool ParseBit(std::string_view text, int line) {
  if (text == "0") return false;
  if (text == "1") return true;
  throw ParseError(line, "expected 0 or 1, got '" + std::string(text) + "'");
}

void ParseOpcodeColumn(std::string_view text, int line, BusSignals& s) {
  static constexpr std::pair<std::string_view, CycleKind> kKinds[] = {
      {"<IRQ>", CycleKind::kDispatch}, {"<DMA>", CycleKind::kDma},
      {"<IDLE>", CycleKind::kIdle},    {"<HOST>", CycleKind::kHost},
      {"<FAULT>", CycleKind::kFault},  {"<HALTED>", CycleKind::kHalted}};
  for (const auto& [name, kind] : kKinds) {
    if (text == name) {
      s.kind = kind;
      return;
    }
  }
  auto op = OpcodeFromMnemonic(text);
  if (!op) throw ParseError(line, "unknown opcode '" + std::string(text) + "'");
  s.kind = CycleKind::kInstruction;
  s.op = *op;
}

}  // namespace

void WriteTraceCsv(std::ostream& out, std::span<const TraceRecord> trace) {
  out << kTraceCsvHeader << '\n';
  char buf[160];
  for (const auto& rec : trace) {
    const auto& s = rec.signals;
    std::snprintf(buf, sizeof(buf),
                  "%llu,0x%04X,%s,%d,0x%04X,%d,0x%04X,%d,%d,%d,",
                  static_cast<unsigned long long>(s.cycle), s.pc,
                  OpcodeColumn(s).c_str(), s.w_en ? 1 : 0,
                  s.w_en ? s.d_addr : 0, s.dma_en ? 1 : 0,
                  s.dma_en ? s.dma_addr : 0, s.irq ? 1 : 0,
                  s.irq ? s.irq_line : 0, ExecBit(rec.monitor) ? 1 : 0);
    out << buf << PhaseName(rec.monitor.phase) << '\n';
  }
}

std::string TraceToCsv(std::span<const TraceRecord> trace) {
  std::ostringstream out;
  WriteTraceCsv(out, trace);
  return out.str();
}

ExecutionTrace ReadTraceCsv(std::istream& in) {
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line) || line != kTraceCsvHeader) {
    throw ParseError(line_no, "missing trace header");
  }
  ExecutionTrace trace;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = SplitCommas(line);
    if (f.size() != 11) throw ParseError(line_no, "expected 11 columns");
    TraceRecord rec;
    auto& s = rec.signals;
    s.cycle = ParseNumber(f[0], line_no);
    s.pc = static_cast<uint16_t>(ParseNumber(f[1], line_no, 16));
    ParseOpcodeColumn(f[2], line_no, s);
    s.w_en = ParseBit(f[3], line_no);
    s.d_addr = static_cast<uint16_t>(ParseNumber(f[4], line_no, 16));
    s.dma_en = ParseBit(f[5], line_no);
    s.dma_addr = static_cast<uint16_t>(ParseNumber(f[6], line_no, 16));
    s.irq = ParseBit(f[7], line_no);
    s.irq_line = static_cast<uint8_t>(ParseNumber(f[8], line_no));
    if (s.w_en) {
      const bool push = s.kind == CycleKind::kDispatch ||
                        (s.kind == CycleKind::kInstruction &&
                         s.op == Opcode::kCall);
      s.w_len = push ? 2 : 1;
    }
    const bool exec = ParseBit(f[9], line_no);
    auto phase = PhaseFromName(f[10]);
    if (!phase) throw ParseError(line_no, "unknown phase");
    if (exec != (*phase != Phase::kNotExec)) {
      throw ParseError(line_no, "exec column disagrees with phase");
    }
    rec.monitor.phase = *phase;
    trace.push_back(rec);
  }
  return trace;
}

}  // namespace poxsim
