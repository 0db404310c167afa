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

#include "poxsim/errors.h"

#include <cstdio>

namespace poxsim {
namespace {

std::string DescribeIllegal(uint16_t pc, const std::array<uint8_t, 4>& o) {
  char buf[96];
  std::snprintf(buf, sizeof(buf),
                "illegal opcode at 0x%04X: %02X %02X %02X %02X", pc, o[0],
                o[1], o[2], o[3]);
  return buf;
}

}  // namespace

IllegalOpcode::IllegalOpcode(uint16_t pc, std::array<uint8_t, 4> octets)
    : Error(DescribeIllegal(pc, octets)), pc_(pc), octets_(octets) {}

ParseError::ParseError(int line, const std::string& reason)
    : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}

UnknownLabel::UnknownLabel(const std::string& symbol)
    : Error("unknown label '" + symbol + "'"), symbol_(symbol) {}

}  // namespace poxsim
