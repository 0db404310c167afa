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

#ifndef POXSIM_TRACE_H_
#define POXSIM_TRACE_H_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "poxsim/machine.h"
#include "poxsim/monitor.h"

namespace poxsim {

// One cycle as seen by the monitor, together with the EXEC state it
// produced for that cycle.
struct TraceRecord {
  BusSignals signals;
  MonitorState monitor;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

using ExecutionTrace = std::vector<TraceRecord>;

inline constexpr const char* kTraceCsvHeader =
    "cycle,pc,opcode,w_en,d_addr,dma_en,dma_addr,irq,irq_line,exec,phase";

void WriteTraceCsv(std::ostream& out, std::span<const TraceRecord> trace);
std::string TraceToCsv(std::span<const TraceRecord> trace);

// Inverse of WriteTraceCsv. Push widths are recovered from the opcode
// column. Throws ParseError.
ExecutionTrace ReadTraceCsv(std::istream& in);

}  // namespace poxsim

#endif  // POXSIM_TRACE_H_
