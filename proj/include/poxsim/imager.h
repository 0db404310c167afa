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

// Two-pass assembler and region-aware linker.
//
// Linked layout of the executable region (ER):
//
//   er_min -> exec.start
//             exec.body sections, in declaration order (trusted ISRs too)
//             exec.leave            <- its final octet is er_max
//
// Untrusted sections land outside [er_min, er_max]; data sections land in
// data memory outside the output region (OR). IVT slots are filled from the
// sections' irq_line marks.

#ifndef POXSIM_IMAGER_H_
#define POXSIM_IMAGER_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "poxsim/machine.h"
#include "poxsim/monitor.h"

namespace poxsim {

using SymbolTable = std::map<std::string, uint16_t, std::less<>>;

// Parsed but not yet placed source text.
class AssemblyUnit {
 public:
  // Throws ParseError. `first_line` offsets reported line numbers.
  static AssemblyUnit Parse(std::string_view text, bool allow_data,
                            int first_line = 1);

  uint32_t size() const { return size_; }
  // Labels defined in this unit, as offsets from the unit's start.
  const std::vector<std::pair<std::string, uint32_t>>& labels() const {
    return labels_;
  }
  // Opcode of the last instruction, if the unit ends with one.
  std::optional<Opcode> last_opcode() const;

  // Second pass; `symbols` must already hold this unit's placed labels.
  // Throws UnknownLabel.
  std::vector<uint8_t> Emit(const SymbolTable& symbols) const;

 private:
  struct Item {
    int line = 0;
    bool is_instruction = true;
    Instruction inst;
    std::string imm_label;      // unresolved immediate, if any
    std::vector<uint8_t> data;  // data directives
  };

  std::vector<Item> items_;
  std::vector<std::pair<std::string, uint32_t>> labels_;
  uint32_t size_ = 0;
};

// Standalone assembly at `base` with only local labels.
std::vector<uint8_t> Assemble(std::string_view text, uint16_t base = 0);

enum class SectionKind : uint8_t {
  kExecStart,
  kExecBody,
  kExecLeave,
  kUntrusted,
  kData,
};

std::string_view SectionKindName(SectionKind kind);
std::optional<SectionKind> SectionKindFromName(std::string_view name);

struct Section {
  SectionKind kind = SectionKind::kExecBody;
  std::string label;
  std::string source;
  std::optional<int> irq_line;
  // Fixed placement; untrusted sections only.
  std::optional<uint16_t> addr;
  // Line of `source` within its enclosing file, for diagnostics.
  int first_line = 1;
};

struct LinkHints {
  uint16_t er_min = 0xE000;
  AddressRange out{0x0300, 0x031F};
};

struct PlacedSection {
  SectionKind kind;
  std::string label;
  uint16_t addr;
  uint32_t size;
  std::optional<int> irq_line;
};

struct LayoutManifest {
  AddressRange er;
  AddressRange out;
  SymbolTable symbols;
  std::array<uint16_t, memmap::kIvtEntries> ivt_entries{};
  std::vector<PlacedSection> sections;

  RegionLayout layout() const { return {er, out}; }
  // Entry points of exec.body sections carrying an irq_line.
  std::vector<uint16_t> TrustedIsrEntries() const;
  // JSON rendering for `build`.
  std::string ToJson() const;
};

struct LinkedImage {
  MemoryImage image;
  LayoutManifest manifest;
};

// Throws LinkError, ParseError or UnknownLabel.
LinkedImage Link(std::span<const Section> sections, const LinkHints& hints);

enum class LayoutViolationKind : uint8_t {
  kBoundsMismatch,
  kRegionOverlap,
  kIvtIntoErNonEntry,
  kTrustedIsrOutsideEr,
};

std::string_view LayoutViolationName(LayoutViolationKind kind);

struct LayoutViolation {
  LayoutViolationKind kind;
  std::string detail;
};

// Verifier-side static check of a manifest. Empty result means ok.
std::vector<LayoutViolation> LayoutCheck(const LayoutManifest& manifest,
                                         const MonitorConfig& cfg);

}  // namespace poxsim

#endif  // POXSIM_IMAGER_H_
