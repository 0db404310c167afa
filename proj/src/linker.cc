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

#include <algorithm>
#include <cstdio>

#include "json.hpp"
#include "poxsim/errors.h"
#include "poxsim/imager.h"

namespace poxsim {
namespace {

using memmap::kDataMax;
using memmap::kDataMin;
using memmap::kProgramMax;
using memmap::kProgramMin;

std::string Hex16(uint32_t v) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "0x%04X", v);
  return buf;
}

// First-fit allocator over a window of the address space.
class Allocator {
 public:
  void Reserve(uint32_t first, uint32_t size) {
    if (size > 0) used_.push_back({first, first + size - 1});
  }

  bool Free(uint32_t first, uint32_t size) const {
    const uint32_t last = first + size - 1;
    return std::none_of(used_.begin(), used_.end(), [&](const auto& r) {
      return first <= r.second && r.first <= last;
    });
  }

  std::optional<uint32_t> Find(uint32_t lo, uint32_t hi, uint32_t size,
                               uint32_t align) const {
    if (size == 0) return lo;
    for (uint32_t at = (lo + align - 1) / align * align; at + size - 1 <= hi;
         at += align) {
      if (Free(at, size)) return at;
    }
    return std::nullopt;
  }

 private:
  std::vector<std::pair<uint32_t, uint32_t>> used_;
};

LinkError BadSections(const std::string& why) {
  return LinkError(LinkError::Kind::kBadSections, why);
}

LinkError Overflow(const std::string& region) {
  return LinkError(LinkError::Kind::kOverflow, "overflow in " + region);
}

}  // namespace

std::string_view SectionKindName(SectionKind kind) {
  switch (kind) {
    case SectionKind::kExecStart:
      return "exec.start";
    case SectionKind::kExecBody:
      return "exec.body";
    case SectionKind::kExecLeave:
      return "exec.leave";
    case SectionKind::kUntrusted:
      return "untrusted";
    case SectionKind::kData:
      return "data";
  }
  return "?";
}

std::optional<SectionKind> SectionKindFromName(std::string_view name) {
  for (auto k : {SectionKind::kExecStart, SectionKind::kExecBody,
                 SectionKind::kExecLeave, SectionKind::kUntrusted,
                 SectionKind::kData}) {
    if (SectionKindName(k) == name) return k;
  }
  return std::nullopt;
}

std::vector<uint16_t> LayoutManifest::TrustedIsrEntries() const {
  std::vector<uint16_t> entries;
  for (const auto& s : sections) {
    if (s.kind == SectionKind::kExecBody && s.irq_line) entries.push_back(s.addr);
  }
  return entries;
}

std::string LayoutManifest::ToJson() const {
  nlohmann::ordered_json j;
  j["er_min"] = Hex16(er.min);
  j["er_max"] = Hex16(er.max);
  j["or_min"] = Hex16(out.min);
  j["or_max"] = Hex16(out.max);
  auto& syms = j["symbols"] = nlohmann::ordered_json::object();
  for (const auto& [name, addr] : symbols) syms[name] = Hex16(addr);
  auto& ivt = j["ivt_entries"] = nlohmann::ordered_json::array();
  for (uint16_t e : ivt_entries) ivt.push_back(Hex16(e));
  auto& secs = j["sections"] = nlohmann::ordered_json::array();
  for (const auto& s : sections) {
    nlohmann::ordered_json js;
    js["name"] = SectionKindName(s.kind);
    js["label"] = s.label;
    js["addr"] = Hex16(s.addr);
    js["size"] = s.size;
    if (s.irq_line) js["irq_line"] = *s.irq_line;
    secs.push_back(std::move(js));
  }
  return j.dump(2);
}

LinkedImage Link(std::span<const Section> sections, const LinkHints& hints) {
  const Section* start = nullptr;
  const Section* leave = nullptr;
  std::array<const Section*, memmap::kIvtEntries> line_owner{};
  for (const auto& s : sections) {
    if (s.kind == SectionKind::kExecStart) {
      if (start) throw BadSections("more than one exec.start section");
      start = &s;
    } else if (s.kind == SectionKind::kExecLeave) {
      if (leave) throw BadSections("more than one exec.leave section");
      leave = &s;
    }
    if (s.irq_line) {
      const int line = *s.irq_line;
      if (line < 0 || line >= memmap::kIvtEntries) {
        throw BadSections("irq_line " + std::to_string(line) + " out of range");
      }
      if (s.kind != SectionKind::kExecBody && s.kind != SectionKind::kUntrusted) {
        throw BadSections("only exec.body and untrusted sections may be ISRs");
      }
      if (line_owner[line]) {
        throw LinkError(LinkError::Kind::kIvtConflict,
                        "two sections claim irq line " + std::to_string(line));
      }
      line_owner[line] = &s;
    }
    if (s.addr && s.kind != SectionKind::kUntrusted) {
      throw BadSections("only untrusted sections may set addr");
    }
  }
  if (!start || !leave) throw BadSections("need one exec.start and one exec.leave");
  if (hints.er_min % kInstructionSize != 0) {
    throw BadSections("er_min must be 4-octet aligned");
  }

  std::vector<AssemblyUnit> units;
  units.reserve(sections.size());
  for (const auto& s : sections) {
    units.push_back(AssemblyUnit::Parse(s.source, s.kind == SectionKind::kData,
                                        s.first_line));
  }
  auto unit_of = [&](const Section* s) -> const AssemblyUnit& {
    return units[static_cast<size_t>(s - sections.data())];
  };
  if (unit_of(start).size() == 0) throw BadSections("exec.start is empty");
  const auto last = unit_of(leave).last_opcode();
  if (!last || (*last != Opcode::kRet && *last != Opcode::kHalt)) {
    throw BadSections("exec.leave must end with RET or HALT");
  }

  std::vector<uint32_t> addr(sections.size(), 0);
  auto index_of = [&](const Section& s) {
    return static_cast<size_t>(&s - sections.data());
  };

  // ER: start, bodies in declaration order, leave.
  uint32_t cursor = hints.er_min;
  auto place_er = [&](const Section& s) {
    addr[index_of(s)] = cursor;
    cursor += units[index_of(s)].size();
  };
  place_er(*start);
  for (const auto& s : sections) {
    if (s.kind == SectionKind::kExecBody) place_er(s);
  }
  place_er(*leave);
  if (hints.er_min < kProgramMin || cursor - 1 > kProgramMax) {
    throw Overflow("ER");
  }
  const AddressRange er{hints.er_min, static_cast<uint16_t>(cursor - 1)};

  Allocator program;
  program.Reserve(er.min, er.size());
  for (const auto& s : sections) {
    if (s.kind != SectionKind::kUntrusted || !s.addr) continue;
    const uint32_t size = units[index_of(s)].size();
    if (*s.addr % kInstructionSize != 0 || *s.addr < kProgramMin ||
        *s.addr + size - 1 > kProgramMax || !program.Free(*s.addr, size)) {
      throw Overflow("untrusted section '" + s.label + "' at " + Hex16(*s.addr));
    }
    program.Reserve(*s.addr, size);
    addr[index_of(s)] = *s.addr;
  }
  for (const auto& s : sections) {
    if (s.kind != SectionKind::kUntrusted || s.addr) continue;
    const uint32_t size = units[index_of(s)].size();
    auto at = program.Find(static_cast<uint32_t>(er.max) + 1, kProgramMax, size,
                           kInstructionSize);
    if (!at) at = program.Find(kProgramMin, er.min - 1u, size, kInstructionSize);
    if (!at) throw Overflow("program memory");
    program.Reserve(*at, size);
    addr[index_of(s)] = *at;
  }

  Allocator data;
  data.Reserve(hints.out.min, hints.out.size());
  for (const auto& s : sections) {
    if (s.kind != SectionKind::kData) continue;
    const uint32_t size = units[index_of(s)].size();
    auto at = data.Find(kDataMin, kDataMax, size, 2);
    if (!at) throw Overflow("data memory");
    data.Reserve(*at, size);
    addr[index_of(s)] = *at;
  }

  LinkedImage linked;
  auto& manifest = linked.manifest;
  manifest.er = er;
  manifest.out = hints.out;
  auto define = [&](const std::string& name, uint32_t at) {
    if (!manifest.symbols.emplace(name, static_cast<uint16_t>(at)).second) {
      throw BadSections("duplicate symbol '" + name + "'");
    }
  };
  for (size_t i = 0; i < sections.size(); ++i) {
    if (!sections[i].label.empty()) define(sections[i].label, addr[i]);
    for (const auto& [name, offset] : units[i].labels()) {
      define(name, addr[i] + offset);
    }
  }

  for (size_t i = 0; i < sections.size(); ++i) {
    const auto octets = units[i].Emit(manifest.symbols);
    std::copy(octets.begin(), octets.end(), linked.image.bytes.begin() + addr[i]);
    manifest.sections.push_back({sections[i].kind, sections[i].label,
                                 static_cast<uint16_t>(addr[i]),
                                 units[i].size(), sections[i].irq_line});
  }
  for (int line = 0; line < memmap::kIvtEntries; ++line) {
    if (!line_owner[line]) continue;
    const auto at = static_cast<uint16_t>(addr[index_of(*line_owner[line])]);
    manifest.ivt_entries[line] = at;
    linked.image.SetIvtEntry(line, at);
  }
  return linked;
}

std::string_view LayoutViolationName(LayoutViolationKind kind) {
  switch (kind) {
    case LayoutViolationKind::kBoundsMismatch:
      return "BoundsMismatch";
    case LayoutViolationKind::kRegionOverlap:
      return "RegionOverlap";
    case LayoutViolationKind::kIvtIntoErNonEntry:
      return "IvtIntoErNonEntry";
    case LayoutViolationKind::kTrustedIsrOutsideEr:
      return "TrustedIsrOutsideEr";
  }
  return "?";
}

std::vector<LayoutViolation> LayoutCheck(const LayoutManifest& manifest,
                                         const MonitorConfig& cfg) {
  std::vector<LayoutViolation> violations;
  auto add = [&](LayoutViolationKind kind, std::string detail) {
    violations.push_back({kind, std::move(detail)});
  };
  if (manifest.er != cfg.er || manifest.out != cfg.out) {
    add(LayoutViolationKind::kBoundsMismatch,
        "manifest bounds differ from monitor configuration");
  }
  const AddressRange& er = cfg.er;
  const AddressRange& out = cfg.out;
  if (er.Overlaps(out)) add(LayoutViolationKind::kRegionOverlap, "ER overlaps OR");
  if (er.Overlaps(kIvtRange)) add(LayoutViolationKind::kRegionOverlap, "ER overlaps IVT");
  if (out.Overlaps(kIvtRange)) add(LayoutViolationKind::kRegionOverlap, "OR overlaps IVT");

  const auto entries = manifest.TrustedIsrEntries();
  for (int line = 0; line < memmap::kIvtEntries; ++line) {
    const uint16_t target = manifest.ivt_entries[line];
    if (er.Contains(target) &&
        std::find(entries.begin(), entries.end(), target) == entries.end()) {
      add(LayoutViolationKind::kIvtIntoErNonEntry,
          "IVT line " + std::to_string(line) + " points into ER at " +
              Hex16(target) + ", which is not a trusted ISR entry");
    }
  }
  for (const auto& s : manifest.sections) {
    if (s.kind == SectionKind::kExecBody && s.irq_line &&
        (!er.Contains(s.addr) || (s.size > 0 && !er.Contains(s.addr + s.size - 1)))) {
      add(LayoutViolationKind::kTrustedIsrOutsideEr,
          "trusted ISR '" + s.label + "' is not contained in ER");
    }
  }
  return violations;
}

}  // namespace poxsim
