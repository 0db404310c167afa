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

#include "poxsim/scenario.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

#include "poxsim/errors.h"

namespace poxsim {
namespace {

// ---------------------------------------------------------------------------
// TOML subset: root keys, [[section]] / [[event]] array tables, integers,
// basic and ''' multi-line literal strings, single-line integer arrays.

struct Value {
  std::variant<int64_t, std::string, std::vector<int64_t>> v;
  int line = 0;
  int content_line = 0;  // first line of a multi-line string's text
};

struct Table {
  std::string kind;  // "", "section" or "event"
  int line = 0;
  std::map<std::string, Value, std::less<>> keys;
};

std::string_view TrimView(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view StripComment(std::string_view s) {
  bool in_string = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

int64_t ParseInteger(std::string_view text, int line) {
  std::string digits;
  for (char c : text) {
    if (c != '_') digits.push_back(c);
  }
  std::string_view s = digits;
  bool negative = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    negative = s[0] == '-';
    s.remove_prefix(1);
  }
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  int64_t value = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value, base);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size()) {
    throw ParseError(line, "bad integer '" + std::string(text) + "'");
  }
  return negative ? -value : value;
}

std::string ParseBasicString(std::string_view s, int line) {
  std::string out;
  for (size_t i = 1; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '"') {
      if (!TrimView(s.substr(i + 1)).empty()) {
        throw ParseError(line, "trailing text after string");
      }
      return out;
    }
    if (c == '\\' && i + 1 < s.size()) {
      const char e = s[++i];
      out.push_back(e == 'n' ? '\n' : e == 't' ? '\t' : e);
    } else {
      out.push_back(c);
    }
  }
  throw ParseError(line, "unterminated string");
}

std::vector<Table> ParseTables(std::string_view text) {
  std::vector<std::string_view> lines;
  for (size_t pos = 0; pos <= text.size();) {
    const size_t eol = std::min(text.find('\n', pos), text.size());
    lines.push_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }

  std::vector<Table> tables(1);
  for (size_t i = 0; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    const std::string_view raw = lines[i];
    std::string_view line = TrimView(StripComment(raw));
    if (line.empty()) continue;

    if (line.starts_with("[[")) {
      if (!line.ends_with("]]")) throw ParseError(line_no, "bad table header");
      const auto kind = TrimView(line.substr(2, line.size() - 4));
      if (kind != "section" && kind != "event") {
        throw ParseError(line_no, "unknown table [[" + std::string(kind) + "]]");
      }
      tables.push_back({std::string(kind), line_no, {}});
      continue;
    }

    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    const std::string key(TrimView(line.substr(0, eq)));
    if (key.empty()) throw ParseError(line_no, "empty key");
    Value value;
    value.line = line_no;

    // Multi-line literal strings are taken from the raw text.
    const size_t raw_eq = raw.find('=');
    const std::string_view raw_value = TrimView(raw.substr(raw_eq + 1));
    if (raw_value.starts_with("'''")) {
      std::string body;
      std::string_view rest = raw_value.substr(3);
      size_t j = i;
      value.content_line = line_no;
      if (TrimView(rest).empty()) {
        ++j;
        value.content_line = line_no + 1;
        rest = j < lines.size() ? lines[j] : std::string_view{};
      }
      while (true) {
        const size_t close = rest.find("'''");
        if (close != std::string_view::npos) {
          body.append(rest.substr(0, close));
          if (!TrimView(StripComment(rest.substr(close + 3))).empty()) {
            throw ParseError(static_cast<int>(j) + 1, "trailing text after '''");
          }
          break;
        }
        body.append(rest);
        body.push_back('\n');
        if (++j >= lines.size()) throw ParseError(line_no, "unterminated '''");
        rest = lines[j];
      }
      value.v = std::move(body);
      i = j;
    } else {
      const std::string_view v = TrimView(line.substr(eq + 1));
      if (v.starts_with('"')) {
        value.v = ParseBasicString(v, line_no);
      } else if (v.starts_with('[')) {
        if (!v.ends_with(']')) throw ParseError(line_no, "arrays must fit on one line");
        std::vector<int64_t> items;
        std::string_view inner = v.substr(1, v.size() - 2);
        while (!TrimView(inner).empty()) {
          const size_t comma = inner.find(',');
          const auto item = TrimView(inner.substr(0, comma));
          if (!item.empty()) items.push_back(ParseInteger(item, line_no));
          if (comma == std::string_view::npos) break;
          inner = inner.substr(comma + 1);
        }
        value.v = std::move(items);
      } else {
        value.v = ParseInteger(v, line_no);
      }
    }
    if (!tables.back().keys.emplace(key, std::move(value)).second) {
      throw ParseError(line_no, "duplicate key '" + key + "'");
    }
  }
  return tables;
}

// Typed accessors over a parsed table.
class Reader {
 public:
  explicit Reader(const Table& t) : t_(t) {}

  bool Has(std::string_view key) const { return t_.keys.contains(key); }

  int64_t Int(std::string_view key, int64_t lo, int64_t hi) const {
    const Value& v = Get(key);
    const auto* i = std::get_if<int64_t>(&v.v);
    if (!i) throw ParseError(v.line, std::string(key) + " must be an integer");
    if (*i < lo || *i > hi) {
      throw ParseError(v.line, std::string(key) + " out of range");
    }
    return *i;
  }

  const std::string& Str(std::string_view key) const {
    const Value& v = Get(key);
    const auto* s = std::get_if<std::string>(&v.v);
    if (!s) throw ParseError(v.line, std::string(key) + " must be a string");
    return *s;
  }

  std::vector<uint8_t> Octets(std::string_view key) const {
    const Value& v = Get(key);
    const auto* a = std::get_if<std::vector<int64_t>>(&v.v);
    if (!a) throw ParseError(v.line, std::string(key) + " must be an array");
    std::vector<uint8_t> out;
    for (int64_t x : *a) {
      if (x < 0 || x > 0xFF) throw ParseError(v.line, "octet out of range");
      out.push_back(static_cast<uint8_t>(x));
    }
    return out;
  }

  const Value& Get(std::string_view key) const {
    auto it = t_.keys.find(key);
    if (it == t_.keys.end()) {
      throw ParseError(t_.line, "missing key '" + std::string(key) + "'");
    }
    return it->second;
  }

  void AllowOnly(std::initializer_list<std::string_view> allowed) const {
    for (const auto& [key, value] : t_.keys) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw ParseError(value.line, "unknown key '" + key + "'");
      }
    }
  }

 private:
  const Table& t_;
};

}  // namespace

Scenario Scenario::Parse(std::string_view text, std::string name) {
  const auto tables = ParseTables(text);
  Scenario s;
  s.name = std::move(name);

  const Reader root(tables[0]);
  root.AllowOnly({"name", "mode", "er_min", "or_min", "or_max", "run_cycles",
                  "attest_at", "entry"});
  if (root.Has("name")) s.name = root.Str("name");
  if (root.Has("mode")) {
    auto mode = ModeFromName(root.Str("mode"));
    if (!mode) throw ParseError(root.Get("mode").line, "mode must be apex or asap");
    s.mode = *mode;
  }
  if (root.Has("er_min")) s.hints.er_min = static_cast<uint16_t>(root.Int("er_min", 0, 0xFFFF));
  if (root.Has("or_min")) s.hints.out.min = static_cast<uint16_t>(root.Int("or_min", 0, 0xFFFF));
  if (root.Has("or_max")) s.hints.out.max = static_cast<uint16_t>(root.Int("or_max", 0, 0xFFFF));
  if (root.Has("run_cycles")) s.run_cycles = static_cast<uint64_t>(root.Int("run_cycles", 1, INT64_MAX));
  if (root.Has("attest_at")) {
    const Value& v = root.Get("attest_at");
    if (const auto* str = std::get_if<std::string>(&v.v)) {
      if (*str != "end") throw ParseError(v.line, "attest_at must be a cycle or \"end\"");
    } else {
      s.attest_at = static_cast<uint64_t>(root.Int("attest_at", 0, INT64_MAX));
    }
  }
  if (root.Has("entry")) s.entry = root.Str("entry");

  for (size_t i = 1; i < tables.size(); ++i) {
    const Reader r(tables[i]);
    if (tables[i].kind == "section") {
      r.AllowOnly({"name", "label", "irq_line", "addr", "source"});
      Section sec;
      auto kind = SectionKindFromName(r.Str("name"));
      if (!kind) throw ParseError(r.Get("name").line, "unknown section name");
      sec.kind = *kind;
      if (r.Has("label")) sec.label = r.Str("label");
      if (r.Has("irq_line")) sec.irq_line = static_cast<int>(r.Int("irq_line", 0, 15));
      if (r.Has("addr")) sec.addr = static_cast<uint16_t>(r.Int("addr", 0, 0xFFFF));
      sec.source = r.Str("source");
      sec.first_line = r.Get("source").content_line;
      s.sections.push_back(std::move(sec));
    } else {
      r.AllowOnly({"cycle", "action", "line", "addr", "data"});
      ScenarioEvent ev;
      ev.source_line = tables[i].line;
      ev.cycle = static_cast<uint64_t>(r.Int("cycle", 0, INT64_MAX));
      const std::string& action = r.Str("action");
      if (action == "raise_irq") {
        ev.action = ScenarioEvent::Action::kRaiseIrq;
        ev.line = static_cast<int>(r.Int("line", 0, 15));
      } else if (action == "dma_write" || action == "host_write") {
        ev.action = action == "dma_write" ? ScenarioEvent::Action::kDmaWrite
                                          : ScenarioEvent::Action::kHostWrite;
        ev.addr = static_cast<uint16_t>(r.Int("addr", 0, 0xFFFF));
        ev.data = r.Octets("data");
        if (ev.data.empty() || ev.addr + ev.data.size() > memmap::kAddressSpace) {
          throw ParseError(ev.source_line, "write must be non-empty and end by 0xFFFF");
        }
      } else {
        throw ParseError(r.Get("action").line, "unknown action '" + action + "'");
      }
      s.events.push_back(std::move(ev));
    }
  }
  s.Validate();
  return s;
}

Scenario Scenario::LoadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return Parse(text.str(), path.stem().string());
  } catch (const ParseError& e) {
    throw Error(path.string() + ":" + e.what());
  }
}

void Scenario::Validate() const {
  for (size_t i = 1; i < events.size(); ++i) {
    if (events[i].cycle < events[i - 1].cycle) {
      throw ParseError(events[i].source_line, "events must be sorted by cycle");
    }
  }
  if (attest_at && !events.empty() && *attest_at < events.back().cycle) {
    throw ParseError(events.back().source_line, "event scheduled after attest_at");
  }
}

BuiltScenario BuildScenario(const Scenario& scenario) {
  BuiltScenario built;
  built.linked = Link(scenario.sections, scenario.hints);
  const auto& manifest = built.linked.manifest;
  built.cfg = {scenario.mode, manifest.er, manifest.out};
  try {
    built.cfg.Validate();
  } catch (const InvalidConfig& e) {
    throw Error(scenario.name + ": " + e.what());
  }
  const auto violations = LayoutCheck(manifest, built.cfg);
  if (!violations.empty()) {
    std::string msg = scenario.name + ": layout check failed:";
    for (const auto& v : violations) {
      msg += "\n  " + std::string(LayoutViolationName(v.kind)) + ": " + v.detail;
    }
    throw Error(msg);
  }
  if (scenario.entry.empty()) {
    built.entry = manifest.er.min;
  } else {
    auto it = manifest.symbols.find(scenario.entry);
    if (it == manifest.symbols.end()) throw UnknownLabel(scenario.entry);
    built.entry = it->second;
  }
  return built;
}

void RunLockstep(Machine& m, Monitor& monitor,
                 std::span<const ScenarioEvent> events, uint64_t max_cycles,
                 std::optional<uint64_t> stop_at, ExecutionTrace& trace) {
  auto record = [&](const BusSignals& s) {
    trace.push_back({s, monitor.Observe(s)});
  };
  size_t next_event = 0;
  while (m.cycle() < max_cycles) {
    if (stop_at && m.cycle() >= *stop_at) break;
    while (next_event < events.size() && events[next_event].cycle <= m.cycle()) {
      const auto& ev = events[next_event++];
      switch (ev.action) {
        case ScenarioEvent::Action::kRaiseIrq:
          m.RaiseIrq(ev.line);
          break;
        case ScenarioEvent::Action::kDmaWrite:
          m.InjectDma(ev.addr, ev.data);
          break;
        case ScenarioEvent::Action::kHostWrite:
          for (const auto& s : m.HostWrite(ev.addr, ev.data)) record(s);
          break;
      }
    }
    if (m.halted()) break;
    record(m.Step());
  }
}

Simulation Simulate(const Scenario& scenario) {
  Simulation sim{BuildScenario(scenario), {}, {}, {}};
  sim.machine = Machine(sim.built.linked.image, sim.built.entry);
  Monitor monitor(sim.built.cfg);
  RunLockstep(sim.machine, monitor, scenario.events, scenario.run_cycles,
              scenario.attest_at, sim.trace);
  sim.monitor = monitor.state();
  return sim;
}

std::optional<uint64_t> FirstExecFall(const ExecutionTrace& trace) {
  for (size_t i = 1; i < trace.size(); ++i) {
    if (ExecBit(trace[i - 1].monitor) && !ExecBit(trace[i].monitor)) {
      return trace[i].signals.cycle;
    }
  }
  return std::nullopt;
}

RunResult RunScenario(const Scenario& scenario, uint64_t seed,
                      const AttestKey& key) {
  RunResult result{Simulate(scenario), {}, {}, {}};
  const auto& sim = result.sim;
  VerifierSession verifier(key, sim.built.Expected());
  const Challenge chal = verifier.Issue(seed);
  result.report = Measure(sim.machine, sim.monitor, chal, key, sim.built.cfg);
  result.verdict = verifier.Verify(result.report);
  result.first_exec_fall = FirstExecFall(sim.trace);
  return result;
}

std::vector<ModeOutcome> Compare(const Scenario& scenario, uint64_t seed,
                                 const AttestKey& key) {
  std::vector<ModeOutcome> outcomes;
  for (Mode mode : {Mode::kApex, Mode::kAsap}) {
    Scenario variant = scenario;
    variant.mode = mode;
    const RunResult r = RunScenario(variant, seed, key);
    outcomes.push_back({mode, r.first_exec_fall, r.verdict});
  }
  return outcomes;
}

}  // namespace poxsim
