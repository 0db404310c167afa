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

#include "poxsim/ltl.h"

#include "poxsim/errors.h"

namespace poxsim::ltl {
namespace {

constexpr std::string_view kAtomNames[kAtomCount] = {
    "PC_in_ER", "PC_eq_ERmin", "PC_eq_ERmax",  "IRQ",      "W_IVT", "DMA_IVT",
    "W_ER",     "DMA_ER",      "W_OR_outside", "DMA_DATA", "W_OR",  "EXEC"};

bool SpanHits(uint32_t first, uint32_t len, uint32_t lo, uint32_t hi) {
  return len > 0 && first <= hi && first + len - 1 >= lo;
}

}  // namespace

std::string_view AtomName(Atom atom) {
  return kAtomNames[static_cast<size_t>(atom)];
}

Formula Formula::True() { return Formula(Node{Op::kTrue, Atom::kExec, {}, {}}); }
Formula Formula::Prop(Atom atom) { return Formula(Node{Op::kAtom, atom, {}, {}}); }

Formula Formula::Make(Op op, Formula lhs, std::optional<Formula> rhs) {
  Node node{op, Atom::kExec, std::make_shared<const Formula>(std::move(lhs)), {}};
  if (rhs) node.rhs = std::make_shared<const Formula>(std::move(*rhs));
  return Formula(std::move(node));
}

Formula operator!(Formula f) {
  return Formula::Make(Formula::Op::kNot, std::move(f), std::nullopt);
}

Formula operator&&(Formula a, Formula b) {
  return Formula::Make(Formula::Op::kAnd, std::move(a), std::move(b));
}

Formula operator||(Formula a, Formula b) {
  return Formula::Make(Formula::Op::kOr, std::move(a), std::move(b));
}

Formula Implies(Formula a, Formula b) {
  return Formula::Make(Formula::Op::kImplies, std::move(a), std::move(b));
}

Formula Next(Formula f) {
  return Formula::Make(Formula::Op::kNext, std::move(f), std::nullopt);
}

Formula Globally(Formula f) {
  return Formula::Make(Formula::Op::kGlobally, std::move(f), std::nullopt);
}

std::string Formula::ToString() const {
  switch (op()) {
    case Op::kTrue:
      return "true";
    case Op::kAtom:
      return std::string(AtomName(atom()));
    case Op::kNot:
      return "!" + lhs().ToString();
    case Op::kAnd:
      return "(" + lhs().ToString() + " & " + rhs().ToString() + ")";
    case Op::kOr:
      return "(" + lhs().ToString() + " | " + rhs().ToString() + ")";
    case Op::kImplies:
      return "(" + lhs().ToString() + " -> " + rhs().ToString() + ")";
    case Op::kNext:
      return "X " + lhs().ToString();
    case Op::kGlobally:
      return "G " + lhs().ToString();
  }
  return "?";
}

Trace Trace::FromExecution(std::span<const TraceRecord> records,
                           const MonitorConfig& cfg) {
  const uint32_t er_lo = cfg.er.min, er_hi = cfg.er.max;
  const uint32_t or_lo = cfg.out.min, or_hi = cfg.out.max;
  const uint32_t er_last_slot = cfg.er.max - 3u;
  std::vector<Valuation> steps;
  steps.reserve(records.size());
  for (const auto& rec : records) {
    const BusSignals& s = rec.signals;
    const uint32_t w_len = s.w_en ? (s.w_len == 0 ? 1 : s.w_len) : 0;
    const uint32_t d_len = s.dma_en ? 1 : 0;
    const bool in_er = s.pc >= er_lo && s.pc <= er_hi;
    const bool w_or = SpanHits(s.d_addr, w_len, or_lo, or_hi);
    const bool dma_or = SpanHits(s.dma_addr, d_len, or_lo, or_hi);

    Valuation v;
    auto set = [&](Atom a, bool value) { v[static_cast<size_t>(a)] = value; };
    set(Atom::kPcInEr, in_er);
    set(Atom::kPcEqErMin, s.pc == er_lo);
    set(Atom::kPcEqErMax, s.pc == er_last_slot);
    set(Atom::kIrq, s.irq);
    set(Atom::kWIvt, SpanHits(s.d_addr, w_len, 0xFFE0, 0xFFFF));
    set(Atom::kDmaIvt, SpanHits(s.dma_addr, d_len, 0xFFE0, 0xFFFF));
    set(Atom::kWEr, SpanHits(s.d_addr, w_len, er_lo, er_hi));
    set(Atom::kDmaEr, SpanHits(s.dma_addr, d_len, er_lo, er_hi));
    set(Atom::kWOrOutside, w_or && !in_er);
    set(Atom::kDmaData, SpanHits(s.dma_addr, d_len, 0x0200, 0x1FFF) || dma_or);
    set(Atom::kWOr, w_or || dma_or);
    set(Atom::kExec, rec.monitor.phase != Phase::kNotExec);
    steps.push_back(v);
  }
  return Trace(std::move(steps));
}

std::vector<bool> EvaluateAll(const Formula& f, const Trace& t) {
  const size_t n = t.size();
  std::vector<bool> out(n);
  switch (f.op()) {
    case Formula::Op::kTrue:
      out.assign(n, true);
      break;
    case Formula::Op::kAtom:
      for (size_t i = 0; i < n; ++i) out[i] = t.at(i, f.atom());
      break;
    case Formula::Op::kNot: {
      const auto a = EvaluateAll(f.lhs(), t);
      for (size_t i = 0; i < n; ++i) out[i] = !a[i];
      break;
    }
    case Formula::Op::kAnd:
    case Formula::Op::kOr:
    case Formula::Op::kImplies: {
      const auto a = EvaluateAll(f.lhs(), t);
      const auto b = EvaluateAll(f.rhs(), t);
      for (size_t i = 0; i < n; ++i) {
        out[i] = f.op() == Formula::Op::kAnd  ? (a[i] && b[i])
                 : f.op() == Formula::Op::kOr ? (a[i] || b[i])
                                              : (!a[i] || b[i]);
      }
      break;
    }
    case Formula::Op::kNext: {
      const auto a = EvaluateAll(f.lhs(), t);
      for (size_t i = 0; i < n; ++i) out[i] = i + 1 == n || a[i + 1];
      break;
    }
    case Formula::Op::kGlobally: {
      const auto a = EvaluateAll(f.lhs(), t);
      bool suffix = true;
      for (size_t i = n; i-- > 0;) {
        suffix = suffix && a[i];
        out[i] = suffix;
      }
      break;
    }
  }
  return out;
}

bool Eval(const Formula& f, const Trace& t, size_t i) {
  if (i >= t.size()) throw OutOfRange("trace index out of range");
  return EvaluateAll(f, t)[i];
}

CheckResult CheckGlobally(const Formula& f, const Trace& t) {
  if (f.op() != Formula::Op::kGlobally) {
    throw Error("NotAGlobally: formula is not G-rooted");
  }
  const auto body = EvaluateAll(f.lhs(), t);
  for (size_t i = 0; i < body.size(); ++i) {
    if (!body[i]) return {i};
  }
  return {};
}

Formula Ltl1() {
  const auto in_er = Formula::Prop(Atom::kPcInEr);
  const auto exec = Formula::Prop(Atom::kExec);
  return Globally(Implies(in_er && !Next(in_er),
                          Formula::Prop(Atom::kPcEqErMax) || !Next(exec)));
}

Formula Ltl2() {
  const auto in_er = Formula::Prop(Atom::kPcInEr);
  const auto exec = Formula::Prop(Atom::kExec);
  return Globally(Implies(!in_er && Next(in_er),
                          Next(Formula::Prop(Atom::kPcEqErMin)) || !Next(exec)));
}

Formula Ltl3() {
  return Globally(Implies(Formula::Prop(Atom::kPcInEr) && Formula::Prop(Atom::kIrq),
                          !Formula::Prop(Atom::kExec)));
}

Formula Ltl4() {
  return Globally(Implies(Formula::Prop(Atom::kDmaIvt) || Formula::Prop(Atom::kWIvt),
                          !Formula::Prop(Atom::kExec)));
}

std::vector<NamedFormula> FormulasFor(Mode mode) {
  std::vector<NamedFormula> set = {{"ltl1", Ltl1()}, {"ltl2", Ltl2()}};
  if (mode == Mode::kApex) set.push_back({"ltl3", Ltl3()});
  set.push_back({"ltl4", Ltl4()});
  return set;
}

std::optional<size_t> FindSpuriousZeroing(const Trace& t, Mode mode) {
  for (size_t i = 1; i < t.size(); ++i) {
    if (!t.at(i - 1, Atom::kExec) || t.at(i, Atom::kExec)) continue;
    const bool entry = !t.at(i - 1, Atom::kPcInEr) && t.at(i, Atom::kPcInEr) &&
                       !t.at(i, Atom::kPcEqErMin);
    const bool exit = t.at(i - 1, Atom::kPcInEr) && !t.at(i, Atom::kPcInEr) &&
                      !t.at(i - 1, Atom::kPcEqErMax);
    const bool irq = mode == Mode::kApex && t.at(i, Atom::kPcInEr) &&
                     t.at(i, Atom::kIrq);
    const bool ivt = t.at(i, Atom::kWIvt) || t.at(i, Atom::kDmaIvt);
    const bool er_write = t.at(i, Atom::kWEr) || t.at(i, Atom::kDmaEr);
    const bool data = t.at(i, Atom::kDmaData) || t.at(i, Atom::kWOrOutside) ||
                      t.at(i, Atom::kWOr);
    if (!(entry || exit || irq || ivt || er_write || data)) return i;
  }
  return std::nullopt;
}

std::optional<size_t> FindUnsoundRestart(const Trace& t) {
  for (size_t i = 0; i < t.size(); ++i) {
    const bool was = i > 0 && t.at(i - 1, Atom::kExec);
    if (!was && t.at(i, Atom::kExec) && !t.at(i, Atom::kPcEqErMin)) return i;
  }
  return std::nullopt;
}

}  // namespace poxsim::ltl
