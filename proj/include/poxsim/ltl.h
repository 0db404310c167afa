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

// Finite-trace evaluator for a G/X fragment of LTL over per-cycle atoms,
// used as an oracle independent of the monitor FSM.
//
// Semantics on a trace of length n, at position i:
//   X f   holds iff i == n-1 (weak next) or f holds at i+1
//   G f   holds iff f holds at every j in [i, n)

#ifndef POXSIM_LTL_H_
#define POXSIM_LTL_H_

#include <bitset>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "poxsim/monitor.h"
#include "poxsim/trace.h"

namespace poxsim::ltl {

enum class Atom : uint8_t {
  kPcInEr,
  kPcEqErMin,
  kPcEqErMax,
  kIrq,
  kWIvt,
  kDmaIvt,
  kWEr,
  kDmaEr,
  kWOrOutside,
  kDmaData,  // DMA write to data memory or OR
  kWOr,      // any CPU or DMA write touching OR
  kExec,
};

inline constexpr int kAtomCount = 12;

std::string_view AtomName(Atom atom);

class Formula {
 public:
  enum class Op : uint8_t { kTrue, kAtom, kNot, kAnd, kOr, kImplies, kNext, kGlobally };

  static Formula True();
  static Formula Prop(Atom atom);

  Op op() const { return node_->op; }
  Atom atom() const { return node_->atom; }
  const Formula& lhs() const { return *node_->lhs; }
  const Formula& rhs() const { return *node_->rhs; }

  std::string ToString() const;

  friend Formula operator!(Formula f);
  friend Formula operator&&(Formula a, Formula b);
  friend Formula operator||(Formula a, Formula b);
  friend Formula Implies(Formula a, Formula b);
  friend Formula Next(Formula f);
  friend Formula Globally(Formula f);

 private:
  struct Node {
    Op op;
    Atom atom = Atom::kExec;
    std::shared_ptr<const Formula> lhs;
    std::shared_ptr<const Formula> rhs;
  };
  explicit Formula(Node node) : node_(std::make_shared<const Node>(std::move(node))) {}
  static Formula Make(Op op, Formula lhs, std::optional<Formula> rhs);

  std::shared_ptr<const Node> node_;
};

Formula operator!(Formula f);
Formula operator&&(Formula a, Formula b);
Formula operator||(Formula a, Formula b);
Formula Implies(Formula a, Formula b);
Formula Next(Formula f);
Formula Globally(Formula f);

using Valuation = std::bitset<kAtomCount>;

class Trace {
 public:
  Trace() = default;
  explicit Trace(std::vector<Valuation> steps) : steps_(std::move(steps)) {}

  // Derives atoms from recorded signals and EXEC under the given bounds.
  static Trace FromExecution(std::span<const TraceRecord> records,
                             const MonitorConfig& cfg);

  size_t size() const { return steps_.size(); }
  bool at(size_t i, Atom a) const { return steps_[i][static_cast<size_t>(a)]; }
  const std::vector<Valuation>& steps() const { return steps_; }

 private:
  std::vector<Valuation> steps_;
};

// Truth value of `f` at every position, computed right to left in
// O(len * |f|).
std::vector<bool> EvaluateAll(const Formula& f, const Trace& t);

// Requires i < t.size().
bool Eval(const Formula& f, const Trace& t, size_t i);

struct CheckResult {
  std::optional<size_t> violated_at;  // nullopt means Holds
  bool holds() const { return !violated_at.has_value(); }
};

// f must be Globally-rooted; throws Error (NotAGlobally) otherwise.
CheckResult CheckGlobally(const Formula& f, const Trace& t);

// Execution-integrity formulas over the atom vocabulary.
Formula Ltl1();  // exit only through ER's last instruction
Formula Ltl2();  // entry only through er_min
Formula Ltl3();  // no interrupt while in ER (APEX)
Formula Ltl4();  // no CPU or DMA write to the IVT

struct NamedFormula {
  std::string name;
  Formula formula;
};

// ltl1, ltl2, ltl4, plus ltl3 under APEX.
std::vector<NamedFormula> FormulasFor(Mode mode);

// First cycle where EXEC falls 1 -> 0 with none of the monitor's violation
// antecedents present, or nullopt.
std::optional<size_t> FindSpuriousZeroing(const Trace& t, Mode mode);

// First cycle where EXEC rises 0 -> 1 away from er_min, or nullopt.
std::optional<size_t> FindUnsoundRestart(const Trace& t);

}  // namespace poxsim::ltl

#endif  // POXSIM_LTL_H_
