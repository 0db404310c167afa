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

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "poxsim/errors.h"
#include "poxsim/scenario.h"
#include "support/random_case.h"

namespace poxsim::ltl {
namespace {

Valuation With(std::initializer_list<Atom> atoms) {
  Valuation v;
  for (Atom a : atoms) v.set(static_cast<size_t>(a));
  return v;
}

Trace ExecSequence(std::initializer_list<int> bits) {
  std::vector<Valuation> steps;
  for (int b : bits) steps.push_back(b ? With({Atom::kExec}) : Valuation{});
  return Trace(steps);
}

ExecutionTrace Golden(const std::string& name) {
  std::ifstream in(std::string(POXSIM_SCENARIO_DIR) + "/golden/" + name + ".csv");
  return ReadTraceCsv(in);
}

MonitorConfig CfgOf(const std::string& name) {
  return BuildScenario(Scenario::LoadFile(std::string(POXSIM_SCENARIO_DIR) + "/" + name + ".toml")).cfg;
}

const Formula kExec = Formula::Prop(Atom::kExec);

TEST(EvalTest, GloballyExecOnConstantTrace) {
  EXPECT_TRUE(Eval(Globally(kExec), ExecSequence({1, 1, 1, 1}), 0));
}

TEST(EvalTest, WeakNextAtEnd) {
  EXPECT_TRUE(Eval(Next(Formula::Prop(Atom::kIrq)), ExecSequence({0}), 0));
  EXPECT_FALSE(Eval(Next(kExec), ExecSequence({1, 0}), 0));
  EXPECT_TRUE(Eval(Next(kExec), ExecSequence({0, 1}), 0));
}

TEST(EvalTest, BooleanConnectives) {
  const Trace t(std::vector<Valuation>{With({Atom::kIrq})});
  const Formula irq = Formula::Prop(Atom::kIrq);
  EXPECT_TRUE(Eval(irq && !kExec, t, 0));
  EXPECT_TRUE(Eval(kExec || irq, t, 0));
  EXPECT_FALSE(Eval(Implies(irq, kExec), t, 0));
  EXPECT_TRUE(Eval(Implies(kExec, irq), t, 0));
  EXPECT_THROW(Eval(irq, t, 1), OutOfRange);
}

TEST(CheckTest, FirstViolationIndex) {
  const auto r = CheckGlobally(Globally(kExec), ExecSequence({1, 1, 0, 0}));
  ASSERT_FALSE(r.holds());
  EXPECT_EQ(*r.violated_at, 2u);
  EXPECT_TRUE(CheckGlobally(Globally(Formula::True()), ExecSequence({0, 1, 0})).holds());
  EXPECT_THROW(CheckGlobally(kExec, ExecSequence({1})), Error);
}

TEST(FormulaTest, PrintsCanonicalShapes) {
  EXPECT_EQ(Ltl1().ToString(),
            "G ((PC_in_ER & !X PC_in_ER) -> (PC_eq_ERmax | !X EXEC))");
  EXPECT_EQ(Ltl3().ToString(), "G ((PC_in_ER & IRQ) -> !EXEC)");
  EXPECT_EQ(FormulasFor(Mode::kApex).size(), 4u);
  EXPECT_EQ(FormulasFor(Mode::kAsap).size(), 3u);
}

TEST(FormulaTest, Ltl4FlagsIvtWriteWithExecSet) {
  std::vector<Valuation> steps(5, With({Atom::kExec}));
  steps[3].set(static_cast<size_t>(Atom::kWIvt));
  const auto r = CheckGlobally(Ltl4(), Trace(steps));
  ASSERT_FALSE(r.holds());
  EXPECT_EQ(*r.violated_at, 3u);
}

TEST(FormulaTest, Ltl2HoldsForEntryAtErMin) {
  const Trace t(std::vector<Valuation>{
      Valuation{},
      With({Atom::kPcInEr, Atom::kPcEqErMin, Atom::kExec}),
      With({Atom::kPcInEr, Atom::kExec})});
  EXPECT_TRUE(CheckGlobally(Ltl2(), t).holds());
  const Trace mid(std::vector<Valuation>{Valuation{}, With({Atom::kPcInEr, Atom::kExec})});
  EXPECT_FALSE(CheckGlobally(Ltl2(), mid).holds());
}

TEST(GoldenTraceTest, Fig5bSatisfiesLtl1) {
  const auto t = Trace::FromExecution(Golden("fig5b"), CfgOf("fig5b"));
  EXPECT_TRUE(CheckGlobally(Ltl1(), t).holds());
}

TEST(GoldenTraceTest, Fig5cSatisfiesLtl3) {
  const auto t = Trace::FromExecution(Golden("fig5c"), CfgOf("fig5c"));
  EXPECT_TRUE(CheckGlobally(Ltl3(), t).holds());
  // The same trace with EXEC held high at the irq cycle would not.
  auto steps = t.steps();
  for (auto& v : steps) v.set(static_cast<size_t>(Atom::kExec));
  EXPECT_FALSE(CheckGlobally(Ltl3(), Trace(steps)).holds());
}

TEST(GoldenTraceTest, Fig5aUnderApexFormulasWouldFail) {
  const auto t = Trace::FromExecution(Golden("fig5a"), CfgOf("fig5a"));
  EXPECT_FALSE(CheckGlobally(Ltl3(), t).holds());
  EXPECT_TRUE(CheckGlobally(Ltl1(), t).holds());
  EXPECT_TRUE(CheckGlobally(Ltl2(), t).holds());
  EXPECT_TRUE(CheckGlobally(Ltl4(), t).holds());
}

// Direct recursive semantics, used as a reference for EvaluateAll.
bool Naive(const Formula& f, const Trace& t, size_t i) {
  using Op = Formula::Op;
  switch (f.op()) {
    case Op::kTrue: return true;
    case Op::kAtom: return t.at(i, f.atom());
    case Op::kNot: return !Naive(f.lhs(), t, i);
    case Op::kAnd: return Naive(f.lhs(), t, i) && Naive(f.rhs(), t, i);
    case Op::kOr: return Naive(f.lhs(), t, i) || Naive(f.rhs(), t, i);
    case Op::kImplies: return !Naive(f.lhs(), t, i) || Naive(f.rhs(), t, i);
    case Op::kNext: return i + 1 >= t.size() || Naive(f.lhs(), t, i + 1);
    case Op::kGlobally:
      for (size_t j = i; j < t.size(); ++j) {
        if (!Naive(f.lhs(), t, j)) return false;
      }
      return true;
  }
  return false;
}

Formula RandomFormula(std::mt19937_64& rng, int depth) {
  if (depth == 0 || rng() % 4 == 0) {
    return rng() % 8 == 0 ? Formula::True() : Formula::Prop(static_cast<Atom>(rng() % 4));
  }
  switch (rng() % 6) {
    case 0: return !RandomFormula(rng, depth - 1);
    case 1: return RandomFormula(rng, depth - 1) && RandomFormula(rng, depth - 1);
    case 2: return RandomFormula(rng, depth - 1) || RandomFormula(rng, depth - 1);
    case 3: return Implies(RandomFormula(rng, depth - 1), RandomFormula(rng, depth - 1));
    case 4: return Next(RandomFormula(rng, depth - 1));
    default: return Globally(RandomFormula(rng, depth - 1));
  }
}

TEST(EvalPropertyTest, MemoizedEvaluationMatchesDirectSemantics) {
  std::mt19937_64 rng(31);
  for (int iter = 0; iter < 2000; ++iter) {
    const Formula f = RandomFormula(rng, 4);
    std::vector<Valuation> steps(1 + rng() % 12);
    for (auto& v : steps) v = Valuation(rng() & 0xF);
    const Trace t(steps);
    const auto all = EvaluateAll(f, t);
    ASSERT_EQ(all.size(), t.size());
    for (size_t i = 0; i < t.size(); ++i) {
      ASSERT_EQ(all[i], Naive(f, t, i)) << f.ToString() << " @" << i;
      ASSERT_EQ(Eval(f, t, i), all[i]);
    }
  }
}

TEST(DifferentialTest, MonitorTracesSatisfyModeFormulas) {
  std::mt19937_64 rng(2024);
  for (int iter = 0; iter < 2000; ++iter) {
    const auto c = poxsim::testing::GenerateCase(rng);
    for (Mode mode : {Mode::kApex, Mode::kAsap}) {
      auto cfg = c.cfg;
      cfg.mode = mode;
      const auto t = Trace::FromExecution(poxsim::testing::RunCase(c, mode), cfg);
      for (const auto& [name, f] : FormulasFor(mode)) {
        const auto r = CheckGlobally(f, t);
        ASSERT_TRUE(r.holds()) << name << " violated at " << *r.violated_at << " iter " << iter;
      }
      ASSERT_FALSE(FindSpuriousZeroing(t, mode).has_value()) << iter;
    }
  }
}

TEST(DifferentialTest, SpuriousZeroingIsDetected) {
  // EXEC falling with no trigger at that cycle is reported.
  const Trace t(std::vector<Valuation>{
      With({Atom::kPcInEr, Atom::kPcEqErMin, Atom::kExec}),
      With({Atom::kPcInEr}),
  });
  EXPECT_EQ(FindSpuriousZeroing(t, Mode::kAsap), 1u);
  const Trace rise(std::vector<Valuation>{Valuation{}, With({Atom::kPcInEr, Atom::kExec})});
  EXPECT_EQ(FindUnsoundRestart(rise), 1u);
}

}  // namespace
}  // namespace poxsim::ltl
