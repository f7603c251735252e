#include <gtest/gtest.h>

#include <cmath>

#include "lagcut/error.hpp"
#include "lagcut/instances.hpp"
#include "lagcut/model.hpp"

using namespace lagcut;

namespace {

std::vector<SipInstance> tiny_suite(int count, std::uint64_t base_seed) {
  std::vector<SipInstance> out;
  for (int k = 0; k < count; ++k) {
    TinyParams p;
    p.seed = base_seed + k;
    p.n = 3 + k % 3;
    p.n_scenarios = 1 + k % 4;
    out.push_back(gen_tiny(p));
  }
  return out;
}

}  // namespace

TEST(Fixture, RecourseValuesByHand) {
  const auto t1 = make_fixture_t1();
  const std::vector<double> zero{0.0}, one{1.0};
  EXPECT_DOUBLE_EQ(eval_recourse(t1, 0, zero), 2.0);
  EXPECT_DOUBLE_EQ(eval_recourse(t1, 0, one), 0.0);
  EXPECT_DOUBLE_EQ(eval_recourse(t1, 1, zero), 3.0);
  EXPECT_DOUBLE_EQ(eval_recourse(t1, 1, one), 0.0);
}

TEST(ExtensiveForm, FixtureOptimumIsOne) {
  const auto t1 = make_fixture_t1();
  const auto ef = build_extensive_form(t1);
  EXPECT_EQ(ef.program.lp.num_cols(), 3);
  const auto out = solve_mip(ef.program);
  ASSERT_EQ(out.status, SolveStatus::Optimal);
  EXPECT_NEAR(out.objective, 1.0, 1e-9);
  EXPECT_NEAR(two_stage_objective(t1, out.primal), out.objective, 1e-9);
}

TEST(ExtensiveForm, EmptySecondStageEqualsFirstStage) {
  SipInstance inst;
  inst.n = 2;
  inst.first.A = SparseMatrix(1, 2, {{0, 0, 1.0}, {0, 1, 1.0}});
  inst.first.b = {1.0};
  inst.first.c = {3.0, 2.0};
  inst.first.types = {VarType::Binary, VarType::Binary};
  inst.first.lower = {0.0, 0.0};
  inst.first.upper = {1.0, 1.0};
  Scenario sc;
  sc.p = 1.0;
  sc.W = SparseMatrix(0, 0);
  sc.T = SparseMatrix(0, 2);
  inst.scenarios.push_back(sc);
  const auto ef = build_extensive_form(inst);
  EXPECT_EQ(ef.program.lp.num_cols(), 2);
  EXPECT_EQ(ef.program.lp.num_rows(), 1);
  EXPECT_EQ(ef.program.lp.objective, inst.first.c);
  EXPECT_NEAR(solve_mip(ef.program).objective, 2.0, 1e-12);
}

TEST(Validate, ProbabilitySum) {
  auto t1 = make_fixture_t1();
  t1.scenarios[0].p = 0.4;
  try {
    build_extensive_form(t1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ProbabilitySum);
  }
}

TEST(Validate, DimensionMismatchNamesScenario) {
  auto t1 = make_fixture_t1();
  t1.scenarios[1].h = {1.0, 2.0};
  try {
    build_extensive_form(t1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    EXPECT_NE(std::string(e.what()).find("scenario 1"), std::string::npos);
  }
}

TEST(Validate, BinaryNeedsUnitBounds) {
  auto t1 = make_fixture_t1();
  t1.first.upper = {2.0};
  EXPECT_THROW(t1.validate(), Error);
}

TEST(EvalRecourse, NonPositiveRhsGivesZero) {
  auto t1 = make_fixture_t1();
  // h - T x = 1 - 2 <= 0 with x = 1 once T = 2.
  t1.scenarios[0].T = SparseMatrix(1, 1, {{0, 0, 2.0}});
  EXPECT_DOUBLE_EQ(eval_recourse(t1, 0, std::vector<double>{1.0}), 0.0);
}

TEST(EvalRecourse, InfeasibleIsInfinity) {
  auto t1 = make_fixture_t1();
  t1.scenarios[0].upper = {0.0};
  EXPECT_EQ(eval_recourse(t1, 0, std::vector<double>{0.0}), kInf);
}

TEST(EvalRecourse, UnboundedIsDistinctError) {
  auto t1 = make_fixture_t1();
  t1.scenarios[0].q = {-1.0};
  try {
    eval_recourse(t1, 0, std::vector<double>{0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnboundedRecourse);
  }
}

TEST(BruteForce, FixtureEpigraph) {
  const auto t1 = make_fixture_t1();
  const auto pts = brute_force_epigraph(t1, 0, 16);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0].x, std::vector<double>{0.0});
  EXPECT_DOUBLE_EQ(pts[0].theta, 2.0);
  EXPECT_EQ(pts[1].x, std::vector<double>{1.0});
  EXPECT_DOUBLE_EQ(pts[1].theta, 0.0);
}

TEST(BruteForce, CapExceeded) {
  const auto t1 = make_fixture_t1();
  try {
    brute_force_epigraph(t1, 0, 1);
    FAIL();
  } catch (const CapExceededError& e) {
    EXPECT_EQ(e.code(), ErrorCode::CapExceeded);
    EXPECT_EQ(e.found(), 2u);
  }
}

TEST(BruteForce, InfeasibleFirstStageIsEmpty) {
  auto t1 = make_fixture_t1();
  t1.first.A = SparseMatrix(1, 1, {{0, 0, 1.0}});
  t1.first.b = {2.0};
  EXPECT_TRUE(brute_force_epigraph(t1, 0, 16).empty());
}

TEST(ModelProperty, RecourseMatchesExtensiveFormWithFixedX) {
  for (const auto& inst : tiny_suite(12, 300)) {
    const auto xs = enumerate_first_stage(inst, 64);
    for (const auto& x : xs) {
      auto ef = build_extensive_form(inst);
      for (int j = 0; j < inst.n; ++j) ef.program.lp.lower[j] = ef.program.lp.upper[j] = x[j];
      const auto out = solve_mip(ef.program);
      ASSERT_EQ(out.status, SolveStatus::Optimal);
      double expected = 0.0;
      for (int j = 0; j < inst.n; ++j) expected += inst.first.c[j] * x[j];
      for (int s = 0; s < inst.num_scenarios(); ++s) {
        expected += inst.scenarios[s].p * eval_recourse(inst, s, x);
      }
      EXPECT_NEAR(out.objective, expected, 1e-7) << inst.name;
      EXPECT_NEAR(two_stage_objective(inst, out.primal), out.objective, 1e-9);
    }
  }
}

TEST(ModelProperty, RecourseNonincreasingWhenRhsRelaxed) {
  Rng rng(17);
  for (const auto& inst : tiny_suite(10, 400)) {
    const auto xs = enumerate_first_stage(inst, 64);
    for (int s = 0; s < inst.num_scenarios(); ++s) {
      auto relaxed = inst;
      for (auto& h : relaxed.scenarios[s].h) h -= static_cast<double>(rng.uniform_int(0, 2));
      for (const auto& x : xs) {
        EXPECT_LE(eval_recourse(relaxed, s, x), eval_recourse(inst, s, x) + 1e-9);
      }
    }
  }
}

TEST(ModelProperty, EnumerationMatchesExtensiveFormOptimum) {
  for (const auto& inst : tiny_suite(8, 500)) {
    double best = kInf;
    for (const auto& x : enumerate_first_stage(inst, 64)) {
      double v = 0.0;
      for (int j = 0; j < inst.n; ++j) v += inst.first.c[j] * x[j];
      for (int s = 0; s < inst.num_scenarios(); ++s) {
        v += inst.scenarios[s].p * eval_recourse(inst, s, x);
      }
      best = std::min(best, v);
    }
    const auto out = solve_mip(build_extensive_form(inst).program);
    ASSERT_EQ(out.status, SolveStatus::Optimal);
    EXPECT_NEAR(out.objective, best, 1e-7) << inst.name;
  }
}
