#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "lagcut/error.hpp"
#include "lagcut/instances.hpp"
#include "lagcut/lagrangian.hpp"
#include "support/oracles.hpp"

using namespace lagcut;

namespace {

std::vector<SipInstance> small_suite() {
  std::vector<SipInstance> out;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    TinyParams p;
    p.seed = 200 + seed;
    p.n = 3 + static_cast<int>(seed % 2);
    p.n_scenarios = 2;
    out.push_back(gen_tiny(p));
  }
  return out;
}

std::vector<double> random_point(Rng& rng, int n) {
  std::vector<double> x(n);
  for (auto& v : x) v = static_cast<double>(rng.uniform_int(0, 4)) / 4.0;
  return x;
}

// Two distinct nonzero Benders coefficient vectors, or unit vectors.
std::vector<std::vector<double>> two_vector_basis(const SipInstance& inst, int s, Rng& rng) {
  std::vector<std::vector<double>> basis;
  for (int attempt = 0; attempt < 20 && basis.size() < 2; ++attempt) {
    auto v = benders_cut_at(inst, s, random_point(rng, inst.n)).cut.coef_x;
    const bool zero = std::all_of(v.begin(), v.end(), [](double a) { return a == 0.0; });
    if (!zero && (basis.empty() || basis[0] != v)) basis.push_back(v);
  }
  for (int i = 0; basis.size() < 2; ++i) {
    std::vector<double> e(inst.n, 0.0);
    e[i] = 1.0;
    if (basis.empty() || basis[0] != e) basis.push_back(e);
  }
  return basis;
}

}  // namespace

TEST(Qbar, FixtureValues) {
  const auto t1 = make_fixture_t1();
  const auto a = eval_qbar(t1, 0, std::vector<double>{0.0}, 1.0);
  EXPECT_NEAR(a.value, 0.0, 1e-9);
  EXPECT_NEAR(a.x[0], 1.0, 1e-9);
  EXPECT_NEAR(a.recourse_cost, 0.0, 1e-9);
  const auto b = eval_qbar(t1, 0, std::vector<double>{1.0}, 1.0);
  EXPECT_NEAR(b.value, 1.0, 1e-9);
  EXPECT_THROW(eval_qbar(t1, 0, std::vector<double>{1.0}, -1.0), Error);
}

TEST(Qbar, SupergradientIsTightAtTheArgmin) {
  for (const auto& inst : small_suite()) {
    Rng rng(3);
    for (int s = 0; s < inst.num_scenarios(); ++s) {
      const auto epi = brute_force_epigraph(inst, s, 64);
      for (int k = 0; k < 10; ++k) {
        std::vector<double> pi(inst.n);
        for (auto& v : pi) v = rng.uniform_int(-10, 10) / 5.0;
        const double pi0 = rng.uniform_int(0, 10) / 5.0;
        const auto r = eval_qbar(inst, s, pi, pi0);
        EXPECT_NEAR(r.value, oracle::qbar(epi, pi, pi0), 1e-7);
        EXPECT_NEAR(r.value, oracle::dot(pi, r.x) + pi0 * r.recourse_cost, 1e-7);
      }
    }
  }
}

TEST(Qbar, InfeasibleScenarioIsReported) {
  auto t1 = make_fixture_t1();
  t1.scenarios[0].upper = {0.0};
  t1.scenarios[0].h = {2.0};
  try {
    eval_qbar(t1, 0, std::vector<double>{0.0}, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ScenarioInfeasible);
  }
}

TEST(QbarProperty, PositiveHomogeneity) {
  for (const auto& inst : small_suite()) {
    Rng rng(17);
    for (int s = 0; s < inst.num_scenarios(); ++s) {
      for (int k = 0; k < 8; ++k) {
        std::vector<double> pi(inst.n);
        for (auto& v : pi) v = rng.uniform_int(-20, 20) / 7.0;
        const double pi0 = rng.uniform_int(0, 20) / 7.0;
        const double base = eval_qbar(inst, s, pi, pi0).value;
        for (double t : {0.5, 2.0, 10.0}) {
          std::vector<double> scaled(pi);
          for (auto& v : scaled) v *= t;
          const double val = eval_qbar(inst, s, scaled, t * pi0).value;
          EXPECT_NEAR(val, t * base, 1e-6 * (1.0 + std::fabs(t * base)));
        }
      }
    }
  }
}

TEST(QstarModel, Examples) {
  EpigraphPool pool;
  EXPECT_THROW(eval_qstar_model(pool, std::vector<double>{1.0}, 1.0), Error);
  pool.add(std::vector<double>{1.0}, 0.0);
  EXPECT_DOUBLE_EQ(eval_qstar_model(pool, std::vector<double>{1.0}, 1.0), 1.0);
  pool.add(std::vector<double>{0.0}, 2.0);
  EXPECT_DOUBLE_EQ(eval_qstar_model(pool, std::vector<double>{0.0}, 1.0), 0.0);
}

TEST(QstarModel, PoolKeepsSmallestThetaPerPoint) {
  EpigraphPool pool;
  EXPECT_TRUE(pool.add(std::vector<double>{1.0, 0.0}, 3.0));
  EXPECT_FALSE(pool.add(std::vector<double>{1.0, 0.0}, 4.0));
  EXPECT_TRUE(pool.add(std::vector<double>{1.0 + 1e-12, 0.0}, 2.0));
  EXPECT_EQ(pool.size(), 1u);
  EXPECT_DOUBLE_EQ(pool.points()[0].theta, 2.0);
}

TEST(QstarModel, InitialPoolHoldsPerfectInformationSolution) {
  const auto t1 = make_fixture_t1();
  const auto pool = init_epigraph_pool(t1, 0);
  ASSERT_FALSE(pool.empty());
  // min { x + 2y : y >= 1 - x } has its optimum at x = 1, y = 0.
  EXPECT_NEAR(eval_qstar_model(pool, t1.first.c, 1.0), 1.0, 1e-9);
}

TEST(QstarProperty, OverestimateTightnessAndMonotonePool) {
  for (const auto& inst : small_suite()) {
    Rng rng(23);
    for (int s = 0; s < inst.num_scenarios(); ++s) {
      auto pool = init_epigraph_pool(inst, s);
      std::vector<double> probe_pi(inst.n, 1.0);
      double probe = eval_qstar_model(pool, probe_pi, 0.5);
      std::size_t size = pool.size();
      for (int k = 0; k < 30; ++k) {
        std::vector<double> pi(inst.n);
        for (auto& v : pi) v = rng.uniform_int(-10, 10) / 3.0;
        const double pi0 = rng.uniform_int(0, 12) / 4.0;
        const auto r = eval_qbar(inst, s, pi, pi0, &pool);
        EXPECT_NEAR(eval_qstar_model(pool, pi, pi0), r.value, 1e-7);
        EXPECT_GE(pool.size(), size);
        size = pool.size();
        const double now = eval_qstar_model(pool, probe_pi, 0.5);
        EXPECT_LE(now, probe + 1e-12);
        probe = now;
        std::vector<double> other(inst.n);
        for (auto& v : other) v = rng.uniform_int(-10, 10) / 3.0;
        const double other0 = rng.uniform_int(0, 12) / 4.0;
        EXPECT_GE(eval_qstar_model(pool, other, other0),
                  eval_qbar(inst, s, other, other0).value - 1e-7);
      }
      for (const auto& pt : pool.points()) {
        EXPECT_GE(pt.theta, eval_recourse(inst, s, pt.x) - 1e-6);
      }
    }
  }
}

TEST(Normalization, BasisIsLatestDistinctMostRecentFirst) {
  const std::vector<std::vector<double>> hist{{1.0}, {2.0}, {3.0}, {3.0}};
  const auto spec = build_normalization(NormKind::SpanPiNorm, hist, 2, 0.1);
  ASSERT_EQ(spec.basis.size(), 2u);
  EXPECT_EQ(spec.basis[0], std::vector<double>{3.0});
  EXPECT_EQ(spec.basis[1], std::vector<double>{2.0});
  EXPECT_DOUBLE_EQ(spec.alpha, 0.1);
  EXPECT_EQ(build_normalization(NormKind::SpanLambdaNorm, hist, 20, 1.0).basis.size(), 3u);
  EXPECT_TRUE(build_normalization(NormKind::ExactBall, hist, 2, 1.0).basis.empty());
  EXPECT_THROW(build_normalization(NormKind::ExactBall, hist, 2, 0.0), Error);
}

TEST(Separation, NoCutAtEpigraphPoint) {
  for (const auto& inst : small_suite()) {
    for (int s = 0; s < inst.num_scenarios(); ++s) {
      auto pool = init_epigraph_pool(inst, s);
      for (const auto& pt : brute_force_epigraph(inst, s, 64)) {
        NormalizationSpec spec;
        SeparationOptions opt;
        opt.delta = 0.0;
        EXPECT_FALSE(separate_restricted(inst, s, pt.x, pt.theta, spec, pool, opt).has_value());
      }
    }
  }
}

TEST(Separation, FixtureMatchesGrid) {
  const auto t1 = make_fixture_t1();
  const auto epi = brute_force_epigraph(t1, 0, 8);
  const std::vector<double> x_hat{0.5};
  // On the boundary alpha*pi0 + |pi| = 1 with |pi| <= 1.
  double grid = 0.0;
  for (int a = -1000; a <= 1000; ++a) {
    const std::vector<double> pi{a * 1e-3};
    const double pi0 = 1.0 - std::fabs(pi[0]);
    grid = std::max(grid, oracle::violation(epi, pi, pi0, x_hat, 0.0));
  }
  ASSERT_GT(grid, 0.0);
  for (double delta : {0.0, 0.5}) {
    auto pool = init_epigraph_pool(t1, 0);
    SeparationOptions opt;
    opt.delta = delta;
    const auto res = separate_restricted(t1, 0, x_hat, 0.0, NormalizationSpec{}, pool, opt);
    ASSERT_TRUE(res.has_value());
    EXPECT_GE(res->violation, (1.0 - delta) * grid - 1e-9);
    EXPECT_NEAR(res->violation, oracle::violation(epi, res->pi, res->pi0, x_hat, 0.0), 1e-9);
    EXPECT_LE(res->violation, res->upper_bound + 1e-9);
    if (delta == 0.0) EXPECT_NEAR(res->violation, grid, 1e-3);
    EXPECT_GE(res->pi0, 0.0);
    EXPECT_LE(res->pi0 + std::fabs(res->pi[0]), 1.0 + 1e-9);
  }
}

TEST(SeparationProperty, DeltaQualityOnTwoVectorBases) {
  for (const auto& inst : small_suite()) {
    Rng rng(41);
    for (int s = 0; s < inst.num_scenarios(); ++s) {
      const auto epi = brute_force_epigraph(inst, s, 64);
      const double lower = compute_theta_lower_bound(inst, s);
      for (int trial = 0; trial < 3; ++trial) {
        const auto basis = two_vector_basis(inst, s, rng);
        const auto x_hat = random_point(rng, inst.n);
        const double theta_hat = lower + rng.uniform_int(0, 8) / 2.0;
        for (NormKind kind : {NormKind::SpanLambdaNorm, NormKind::SpanPiNorm}) {
          NormalizationSpec spec{kind, basis, 1.0};
          const double grid =
              oracle::grid_max_two_basis(epi, basis, kind, 1.0, x_hat, theta_hat, 0.01);
          for (double delta : {0.0, 0.1, 0.5}) {
            auto pool = init_epigraph_pool(inst, s);
            SeparationOptions opt;
            opt.delta = delta;
            const auto res = separate_restricted(inst, s, x_hat, theta_hat, spec, pool, opt);
            const double got = res ? res->violation : 0.0;
            EXPECT_GE(got, (1.0 - delta) * grid - 1e-7)
                << inst.name << " s=" << s << " kind=" << to_string(kind) << " delta=" << delta;
            if (!res) continue;
            EXPECT_FALSE(res->limit_reached);
            EXPECT_NEAR(got, oracle::violation(epi, res->pi, res->pi0, x_hat, theta_hat), 1e-7);
            EXPECT_GE(oracle::min_slack(res->to_cut(s, 0), epi), -1e-7);
          }
        }
      }
    }
  }
}

TEST(SeparationProperty, ExactBallCutsAreValid) {
  for (const auto& inst : small_suite()) {
    Rng rng(5);
    for (int s = 0; s < inst.num_scenarios(); ++s) {
      const auto epi = brute_force_epigraph(inst, s, 64);
      auto pool = init_epigraph_pool(inst, s);
      for (int trial = 0; trial < 4; ++trial) {
        const auto x_hat = random_point(rng, inst.n);
        const double theta_hat = compute_theta_lower_bound(inst, s);
        NormalizationSpec spec;
        spec.alpha = 0.5;
        SeparationOptions opt;
        opt.delta = 0.0;
        const auto res = separate_restricted(inst, s, x_hat, theta_hat, spec, pool, opt);
        if (!res) continue;
        EXPECT_GT(res->violation, 0.0);
        EXPECT_GE(oracle::min_slack(res->to_cut(s, 0), epi), -1e-7);
        std::ostringstream os;
        write_separation_trace(*res, os);
        EXPECT_EQ(os.str().substr(0, 22), "oracle_call,upper,lowe");
        EXPECT_EQ(res->trace.size(), static_cast<std::size_t>(res->oracle_calls));
      }
    }
  }
}

TEST(Separation, OracleBudgetFlagsLimit) {
  const auto inst = small_suite()[1];
  auto pool = init_epigraph_pool(inst, 0);
  SeparationOptions opt;
  opt.delta = 0.0;
  opt.max_oracle_calls = 1;
  const std::vector<double> x_hat(inst.n, 0.5);
  const auto res = separate_restricted(inst, 0, x_hat, compute_theta_lower_bound(inst, 0),
                                       NormalizationSpec{}, pool, opt);
  if (res) {
    EXPECT_LE(res->oracle_calls, 1);
    if (res->upper_bound - res->violation > 1e-6) EXPECT_TRUE(res->limit_reached);
  }
}

TEST(Separation, RejectsBadArguments) {
  const auto t1 = make_fixture_t1();
  auto pool = init_epigraph_pool(t1, 0);
  const std::vector<double> x{0.5};
  SeparationOptions opt;
  opt.delta = 1.0;
  EXPECT_THROW(separate_restricted(t1, 0, x, 0.0, NormalizationSpec{}, pool, opt), Error);
  NormalizationSpec empty_span{NormKind::SpanPiNorm, {}, 1.0};
  EXPECT_THROW(separate_restricted(t1, 0, x, 0.0, empty_span, pool), Error);
  EpigraphPool none;
  EXPECT_THROW(separate_restricted(t1, 0, x, 0.0, NormalizationSpec{}, none), Error);
}

TEST(BasisSelection, FixtureMatchesGrid) {
  EpigraphPool pool;
  pool.add(std::vector<double>{0.0}, 2.0);
  pool.add(std::vector<double>{1.0}, 0.0);
  const std::vector<std::vector<double>> cand{{2.0}};
  const std::vector<double> x_hat{0.5};
  const auto sel = select_basis_mip(pool, cand, x_hat, 0.0, 1, 1.0);
  double grid = 0.0;
  for (int a = -1000; a <= 1000; ++a) {
    const double lam = a * 1e-3;
    const double pi0 = 1.0 - std::fabs(lam);
    const double q = std::min(2.0 * pi0, 2.0 * lam);
    grid = std::max(grid, q - 2.0 * lam * 0.5);
  }
  EXPECT_NEAR(sel.ub, 0.5, 1e-7);
  EXPECT_NEAR(sel.ub, grid, 1e-3);
  EXPECT_GE(sel.ub, grid - 1e-9);
  ASSERT_EQ(sel.basis.size(), 1u);
  EXPECT_EQ(sel.basis[0], cand[0]);
}

TEST(BasisSelection, SlackCardinalityMatchesLambdaNormModel) {
  for (const auto& inst : small_suite()) {
    Rng rng(8);
    const int s = 0;
    auto pool = init_epigraph_pool(inst, s);
    for (int k = 0; k < 5; ++k) {
      std::vector<double> pi(inst.n);
      for (auto& v : pi) v = rng.uniform_int(-5, 5);
      eval_qbar(inst, s, pi, 1.0, &pool);
    }
    const auto basis = two_vector_basis(inst, s, rng);
    const auto x_hat = random_point(rng, inst.n);
    const double theta_hat = compute_theta_lower_bound(inst, s);
    const auto sel = select_basis_mip(pool, basis, x_hat, theta_hat, 2, 1.0);
    // The pool model over the lambda-norm set, evaluated on a grid.
    const double grid = oracle::grid_max_two_basis(pool.points(), basis, NormKind::SpanLambdaNorm,
                                                   1.0, x_hat, theta_hat, 0.005);
    EXPECT_GE(sel.ub, grid - 1e-7);
    EXPECT_LE(sel.ub, grid + 0.05 * (1.0 + std::fabs(grid)));
    EXPECT_FALSE(sel.limit_reached);
  }
}

TEST(BasisSelection, NothingPredictedAtEpigraphPoint) {
  const auto t1 = make_fixture_t1();
  auto pool = init_epigraph_pool(t1, 0);
  pool.add(std::vector<double>{0.0}, 2.0);
  const auto sel = select_basis_mip(pool, {{2.0}, {0.0}, {2.0}}, std::vector<double>{0.0}, 2.0,
                                    2, 1.0);
  EXPECT_LE(sel.ub, 1e-9);
  EXPECT_TRUE(select_basis_mip(pool, {{0.0}}, std::vector<double>{0.0}, 0.0, 1, 1.0).basis.empty());
}

TEST(StrengthenedBenders, FixtureCut) {
  const auto t1 = make_fixture_t1();
  const auto bc = separate_benders(t1, 0, std::vector<double>{0.0}, 0.0);
  ASSERT_TRUE(bc.has_value());
  const auto sb = strengthen_benders(t1, 0, bc->cut, nullptr);
  EXPECT_EQ(sb.family, CutFamily::StrengthenedBenders);
  EXPECT_DOUBLE_EQ(sb.coef_x[0], 2.0);
  EXPECT_DOUBLE_EQ(sb.coef_theta, 1.0);
  EXPECT_NEAR(sb.rhs, 2.0, 1e-9);
}

TEST(StrengthenedBenders, NeverWeakerAndValid) {
  bool strict = false;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    TinyParams p;
    p.seed = 300 + seed;
    const auto inst = gen_tiny(p);
    Rng rng(seed);
    for (int s = 0; s < inst.num_scenarios(); ++s) {
      const auto epi = brute_force_epigraph(inst, s, 64);
      for (int k = 0; k < 4; ++k) {
        const auto bc = benders_cut_at(inst, s, random_point(rng, inst.n));
        const auto sb = strengthen_benders(inst, s, bc.cut, nullptr);
        EXPECT_EQ(sb.coef_x, bc.cut.coef_x);
        EXPECT_GE(sb.rhs, bc.cut.rhs - 1e-7);
        if (sb.rhs > bc.cut.rhs + 1e-7) strict = true;
        EXPECT_GE(oracle::min_slack(sb, epi), -1e-7);
      }
    }
  }
  EXPECT_TRUE(strict);
}

TEST(StrengthenedBenders, NoGainWithContinuousRecourse) {
  TinyParams p;
  p.integer_recourse = false;
  p.cardinality = false;
  p.seed = 9;
  auto inst = gen_tiny(p);
  // Relax the first stage too, so Qbar is an LP value.
  for (auto& t : inst.first.types) t = VarType::Continuous;
  Rng rng(2);
  for (int s = 0; s < inst.num_scenarios(); ++s) {
    for (int k = 0; k < 4; ++k) {
      const auto bc = benders_cut_at(inst, s, random_point(rng, inst.n));
      const auto sb = strengthen_benders(inst, s, bc.cut, nullptr);
      EXPECT_NEAR(sb.rhs, bc.cut.rhs, 1e-7);
    }
  }
}

TEST(FeasibilityCut, ExcludesInfeasibleFirstStage) {
  // y >= x with y fixed to 0: only x = 0 admits a second stage.
  SipInstance inst;
  inst.name = "forced";
  inst.n = 1;
  inst.first.A = SparseMatrix(0, 1);
  inst.first.c = {0.0};
  inst.first.types = {VarType::Binary};
  inst.first.lower = {0.0};
  inst.first.upper = {1.0};
  Scenario sc;
  sc.p = 1.0;
  sc.q = {1.0};
  sc.W = SparseMatrix(1, 1, {{0, 0, 1.0}});
  sc.T = SparseMatrix(1, 1, {{0, 0, -1.0}});
  sc.h = {0.0};
  sc.types = {VarType::Integer};
  sc.lower = {0.0};
  sc.upper = {0.0};
  inst.scenarios.push_back(sc);
  inst.validate();
  const auto cut = separate_feasibility(inst, 0, std::vector<double>{1.0}, std::vector<double>{-1.0});
  ASSERT_TRUE(cut.has_value());
  EXPECT_EQ(cut->family, CutFamily::LagrangianFeasibility);
  EXPECT_DOUBLE_EQ(cut->coef_theta, 0.0);
  EXPECT_LT(cut->lhs(std::vector<double>{1.0}, 0.0), cut->rhs);
  EXPECT_GE(cut->lhs(std::vector<double>{0.0}, 0.0), cut->rhs);
  EXPECT_FALSE(
      separate_feasibility(inst, 0, std::vector<double>{0.0}, std::vector<double>{-1.0}).has_value());
  const auto zero = separate_feasibility(inst, 0, std::vector<double>{1.0}, std::vector<double>{0.0});
  EXPECT_FALSE(zero.has_value());
}

TEST(FeasibilityCut, CompleteRecourseReducesToLinearMinimum) {
  // Without first-stage rows every binary x has a second stage, so no
  // slack pays off and the bound is the plain minimum of lambda^T x.
  TinyParams p;
  p.cardinality = false;
  p.seed = 12;
  const auto inst = gen_tiny(p);
  Rng rng(4);
  for (int k = 0; k < 6; ++k) {
    std::vector<double> lambda(inst.n);
    for (auto& v : lambda) v = rng.uniform_int(-3, 3);
    double best = kInf;
    for (const auto& x : enumerate_first_stage(inst, 64)) best = std::min(best, oracle::dot(lambda, x));
    const auto x_hat = random_point(rng, inst.n);
    const auto cut = separate_feasibility(inst, 0, x_hat, lambda);
    if (oracle::dot(lambda, x_hat) < best - 1e-6 * (1.0 + std::fabs(best))) {
      ASSERT_TRUE(cut.has_value());
      EXPECT_NEAR(cut->rhs, best, 1e-9);
    } else {
      EXPECT_FALSE(cut.has_value());
    }
  }
}
