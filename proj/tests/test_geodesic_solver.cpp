#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "alegeo/geodesic_solver.hpp"

using namespace alegeo;

namespace {

SolverConfig small_config(double eps) {
  SolverConfig c;
  c.epsilon = eps;
  c.grid = {33, 33, -3.0, 5.0};
  return c;
}

double exact_gap(const PathGrid& g, double eps) {
  double m = 0.0;
  for (int i = 0; i < g.n_rho(); ++i)
    for (int j = 0; j < g.n_t(); ++j) {
      const double t = g.t()[j];
      m = std::max(m, std::abs(g.phi()(i, j) - 0.5 * eps * t * (t - 1.0)));
    }
  return m;
}

}  // namespace

TEST(ContinuitySchedule, GeometricAndValidated) {
  SolverConfig c;
  c.epsilon = 0.1;
  const auto s = continuity_schedule(c);
  EXPECT_EQ(s.front(), 1.0);
  EXPECT_EQ(s.back(), 0.1);
  for (std::size_t i = 1; i + 1 < s.size(); ++i) EXPECT_NEAR(s[i] / s[i - 1], 0.5, 1e-15);
  c.epsilon = 0.0;
  EXPECT_THROW(continuity_schedule(c), ValidationError);
  c.epsilon = 0.5;
  c.schedule = {1.0, 0.7, 0.8, 0.5};
  EXPECT_THROW(continuity_schedule(c), ValidationError);
  c.schedule = {0.9, 0.5};
  EXPECT_THROW(continuity_schedule(c), ValidationError);
}

TEST(ReducedOperator, MatchesAnalyticEvaluation) {
  // phi = a t (t - 1)(1 + b sin rho) with analytic derivatives; the discrete
  // operator must agree to second order at interior nodes.
  const auto bg = lebrun_profile(2, 1.0);
  const auto psi1 = logistic_potential(0.1, 2.0, 0.0);
  const double a = 0.2, b = 0.3, s = 0.4;
  double prev = 0.0;
  for (int n : {65, 129}) {
    PathGrid g(bg, zero_potential(), psi1, {n, n, -2.0, 4.0});
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double t = g.t()[j];
        g.phi()(i, j) = a * t * (t - 1.0) * (1.0 + b * std::sin(g.rho()[i]));
      }
    const auto G = reduced_residual(g, s, UpsilonMode::constant);
    double err = 0.0;
    for (int i = 1; i + 1 < n; i += 3)
      for (int j = 1; j + 1 < n; j += 3) {
        const double rho = g.rho()[i], t = g.t()[j];
        const auto u = bg.potential(rho);
        const auto p1 = psi1.eval(rho);
        const double w1 = u.d1 + t * p1[1] + a * t * (t - 1.0) * b * std::cos(rho);
        const double w2 = u.d2 + t * p1[2] - a * t * (t - 1.0) * b * std::sin(rho);
        const double ptt = 2.0 * a * (1.0 + b * std::sin(rho));
        const double x = p1[1] + a * (2.0 * t - 1.0) * b * std::cos(rho);
        const double ref = (u.d2 + t * p1[2] - p1[1] * p1[1]) * (u.d1 + t * p1[1]);
        const double exact = (ptt * w2 - x * x) * w1 - s * ref;
        err = std::max(err, std::abs(G(i, j) - exact) / (u.d1 * u.d2));
      }
    if (prev > 0.0) EXPECT_GT(prev / err, 3.0);
    prev = err;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Solver, ReproducesExactSolutionForTrivialData) {
  for (double eps : {1.0, 0.5, 0.1}) {
    const auto r = solve_epsilon_geodesic(lebrun_profile(2, 1.0), zero_potential(), zero_potential(),
                                          small_config(eps));
    EXPECT_LE(exact_gap(r.grid, eps), 1e-8) << eps;
    EXPECT_TRUE(r.report.c0.pass);
    EXPECT_EQ(r.grid.stage, eps);
  }
}

TEST(Solver, ConstantShiftOfDataKeepsExactSolution) {
  const auto r = solve_epsilon_geodesic(flat_profile(2), zero_potential(), constant_potential(0.3),
                                        [] {
                                          auto c = small_config(0.25);
                                          c.grid = {33, 33, 0.0, 6.0};
                                          return c;
                                        }());
  EXPECT_LE(exact_gap(r.grid, 0.25), 1e-8);
}

TEST(Solver, ConvergesOnNontrivialDataWithCertificate) {
  auto cfg = small_config(0.25);
  const auto r = solve_epsilon_geodesic(lebrun_profile(2, 1.0), zero_potential(), logistic_potential(0.1, 2.0, 0.0),
                                        cfg);
  const auto& rep = r.report;
  EXPECT_LE(rep.residual, std::max(cfg.newton_tol, rep.residual_floor));
  const auto G = reduced_residual(r.grid, 0.25, cfg.upsilon_mode, cfg.rhs_reference);
  EXPECT_NEAR(normalized_residual(r.grid, G), rep.residual, 1e-15);
  EXPECT_GT(rep.min_w1, 0.0);
  EXPECT_GT(rep.min_w2, 0.0);
  EXPECT_GT(rep.min_det, 0.0);
  EXPECT_TRUE(rep.c0.pass);
  ASSERT_GE(rep.stages.size(), 3u);
  EXPECT_EQ(rep.stages.front().s, 1.0);
  EXPECT_EQ(rep.stages.back().s, 0.25);
  for (std::size_t i = 1; i < rep.stages.size(); ++i) EXPECT_LT(rep.stages[i].s, rep.stages[i - 1].s);
  EXPECT_GT(rep.total_iterations, 0);
  EXPECT_GT(exact_gap(r.grid, 0.25), 1e-6);  // the data is really nontrivial
}

TEST(Solver, DeterministicBitForBit) {
  auto cfg = small_config(0.5);
  cfg.grid.rho_max = 6.0;
  const auto a = solve_epsilon_geodesic(lebrun_profile(3, 1.0), zero_potential(),
                                        logistic_potential(0.02, 2.0, 1.0), cfg);
  const auto b = solve_epsilon_geodesic(lebrun_profile(3, 1.0), zero_potential(),
                                        logistic_potential(0.02, 2.0, 1.0), cfg);
  EXPECT_TRUE((a.grid.phi().array() == b.grid.phi().array()).all());
}

TEST(Solver, BackgroundReferenceAndProfileWeightedModes) {
  auto cfg = small_config(0.25);
  cfg.rhs_reference = RhsReference::background;
  const auto bgd = solve_epsilon_geodesic(lebrun_profile(2, 1.0), zero_potential(),
                                          logistic_potential(0.1, 2.0, 0.0), cfg);
  EXPECT_TRUE(bgd.report.c0.pass);
  EXPECT_EQ(bgd.grid.rhs_reference, RhsReference::background);

  cfg = small_config(0.25);
  cfg.upsilon_mode = UpsilonMode::profile_weighted;
  const auto pw = solve_epsilon_geodesic(lebrun_profile(2, 1.0), logistic_potential(0.05, 2.0, 0.5),
                                         logistic_potential(0.1, 2.0, 0.0), cfg);
  EXPECT_TRUE(pw.report.c0.pass);
  EXPECT_GE(pw.report.upsilon_constant, 1.0);
}

// Comparison and the C0 sandwich as properties over random boundary data.
class RandomData : public ::testing::TestWithParam<int> {};

TEST_P(RandomData, SandwichAndOrderingHold) {
  std::mt19937 rng(static_cast<unsigned>(GetParam()));
  std::uniform_real_distribution<double> amp(-0.1, 0.1), ctr(-0.5, 0.5), rate(1.5, 2.5);
  const auto psi0 = logistic_potential(amp(rng), rate(rng), ctr(rng));
  const auto psi1 = logistic_potential(amp(rng), rate(rng), ctr(rng));
  const auto bg = lebrun_profile(2, 1.0);
  std::vector<PathGrid> grids;
  for (double eps : {0.5, 0.25, 0.125}) {
    auto cfg = small_config(eps);
    cfg.grid.rho_max = 6.0;
    const auto r = solve_epsilon_geodesic(bg, psi0, psi1, cfg);
    EXPECT_TRUE(c0_bound_check(r.grid).pass) << "eps " << eps;
    grids.push_back(r.grid);
  }
  for (std::size_t a = 0; a < grids.size(); ++a)
    for (std::size_t b = a + 1; b < grids.size(); ++b) {
      const auto c = comparison_check(grids[a], grids[b]);
      EXPECT_TRUE(c.pass) << a << " vs " << b << " excess " << c.max_excess;
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomData, ::testing::Values(1, 2, 3, 4));

TEST(Comparison, RejectsMismatchedInputs) {
  const auto bg = lebrun_profile(2, 1.0);
  const auto a = solve_epsilon_geodesic(bg, zero_potential(), zero_potential(), small_config(0.5));
  const auto b = solve_epsilon_geodesic(bg, zero_potential(), zero_potential(), small_config(0.25));
  EXPECT_TRUE(comparison_check(a.grid, b.grid).pass);
  EXPECT_THROW(comparison_check(b.grid, a.grid), ValidationError);
  auto cfg = small_config(0.25);
  cfg.grid.n_rho = 17;
  const auto c = solve_epsilon_geodesic(bg, zero_potential(), zero_potential(), cfg);
  EXPECT_THROW(comparison_check(a.grid, c.grid), ValidationError);
}

TEST(C0Check, DetectsViolation) {
  PathGrid g(flat_profile(2), zero_potential(), zero_potential(), {9, 9, 0.0, 4.0});
  g.set_constant_solution(0.5);
  EXPECT_TRUE(c0_bound_check(g).pass);
  g.phi()(3, 4) = 0.5;  // above the upper envelope 2 t (1 - t) - t (1 - t) / 2
  const auto c = c0_bound_check(g);
  EXPECT_FALSE(c.pass);
  EXPECT_EQ(c.worst_i, 3);
  EXPECT_EQ(c.worst_j, 4);
}

TEST(HessianProbe, ExactSolutionHasUnitBaseRatio) {
  PathGrid g(lebrun_profile(2, 1.0), zero_potential(), zero_potential(), {17, 17, -2.0, 3.0});
  g.set_constant_solution(0.5);
  const auto p = hessian_probe(g);
  // Phi_tt = 0.5 against Theta_Psi: the largest relative eigenvalue is 1.
  EXPECT_NEAR(p.relative, 1.0, 1e-12);
  EXPECT_NEAR(p.raw, 0.5, 1e-12);
}

TEST(BoundaryData, PositivityAndDecayPreconditions) {
  const auto bg = lebrun_profile(2, 1.0);
  auto cfg = small_config(0.5);
  try {
    solve_epsilon_geodesic(bg, exponential_potential(-5.0, 2.0, 0.0), zero_potential(), cfg);
    FAIL() << "non-positive data accepted";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "psi0");
  }
  cfg.gamma = 10.0;
  EXPECT_THROW(solve_epsilon_geodesic(bg, zero_potential(), logistic_potential(0.1, 1.0, 2.0), cfg),
               BoundaryInconsistency);
  EXPECT_THROW(PathGrid(bg, zero_potential(), zero_potential(), {3, 9, 0.0, 1.0}), ValidationError);
}

TEST(Solver, IterationCapRaisesNonConvergence) {
  auto cfg = small_config(0.5);
  cfg.rhs_reference = RhsReference::background;
  cfg.max_iters = 1;
  cfg.newton_tol = 1e-14;
  try {
    solve_epsilon_geodesic(lebrun_profile(2, 1.0), zero_potential(), logistic_potential(0.1, 2.0, 0.0), cfg);
    FAIL() << "expected a numerical failure";
  } catch (const NonConvergence& e) {
    EXPECT_EQ(e.stage(), 1.0);
    EXPECT_FALSE(e.residual_history().empty());
  }
}
