#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "common.hpp"

using namespace monovi;
using namespace fixtures;

namespace {

ViTolerances fb_only(double stat = 1e-10) {
  ViTolerances t;
  t.stat = stat;
  t.fast_path = false;
  return t;
}

double sup_against(const NodalField& u, const std::vector<double>& ref) {
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) d = std::max(d, std::abs(u[i] - ref[i]));
  return d;
}

}  // namespace

TEST(SolveVi, QuadraticExactOnUniformMesh) {
  const auto P = problem(line(200), {PiecewiseFunction::constant(1.0), {}});
  const auto zero = zero_field(P.mesh());
  for (const ViTolerances& t : {ViTolerances{}, fb_only(1e-12)}) {
    const auto sol = solve_vi(P, zero, zero, t);
    double err = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i) {
      const double x = P.mesh().nodes()[i][0];
      err = std::max(err, std::abs(sol.u[i] - 0.5 * x * (1 - x)));
    }
    EXPECT_LE(err, 1e-10) << to_string(sol.method);
    EXPECT_TRUE(satisfies_dirichlet(P.mesh(), sol.u));
  }
}

TEST(SolveVi, ZeroLoadGivesZero) {
  const auto P = problem(line(50), {PiecewiseFunction::constant(0.0), PiecewiseFunction(PiecewiseSpec{0.0, {}, {1.0}, {Jump{0.3, 2.0}}})});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  NodalField init(P.size());
  for (auto& v : init) v = d(rng);
  for (const ViTolerances& t : {ViTolerances{}, fb_only()}) {
    const auto sol = solve_vi_load(P, NodalField(P.size(), 0.0), init, t);
    EXPECT_LE(sup_norm(sol.u), 1e-9);
  }
}

TEST(SolveVi, HeavisideBenchmarkMatchesRelaxationOracle) {
  const auto d = heaviside_split();
  const auto P = problem(line(200), d);
  const auto sol = solve_vi(P, zero_field(P.mesh()), zero_field(P.mesh()));
  const auto op = oracle_problem(d, 800);
  const auto fine = oracle::relax_frozen(op, std::vector<double>(801, 1.0), std::vector<double>(801, 0.0));
  EXPECT_LE(sup_against(sol.u, oracle::restrict_nodes(fine, 4)), 1e-3);
}

TEST(SolveVi, ActiveJumpMatchesRelaxationOracle) {
  // Load large enough that u crosses the jump of h at 0.1 and sticks there.
  const auto d = plateau_split();
  const auto P = problem(line(100), d);
  const NodalField z(P.size(), 0.2);  // g(0.2) = 1.8
  const auto sol = solve_vi(P, z, zero_field(P.mesh()), ViTolerances{1e-12});
  const auto op = oracle_problem(d, 100);
  std::vector<double> load(101, d.g.right(0.2));
  const auto same = oracle::relax_frozen(op, load, std::vector<double>(101, 0.0));
  EXPECT_LE(sup_against(sol.u, same), 1e-9);
  std::size_t on_plateau = 0;
  for (std::size_t i : P.interior()) {
    if (std::abs(sol.u[i] - 0.1) < 1e-12) {
      ++on_plateau;
      EXPECT_TRUE(member(P.graph(), sol.u[i], sol.v[i], 1e-9));
      EXPECT_GT(sol.v[i], 0.0);
    }
  }
  EXPECT_GT(on_plateau, 5u);
  const auto fine = oracle::relax_frozen(oracle_problem(d, 400), std::vector<double>(401, d.g.right(0.2)), std::vector<double>(401, 0.0));
  EXPECT_LE(sup_against(sol.u, oracle::restrict_nodes(fine, 4)), 1e-3);
}

TEST(SolveVi, NewtonAndForwardBackwardAgree) {
  std::mt19937_64 rng(5);
  for (double p : {2.0, 3.0, 1.5}) {
    const auto P = problem(line(60), plateau_split(), p);
    NodalField z(P.size());
    std::uniform_real_distribution<double> d(0.0, 0.3);
    for (auto& v : z) v = d(rng);
    const auto a = solve_vi(P, z, zero_field(P.mesh()), ViTolerances{1e-11});
    const auto b = solve_vi(P, z, zero_field(P.mesh()), fb_only(1e-11));
    EXPECT_EQ(b.method, ViMethod::forward_backward);
    EXPECT_LE(sup_distance(a.u, b.u), 1e-8) << "p=" << p;
  }
}

TEST(SolveVi, PLaplacianCubic) {
  const auto P = problem(line(400), {PiecewiseFunction::constant(1.0), {}}, 3.0);
  const auto sol = solve_vi(P, zero_field(P.mesh()), zero_field(P.mesh()));
  double err = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) err = std::max(err, std::abs(sol.u[i] - oracle::plap_exact(3.0, P.mesh().nodes()[i][0])));
  EXPECT_LE(err, 2e-3);
}

TEST(ProxStep, FixedPointAtSolution) {
  const auto P = problem(line(80), plateau_split());
  const NodalField z(P.size(), 0.2);
  const auto b = load_from(P, z);
  const auto sol = solve_vi_load(P, b, zero_field(P.mesh()), ViTolerances{1e-11});
  EXPECT_LE(sup_distance(prox_step(P, sol.u, 1.0, b), sol.u), 1e-11);
  EXPECT_THROW(prox_step(P, sol.u, 0.0, b), InvalidArgument);
}

TEST(ProxStep, DampedRichardsonWithoutGraph) {
  const auto P = problem(line(20), {PiecewiseFunction::constant(1.0), {}});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  NodalField u(P.size());
  for (auto& v : u) v = d(rng);
  zero_boundary(P.mesh(), u);
  const auto b = constant_load(P, 1.0);
  const auto Au = apply_A(P, u);
  const double tau = 1e-3;
  const auto next = prox_step(P, u, tau, b);
  for (std::size_t i : P.interior()) EXPECT_NEAR(next[i], u[i] - tau * (Au[i] - b[i]) / P.mass()[i], 1e-15);
}

TEST(ProxStep, SingleDofMatchesScan) {
  // One interior node: F(x) = x^2/h + m j(x) - b x with h = 1/2, m = 1/2.
  const auto d = plateau_split();
  const auto P = problem(line(2), d);
  for (double c : {0.5, 3.0, 20.0, 40.0}) {
    const auto b = constant_load(P, c);
    const auto sol = solve_vi_load(P, b, zero_field(P.mesh()), ViTolerances{1e-13});
    const auto F = [&](double x) { return x * x / 0.5 + 0.5 * P.graph().potential()(x) - b[1] * x; };
    // A scan resolves a smooth minimum only to about sqrt(eps).
    EXPECT_NEAR(sol.u[1], oracle::scan_min(F, -2.0, 10.0), 1e-7) << c;
    const auto fb = solve_vi_load(P, b, zero_field(P.mesh()), fb_only(1e-13));
    EXPECT_NEAR(fb.u[1], sol.u[1], 1e-12);
  }
}

TEST(SolveVi, EnergyTraceNonIncreasing) {
  for (double p : {2.0, 3.0}) {
    const auto P = problem(line(50), plateau_split(), p);
    const NodalField z(P.size(), 0.15);
    for (const ViTolerances& t : {ViTolerances{1e-10}, fb_only(1e-10)}) {
      const auto sol = solve_vi(P, z, zero_field(P.mesh()), t);
      ASSERT_GE(sol.energy.size(), 2u);
      const double scale = std::abs(sol.energy.front()) + 1.0;
      for (std::size_t k = 1; k < sol.energy.size(); ++k) EXPECT_LE(sol.energy[k], sol.energy[k - 1] + 1e-14 * scale);
    }
  }
}

TEST(SolveVi, UniquenessBoundAndVariationalInequality) {
  std::mt19937_64 rng(11);
  const auto P = problem(line(100), plateau_split());
  const auto B = helper_bracket(P, 2.0);
  ASSERT_TRUE(B.verified);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const auto z = random_between(P, B.lower_u, B.upper_u, rng);
    const auto b = load_from(P, z);
    NodalField init(P.size());
    for (auto& v : init) v = d(rng);
    const auto s1 = solve_vi_load(P, b, zero_field(P.mesh()), ViTolerances{1e-10});
    const auto s2 = solve_vi_load(P, b, init, ViTolerances{1e-10});
    EXPECT_LE(sup_distance(s1.u, s2.u), 1e-8);
    EXPECT_LE(dot(apply_A(P, s1.u), s1.u), dot(b, s1.u) + 1e-10);
    EXPECT_LE(P.op().lambda * gradient_norm_p(P, s1.u), dot(b, s1.u) + 1e-10);
    EXPECT_TRUE(compare(B.lower_u, s1.u, 1e-8));
    EXPECT_TRUE(compare(s1.u, B.upper_u, 1e-8));
    for (std::size_t i : P.interior()) EXPECT_TRUE(member(P.graph(), s1.u[i], s1.v[i], 1e-9));
    EXPECT_LE(s1.stationarity, 1e-8);

    const auto Au = apply_A(P, s1.u);
    const double Ju = functional_J(P, s1.u);
    for (int t = 0; t < 20; ++t) {
      NodalField w(P.size());
      for (auto& v : w) v = 0.3 * d(rng);
      zero_boundary(P.mesh(), w);
      const auto diff = subtract(w, s1.u);
      EXPECT_GE(dot(Au, diff) + functional_J(P, w) - Ju, dot(b, diff) - 1e-10);
    }
  }
}

TEST(CheckTMonotone, Examples) {
  const auto P = problem(line(50), heaviside_split());
  std::mt19937_64 rng(13);
  const auto B = helper_bracket(P, 1.0);
  const auto z = random_between(P, B.lower_u, B.upper_u, rng);
  EXPECT_TRUE(check_T_monotone(P, z, z, 1e-8));
  EXPECT_TRUE(check_T_monotone(P, B.lower_u, B.upper_u, 1e-8));
  EXPECT_THROW(check_T_monotone(P, B.upper_u, B.lower_u, 1e-8), InvalidArgument);
}

TEST(CheckTMonotone, RandomOrderedPairs) {
  for (const auto& d : {heaviside_split(), plateau_split(), jump_g_split(Side::right)}) {
    const auto P = problem(line(100), d);
    const auto B = helper_bracket(P, 3.0);
    ASSERT_TRUE(B.verified);
    std::mt19937_64 rng(17);
    for (int k = 0; k < 50; ++k) {
      auto z1 = random_between(P, B.lower_u, B.upper_u, rng);
      auto z2 = random_between(P, B.lower_u, B.upper_u, rng);
      for (std::size_t i = 0; i < z1.size(); ++i) {
        if (z1[i] > z2[i]) std::swap(z1[i], z2[i]);
      }
      EXPECT_TRUE(check_T_monotone(P, z1, z2, 1e-8, ViTolerances{1e-11}));
    }
  }
}

TEST(SolveVi, Errors) {
  auto op = plaplacian(3.0);
  op.potential = nullptr;
  const DiscreteProblem P(line(10), op, {PiecewiseFunction::constant(1.0), {}});
  EXPECT_THROW(solve_vi(P, zero_field(P.mesh()), zero_field(P.mesh())), UnsupportedOperator);

  const auto Q = problem(line(100), {PiecewiseFunction::constant(1.0), {}}, 3.0);
  ViTolerances t = fb_only(1e-12);
  t.max_iterations = 10;
  try {
    solve_vi(Q, zero_field(Q.mesh()), zero_field(Q.mesh()), t);
    FAIL() << "expected SolverFailure";
  } catch (const SolverFailure& e) {
    EXPECT_FALSE(e.residual_history().empty());
  }
  const auto R = problem(line(10), {PiecewiseFunction::constant(1.0), {}});
  NodalField bad(R.size(), 0.0);
  bad[3] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(solve_vi_load(R, bad, zero_field(R.mesh())), InvalidArgument);
}

TEST(SolveVi, TwoDimensionalQuadraticAgainstFineOracle) {
  // -Lap u = 1 on the unit square; center value from the double sine series.
  const auto P = problem(square(32), {PiecewiseFunction::constant(1.0), {}});
  const auto sol = solve_vi(P, zero_field(P.mesh()), zero_field(P.mesh()), ViTolerances{1e-10});
  const std::size_t center = 16 * 33 + 16;
  EXPECT_NEAR(sol.u[center], oracle::poisson_square_center(), 5e-4);
}
