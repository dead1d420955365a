#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "common.hpp"

using namespace monovi;
using namespace fixtures;

namespace {

const IterationTolerances kTol = IterationTolerances::for_dimension(1);

double sup_against(const NodalField& u, const std::vector<double>& ref) {
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) d = std::max(d, std::abs(u[i] - ref[i]));
  return d;
}

/// Upper start for the oracle: -u'' = c without beta, solved by relaxation.
std::vector<double> oracle_upper(std::size_t n, double c) {
  oracle::Problem1D free{n, monovi::PiecewiseFunction::constant(c), {}, true};
  return oracle::relax_frozen(free, std::vector<double>(n + 1, c), std::vector<double>(n + 1, 0.0));
}

void expect_report_invariants(const DiscreteProblem& P, const Bracket& B, const SolveReport& r) {
  EXPECT_TRUE(r.passed(kTol));
  EXPECT_TRUE(r.certificate.passed);
  EXPECT_LE(r.max_mono_margin, kTol.mono);
  EXPECT_LE(r.fixed_point_residual, 2 * kTol.outer);
  EXPECT_TRUE(r.bounds_ok);
  for (const auto& s : r.steps) {
    EXPECT_LE(s.containment_excess, kTol.contain);
    EXPECT_LE(s.energy_pairing, s.load_pairing + 1e-10);
  }
  EXPECT_TRUE(compare(B.lower_u, r.u_final, kTol.contain));
  EXPECT_TRUE(compare(r.u_final, B.upper_u, kTol.contain));
  for (std::size_t i : P.interior()) EXPECT_TRUE(member(P.graph(), r.u_final[i], r.v_final[i], 0.0));
}

}  // namespace

TEST(SolveExtremal, ConstantLoadTakesOneStep) {
  for (const auto& d : {heaviside_split(), Decomposition{PiecewiseFunction::constant(3.0), PiecewiseFunction::linear(2.0)}}) {
    const auto P = problem(line(50), d);
    const auto B = helper_bracket(P, 3.0);
    for (Direction dir : {Direction::from_upper, Direction::from_lower}) {
      const auto r = solve_extremal(P, B, dir, kTol);
      EXPECT_EQ(r.outer_iterations, 1u);
    }
  }
}

TEST(SolveExtremal, SmoothCaseReproducesParabola) {
  const auto P = problem(line(100), {PiecewiseFunction::constant(1.0), {}});
  const auto u = interpolate(P.mesh(), [](const Vec2& x) { return 0.5 * x[0] * (1 - x[0]); });
  const auto B = make_bracket(P, zero_field(P.mesh()), zero_field(P.mesh()), u, zero_field(P.mesh()));
  ASSERT_TRUE(B.verified);
  const auto r = solve_extremal(P, B, Direction::from_upper, kTol);
  EXPECT_LE(sup_distance(r.u_final, u), 1e-10);
  expect_report_invariants(P, B, r);
}

TEST(SolveExtremal, HeavisideBenchmarkAgainstFineOracle) {
  const auto d = heaviside_split();
  const auto P = problem(line(200), d);
  const auto B = helper_bracket(P, 1.0);
  ASSERT_TRUE(B.verified);
  const auto up = solve_extremal(P, B, Direction::from_upper, kTol);
  const auto lo = solve_extremal(P, B, Direction::from_lower, kTol);
  expect_report_invariants(P, B, up);
  expect_report_invariants(P, B, lo);
  const auto fine = oracle::extremal(oracle_problem(d, 800), oracle_upper(800, 1.0));
  const auto ref = oracle::restrict_nodes(fine, 4);
  EXPECT_LE(sup_against(up.u_final, ref), 1e-3);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    EXPECT_LE(lo.u_final[i], ref[i] + 1e-3);
    EXPECT_GE(up.u_final[i], ref[i] - 1e-3);
  }
}

TEST(SolveExtremal, ActiveJumpAgainstOracle) {
  const auto d = plateau_split();
  const auto P = problem(line(100), d);
  const auto B = helper_bracket(P, 2.0);
  ASSERT_TRUE(B.verified);
  const auto up = solve_extremal(P, B, Direction::from_upper, kTol);
  expect_report_invariants(P, B, up);
  EXPECT_GT(up.outer_iterations, 1u);
  const auto ref = oracle::extremal(oracle_problem(d, 100), oracle_upper(100, 2.0));
  EXPECT_LE(sup_against(up.u_final, ref), 1e-7);
  const auto lo = solve_extremal(P, B, Direction::from_lower, kTol);
  expect_report_invariants(P, B, lo);
  EXPECT_TRUE(compare(lo.u_final, up.u_final, kTol.outer));
  const auto ref_lo = oracle::extremal(oracle_problem(d, 100), std::vector<double>(101, 0.0));
  EXPECT_LE(sup_against(lo.u_final, ref_lo), 1e-7);
}

TEST(SolveExtremal, DiscontinuousGOnBothSides) {
  const auto right = problem(line(100), jump_g_split(Side::right));
  const auto left = problem(line(100), jump_g_split(Side::left));
  const auto B = helper_bracket(right, 3.0);
  const auto Bl = helper_bracket(left, 3.0);
  ASSERT_TRUE(B.verified);
  const auto up = solve_extremal(right, B, Direction::from_upper, kTol);
  const auto lo = solve_extremal(left, Bl, Direction::from_lower, kTol);
  expect_report_invariants(right, B, up);
  expect_report_invariants(left, Bl, lo);
  EXPECT_TRUE(compare(lo.u_final, up.u_final, kTol.outer));
  const auto ref = oracle::extremal(oracle_problem(jump_g_split(Side::right), 100), oracle_upper(100, 3.0));
  EXPECT_LE(sup_against(up.u_final, ref), 1e-7);
  EXPECT_THROW(solve_extremal(right, B, Direction::from_lower, kTol), InvalidArgument);
  EXPECT_THROW(solve_extremal(left, Bl, Direction::from_upper, kTol), InvalidArgument);
}

TEST(SolveExtremal, MonotoneIteratesAndBoundEvidence) {
  const auto P = problem(line(100), plateau_split(), 3.0);
  const auto B = helper_bracket(P, 2.0);
  ASSERT_TRUE(B.verified);
  const auto r = solve_extremal(P, B, Direction::from_upper, kTol);
  expect_report_invariants(P, B, r);
  for (const auto& s : r.steps) {
    EXPECT_LE(s.mono_margin, kTol.mono);
    EXPECT_LE(s.seminorm_bound_lhs, s.load_pairing + 1e-10);
  }
}

TEST(SolveExtremal, RequiresVerifiedBracket) {
  const auto P = problem(line(40), heaviside_split());
  const auto bad = make_bracket(P, zero_field(P.mesh()), zero_field(P.mesh()), zero_field(P.mesh()), zero_field(P.mesh()));
  ASSERT_FALSE(bad.verified);
  EXPECT_THROW(solve_extremal(P, bad, Direction::from_upper, kTol), InvalidArgument);
  // Waived: u = 0 is not an upper solution, so the first step goes up.
  EXPECT_THROW(solve_extremal(P, bad, Direction::from_upper, kTol, true), MonotonicityViolation);
  auto unverified = helper_bracket(P, 1.0);
  unverified.verified = false;
  EXPECT_THROW(solve_extremal(P, unverified, Direction::from_lower, kTol), InvalidArgument);
  const auto r = solve_extremal(P, unverified, Direction::from_lower, kTol, true);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(SolveExtremal, OuterCapIsReported) {
  const auto P = problem(line(100), plateau_split());
  const auto B = helper_bracket(P, 2.0);
  IterationTolerances t = kTol;
  t.max_outer = 2;
  try {
    solve_extremal(P, B, Direction::from_upper, t);
    FAIL() << "expected SolverFailure";
  } catch (const MonotonicityViolation&) {
    FAIL() << "wrong failure kind";
  } catch (const SolverFailure& e) {
    EXPECT_EQ(e.residual_history().size(), 2u);
  }
}

TEST(CertifySolution, Examples) {
  const auto P = problem(line(60), {PiecewiseFunction::constant(1.0), {}});
  const auto u = interpolate(P.mesh(), [](const Vec2& x) { return 0.5 * x[0] * (1 - x[0]); });
  const auto c = certify_solution(P, u, 1e-8);
  EXPECT_TRUE(c.passed);
  EXPECT_LE(sup_norm(c.v), 1e-9);

  const auto Z = problem(line(10), {PiecewiseFunction::constant(0.0), PiecewiseFunction::heaviside(0.2, 5.0)});
  const auto cz = certify_solution(Z, zero_field(Z.mesh()), 0.0);
  EXPECT_TRUE(cz.passed);
  EXPECT_EQ(sup_norm(cz.v), 0.0);

  const auto wrong = certify_solution(P, zero_field(P.mesh()), 1e-8);
  EXPECT_FALSE(wrong.passed);
  EXPECT_NEAR(wrong.membership_distance, 1.0, 1e-12);
}

TEST(CertifySolution, SelectionInsideJumpOnPlateau) {
  const auto P = problem(line(100), plateau_split());
  const auto r = solve_extremal(P, helper_bracket(P, 2.0), Direction::from_upper, kTol);
  bool seen = false;
  for (std::size_t i : P.interior()) {
    if (r.u_final[i] == 0.1) {
      seen = true;
      EXPECT_GE(r.certificate.v[i], -1e-8);
      EXPECT_LE(r.certificate.v[i], 5.0 + 1e-8);
    }
  }
  EXPECT_TRUE(seen);
}

TEST(MaximalityProbe, Examples) {
  const auto P = problem(line(100), plateau_split());
  const auto B = helper_bracket(P, 2.0);
  const auto up = solve_extremal(P, B, Direction::from_upper, kTol);
  const auto lo = solve_extremal(P, B, Direction::from_lower, kTol);
  EXPECT_TRUE(maximality_probe(P, lo.u_final, up.u_final, {up.u_final, lo.u_final}, 1e-6, kTol.member).passed);
  EXPECT_TRUE(maximality_probe(P, lo.u_final, up.u_final, {}, 1e-6, kTol.member).passed);

  const auto found = random_fixed_points(P, B, 10, 99, kTol);
  ASSERT_EQ(found.solutions.size(), 10u);
  const auto rep = maximality_probe(P, lo.u_final, up.u_final, found.solutions, 1e-6, kTol.member);
  EXPECT_TRUE(rep.passed) << rep.failure;

  // A certified solution outside [u_min, u_max] must be flagged with its node.
  auto shifted = lo.u_final;
  const auto bad = maximality_probe(P, up.u_final, up.u_final, {lo.u_final}, 1e-6, kTol.member);
  if (sup_distance(lo.u_final, up.u_final) > 1e-6) {
    EXPECT_FALSE(bad.passed);
    EXPECT_NE(bad.failure.find("node"), std::string::npos);
  }
  shifted[50] += 0.05;
  const auto uncertified = maximality_probe(P, lo.u_final, up.u_final, {shifted}, 1e-6, kTol.member);
  EXPECT_FALSE(uncertified.passed);
}

TEST(MaximalityProbe, DiscontinuousGHasSeparatedExtremes) {
  const auto right = problem(line(100), jump_g_split(Side::right));
  const auto B = helper_bracket(right, 3.0);
  const auto up = solve_extremal(right, B, Direction::from_upper, kTol);
  const auto left = problem(line(100), jump_g_split(Side::left));
  const auto lo = solve_extremal(left, helper_bracket(left, 3.0), Direction::from_lower, kTol);
  const auto found = random_fixed_points(right, B, 10, 5, kTol);
  const auto rep = maximality_probe(right, lo.u_final, up.u_final, found.solutions, 1e-6, kTol.member);
  EXPECT_TRUE(rep.passed) << rep.failure;
}

TEST(SolveExtremal, TwoDimensionalHeaviside) {
  const auto P = problem(square(16), {PiecewiseFunction::constant(1.0), PiecewiseFunction::heaviside(0.05, 5.0)});
  const auto B = helper_bracket(P, 1.0);
  ASSERT_TRUE(B.verified);
  const auto t = IterationTolerances::for_dimension(2);
  const auto r = solve_extremal(P, B, Direction::from_upper, t);
  EXPECT_TRUE(r.passed(t));
  EXPECT_LE(r.certificate.membership_distance, 1e-6);
}
