#pragma once

#include <random>

#include "monovi/monovi.hpp"
#include "oracles.hpp"

namespace fixtures {

using namespace monovi;

inline Mesh line(std::size_t n) { return build_mesh({1, 0.0, 1.0, 0.0, 1.0, n, 2}); }
inline Mesh square(std::size_t n) { return build_mesh({2, 0.0, 1.0, 0.0, 1.0, n, n}); }

/// g = 1, h = 5 H(. - 0.2): the discontinuous benchmark.
inline Decomposition heaviside_split() { return {PiecewiseFunction::constant(1.0), PiecewiseFunction::heaviside(0.2, 5.0)}; }

/// g = 1 + 4 clamp(s, 0, 0.25), h = 5 H(. - 0.1). The jump of h is active
/// at the solution, which sits on a plateau near s = 0.1.
inline Decomposition plateau_split() {
  return {PiecewiseFunction(PiecewiseSpec{1.0, {0.0, 0.25}, {0.0, 4.0, 0.0}, {}}), PiecewiseFunction::heaviside(0.1, 5.0)};
}

/// g = 1 + 2 H(. - 0.05) with h = s: a discontinuous g.
inline Decomposition jump_g_split(Side side) {
  return {PiecewiseFunction(PiecewiseSpec{1.0, {}, {0.0}, {Jump{0.05, 2.0}}}), PiecewiseFunction::linear(1.0), side};
}

inline DiscreteProblem problem(const Mesh& m, Decomposition d, double p = 2.0) { return DiscreteProblem(m, plaplacian(p), std::move(d)); }

inline Bracket helper_bracket(const DiscreteProblem& P, double c_upper, double tol = 1e-9) {
  auto [uu, uv] = linear_bracket_helper(P, c_upper, tol);
  auto [lu, lv] = zero_bracket_end(P);
  return make_bracket(P, lu, lv, uu, uv, tol);
}

inline NodalField random_between(const DiscreteProblem& P, const NodalField& lo, const NodalField& hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  NodalField z(P.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = lo[i] + unit(rng) * (hi[i] - lo[i]);
  zero_boundary(P.mesh(), z);
  return z;
}

inline oracle::Problem1D oracle_problem(const Decomposition& d, std::size_t n) {
  return {n, d.g, d.h, d.g_side == Side::right};
}

}  // namespace fixtures
