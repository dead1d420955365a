#pragma once

// Discrete upper/lower solution checks and standard bracket constructors.
//
// Testing the one-sided inequality against every nonnegative w vanishing on
// the boundary reduces to the interior hat functions phi_i: they generate
// that cone with nonnegative coefficients, and every term is linear in w.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>

#include "monovi/assembly.hpp"
#include "monovi/error.hpp"
#include "monovi/mesh.hpp"
#include "monovi/vi_solver.hpp"

namespace monovi {

struct BracketCheckReport {
  std::string kind;  // "upper" or "lower"
  double tol = 0.0;
  /// -max_i dist(v_i, beta(u_i)).
  double membership_margin = 0.0;
  /// min of u over the boundary (upper), or of -u (lower).
  double boundary_margin = std::numeric_limits<double>::infinity();
  /// Smallest interior slack of the one-sided inequality, divided by m_i.
  double residual_margin = std::numeric_limits<double>::infinity();
  std::size_t worst_node = 0;
  bool finite = true;  // u, v, G(u) finite at every node
  bool passed = false;
};

namespace detail {

inline BracketCheckReport check_one_sided(const DiscreteProblem& P, std::span<const double> u, std::span<const double> v,
                                          double tol, bool upper) {
  check_size(P, u, upper ? "check_upper" : "check_lower");
  check_size(P, v, upper ? "check_upper" : "check_lower");
  if (tol < 0.0) throw InvalidArgument("bracket check: tolerance must be nonnegative");
  BracketCheckReport rep;
  rep.kind = upper ? "upper" : "lower";
  rep.tol = tol;

  double worst_member = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]) || !std::isfinite(v[i])) rep.finite = false;
    worst_member = std::max(worst_member, P.graph().at(u[i]).distance(v[i]));
    if (P.mesh().on_boundary(i)) rep.boundary_margin = std::min(rep.boundary_margin, upper ? u[i] : -u[i]);
  }
  rep.membership_margin = -worst_member;
  if (!rep.finite) return rep;

  const NodalField Au = apply_A(P, u);
  const NodalField b = load_from(P, u);
  const auto& m = P.mass();
  for (std::size_t i : P.interior()) {
    if (!std::isfinite(b[i])) rep.finite = false;
    const double lhs = Au[i] + m[i] * v[i];
    const double slack = (upper ? lhs - b[i] : b[i] - lhs) / m[i];
    if (slack < rep.residual_margin) {
      rep.residual_margin = slack;
      rep.worst_node = i;
    }
  }
  rep.passed = rep.finite && rep.membership_margin >= -tol && rep.boundary_margin >= -tol && rep.residual_margin >= -tol;
  return rep;
}

}  // namespace detail

/// Upper solution: v in beta(u), u >= 0 on the boundary, and
/// (A u)_i + m_i v_i >= m_i g(u_i) at every interior node.
inline BracketCheckReport check_upper(const DiscreteProblem& P, std::span<const double> u, std::span<const double> v,
                                      double tol = 1e-9) {
  return detail::check_one_sided(P, u, v, tol, true);
}

/// Lower solution: the mirror image of check_upper.
inline BracketCheckReport check_lower(const DiscreteProblem& P, std::span<const double> u, std::span<const double> v,
                                      double tol = 1e-9) {
  return detail::check_one_sided(P, u, v, tol, false);
}

/// Order interval [lower_u, upper_u] with the beta-selections that certify
/// its ends.
struct Bracket {
  NodalField lower_u, lower_v;
  NodalField upper_u, upper_v;
  BracketCheckReport lower_report, upper_report;
  double order_margin = 0.0;  // min_i (upper_u - lower_u)
  bool verified = false;
};

inline Bracket make_bracket(const DiscreteProblem& P, NodalField lower_u, NodalField lower_v, NodalField upper_u,
                            NodalField upper_v, double tol = 1e-9) {
  Bracket B{std::move(lower_u), std::move(lower_v), std::move(upper_u), std::move(upper_v), {}, {}, 0.0, false};
  B.upper_report = check_upper(P, B.upper_u, B.upper_v, tol);
  B.lower_report = check_lower(P, B.lower_u, B.lower_v, tol);
  B.order_margin = -max_excess(B.lower_u, B.upper_u);
  B.verified = B.upper_report.passed && B.lower_report.passed && B.order_margin >= -tol;
  return B;
}

namespace detail {

inline std::pair<NodalField, NodalField> constant_load_bracket(const DiscreteProblem& P, double c, double check_tol,
                                                               ViTolerances vi_tol, bool upper) {
  if (!P.op().has_potential()) {
    throw UnsupportedOperator("bracket helper: operator '" + P.op().name + "' has no potential");
  }
  vi_tol.stat = std::min(vi_tol.stat, 1e-2 * check_tol);
  const DiscreteProblem free = P.without_graph();
  const NodalField b = constant_load(free, c);
  const NodalField zero(P.size(), 0.0);
  NodalField u = solve_vi_load(free, b, zero, vi_tol).u;
  NodalField v(P.size());
  for (std::size_t i = 0; i < u.size(); ++i) v[i] = upper ? P.graph().h().left(u[i]) : P.graph().h().right(u[i]);

  for (std::size_t i = 0; i < u.size(); ++i) {
    const double gi = P.G()(u[i]);
    if (upper ? gi > c : gi < c) {
      throw InvalidArgument(std::string("bracket helper: g(u) = ") + sci(gi) + " at node " +
                            std::to_string(i) + (upper ? " exceeds c_upper = " : " is below c_lower = ") +
                            sci(c) + (upper ? "; choose a larger c_upper" : "; choose a smaller c_lower"));
    }
  }
  const auto rep = upper ? check_upper(P, u, v, check_tol) : check_lower(P, u, v, check_tol);
  if (!rep.passed) {
    throw InvalidArgument(std::string("bracket helper: constructed ") + rep.kind +
                          " solution fails verification (residual margin " + sci(rep.residual_margin) +
                          ", membership margin " + sci(rep.membership_margin) + ")");
  }
  return {std::move(u), std::move(v)};
}

}  // namespace detail

/// Upper solution from the beta-free problem with constant load c_upper,
/// with selection v_i = h^-(u_i). Requires c_upper >= g on the range of u,
/// which is checked after the solve.
inline std::pair<NodalField, NodalField> linear_bracket_helper(const DiscreteProblem& P, double c_upper,
                                                               double check_tol = 1e-9, ViTolerances vi_tol = {}) {
  return detail::constant_load_bracket(P, c_upper, check_tol, vi_tol, true);
}

/// Mirror image: lower solution from load c_lower <= g, with v_i = h^+(u_i).
inline std::pair<NodalField, NodalField> lower_bracket_helper(const DiscreteProblem& P, double c_lower,
                                                              double check_tol = 1e-9, ViTolerances vi_tol = {}) {
  return detail::constant_load_bracket(P, c_lower, check_tol, vi_tol, false);
}

/// u = 0 with the selection of beta(0) closest to 0, which is 0 itself.
inline std::pair<NodalField, NodalField> zero_bracket_end(const DiscreteProblem& P) {
  return {NodalField(P.size(), 0.0), NodalField(P.size(), 0.0)};
}

}  // namespace monovi
