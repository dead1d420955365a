#pragma once

// Outer monotone iteration u^{n+1} = T u^n started from an end of a verified
// bracket, the solution certificate, and the maximality probe.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "monovi/assembly.hpp"
#include "monovi/error.hpp"
#include "monovi/mesh.hpp"
#include "monovi/verify.hpp"
#include "monovi/vi_solver.hpp"

namespace monovi {

enum class Direction { from_upper, from_lower };

inline const char* to_string(Direction d) { return d == Direction::from_upper ? "from_upper" : "from_lower"; }

struct IterationTolerances {
  double outer = 1e-8;    // sup-norm increment at which the iteration stops
  double stat = 1e-10;    // inner prox residual
  double mono = 1e-9;     // allowed step against the expected order
  double member = 1e-8;   // certificate: distance of v_i to beta(u_i)
  double contain = 1e-8;  // slack of the bracket containment check
  std::size_t max_outer = 1000;
  ViTolerances vi{};

  /// Inner tolerance tied to the outer one: stat = outer/100, mono = 10 stat.
  static IterationTolerances from_outer(double outer) {
    IterationTolerances t;
    t.outer = outer;
    t.stat = outer / 100.0;
    t.mono = 10.0 * t.stat;
    t.member = outer;
    t.contain = outer;
    return t;
  }

  static IterationTolerances for_dimension(int dim) { return from_outer(dim == 1 ? 1e-8 : 1e-6); }

  ViTolerances inner() const {
    ViTolerances v = vi;
    v.stat = stat;
    return v;
  }
};

struct Certificate {
  NodalField v;                     // extracted selection, (b - A u)_i / m_i
  double membership_distance = 0.0;  // max_i dist(v_i, beta(u_i)) over interior nodes
  std::size_t worst_node = 0;
  double stationarity = 0.0;  // max_i |(A u)_i + m_i v_i - b_i| / m_i
  double boundary = 0.0;      // max |u| over boundary nodes
  double tol = 0.0;
  bool passed = false;
};

/// Reads off v from the discrete equation and checks v_i in beta(u_i).
inline Certificate certify_solution(const DiscreteProblem& P, std::span<const double> u, double tol_member) {
  detail::check_size(P, u, "certify_solution");
  Certificate c;
  c.tol = tol_member;
  c.v.assign(P.size(), 0.0);
  const NodalField Au = apply_A(P, u);
  const NodalField b = load_from(P, u);
  const auto& m = P.mass();
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (P.mesh().on_boundary(i)) c.boundary = std::max(c.boundary, std::abs(u[i]));
  }
  for (std::size_t i : P.interior()) {
    c.v[i] = (b[i] - Au[i]) / m[i];
    const double d = P.graph().at(u[i]).distance(c.v[i]);
    if (!(d <= c.membership_distance)) {
      c.membership_distance = d;
      c.worst_node = i;
    }
    c.stationarity = std::max(c.stationarity, std::abs(Au[i] + m[i] * c.v[i] - b[i]) / m[i]);
  }
  c.passed = std::isfinite(c.membership_distance) && c.membership_distance <= tol_member &&
             c.stationarity <= tol_member && c.boundary == 0.0;
  return c;
}

struct OuterStep {
  std::size_t n = 0;
  double sup_increment = 0.0;
  /// Largest step against the expected order: max(u^{n+1} - u^n) from
  /// above, max(u^n - u^{n+1}) from below.
  double mono_margin = 0.0;
  double containment_excess = 0.0;  // max distance outside [lower, upper]
  std::size_t inner_iterations = 0;
  ViMethod inner_method = ViMethod::newton;
  double inner_residual = 0.0;
  double energy = 0.0;  // F at the inner solution
  /// <A u, u> and <b, u>; the first may not exceed the second.
  double energy_pairing = 0.0;
  double load_pairing = 0.0;
  /// lambda * sum_e |grad u|^p |e|, bounded by load_pairing.
  double seminorm_bound_lhs = 0.0;
  bool bound_ok = true;
};

struct SolveReport {
  NodalField u_final, v_final;
  Direction direction = Direction::from_upper;
  std::size_t outer_iterations = 0;
  std::vector<OuterStep> steps;
  Certificate certificate;
  double fixed_point_residual = 0.0;  // |T(u_final) - u_final|_inf
  double max_mono_margin = 0.0;
  bool bounds_ok = true;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;

  bool passed(const IterationTolerances& t) const {
    return certificate.passed && bounds_ok && max_mono_margin <= t.mono && fixed_point_residual <= 2.0 * t.outer;
  }
};

namespace detail {

inline double containment_excess(std::span<const double> u, const Bracket& B) {
  double e = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    e = std::max(e, u[i] - B.upper_u[i]);
    e = std::max(e, B.lower_u[i] - u[i]);
  }
  return e;
}

inline void check_bracket_shape(const DiscreteProblem& P, const Bracket& B) {
  check_size(P, B.lower_u, "bracket");
  check_size(P, B.lower_v, "bracket");
  check_size(P, B.upper_u, "bracket");
  check_size(P, B.upper_v, "bracket");
}

/// Bound evidence for one inner solution u with load b.
inline void record_bounds(const DiscreteProblem& P, std::span<const double> u, std::span<const double> b,
                          OuterStep& s) {
  const NodalField Au = apply_A(P, u);
  s.energy_pairing = dot(Au, u);
  s.load_pairing = dot(b, u);
  s.seminorm_bound_lhs = P.op().lambda * gradient_norm_p(P, u);
  const double slack = 1e-10 + 1e-12 * std::abs(s.load_pairing);
  s.bound_ok = s.energy_pairing <= s.load_pairing + slack && s.seminorm_bound_lhs <= s.load_pairing + slack;
}

}  // namespace detail

/// Runs u^{n+1} = T u^n from the upper (or lower) end of B until the sup-norm
/// increment drops below tol.outer and the iterate passes its certificate.
/// With a steep g the certificate can lag the increment by a factor Lip(g).
inline SolveReport solve_extremal(const DiscreteProblem& P, const Bracket& B, Direction dir,
                                  const IterationTolerances& tol, bool waive_verification = false) {
  const auto t0 = std::chrono::steady_clock::now();
  detail::check_bracket_shape(P, B);
  SolveReport rep;
  rep.direction = dir;
  if (!B.verified) {
    if (!waive_verification) throw InvalidArgument("solve_extremal: bracket is not verified");
    rep.warnings.push_back("bracket verification waived");
  }
  const auto& d = P.decomposition();
  if (d.g.has_jumps()) {
    if (dir == Direction::from_upper && d.g_side != Side::right) {
      throw InvalidArgument("solve_extremal: iteration from the upper solution needs g_side = right");
    }
    if (dir == Direction::from_lower && d.g_side != Side::left) {
      throw InvalidArgument("solve_extremal: iteration from the lower solution needs g_side = left");
    }
  }

  const bool down = dir == Direction::from_upper;
  NodalField u = down ? B.upper_u : B.lower_u;
  NodalField b_prev;
  const ViTolerances vi = tol.inner();
  bool converged = false;
  std::vector<double> increments;

  for (std::size_t n = 0; n < tol.max_outer; ++n) {
    NodalField b = load_from(P, u);
    if (n > 0 && b == b_prev) {
      // T u^n = T u^{n-1} = u^n exactly.
      converged = true;
      break;
    }
    ViSolution sol = solve_vi_load(P, b, u, vi);

    OuterStep s;
    s.n = n;
    s.sup_increment = sup_distance(sol.u, u);
    s.mono_margin = std::max(0.0, down ? max_excess(sol.u, u) : max_excess(u, sol.u));
    s.containment_excess = detail::containment_excess(sol.u, B);
    s.inner_iterations = sol.inner_iterations;
    s.inner_method = sol.method;
    s.inner_residual = sol.residual;
    s.energy = sol.energy.back();
    detail::record_bounds(P, sol.u, b, s);
    rep.steps.push_back(s);
    increments.push_back(s.sup_increment);
    rep.max_mono_margin = std::max(rep.max_mono_margin, s.mono_margin);
    rep.bounds_ok = rep.bounds_ok && s.bound_ok;

    if (s.mono_margin > tol.mono) {
      throw MonotonicityViolation("solve_extremal: step " + std::to_string(n) + " moved against the order by " +
                                      sci(s.mono_margin),
                                  increments);
    }
    if (s.containment_excess > tol.contain) {
      throw MonotonicityViolation("solve_extremal: iterate " + std::to_string(n + 1) + " leaves the bracket by " +
                                      sci(s.containment_excess),
                                  increments);
    }
    u = std::move(sol.u);
    b_prev = std::move(b);
    if (s.sup_increment <= tol.outer) {
      rep.certificate = certify_solution(P, u, tol.member);
      if (rep.certificate.passed) {
        converged = true;
        break;
      }
    }
  }
  if (!converged) {
    throw SolverFailure("solve_extremal: no convergence within " + std::to_string(tol.max_outer) + " outer iterations",
                        increments);
  }
  rep.outer_iterations = rep.steps.size();
  rep.certificate = certify_solution(P, u, tol.member);
  rep.fixed_point_residual = sup_distance(solve_vi(P, u, u, vi).u, u);
  rep.v_final = extract_selection(P, u, load_from(P, u)).first;
  rep.u_final = std::move(u);
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

struct ProbeCandidate {
  bool certified = false;
  double membership_distance = 0.0;
  double below_min = 0.0;  // max_i (u_min - c)_i
  double above_max = 0.0;  // max_i (c - u_max)_i
  std::size_t worst_node = 0;
};

struct ProbeReport {
  std::vector<ProbeCandidate> candidates;
  bool passed = true;
  std::string failure;
};

/// Falsification test of extremality: every certified solution must lie in
/// [u_min - tol, u_max + tol].
inline ProbeReport maximality_probe(const DiscreteProblem& P, std::span<const double> u_min,
                                    std::span<const double> u_max, const std::vector<NodalField>& candidates,
                                    double tol, double tol_member) {
  detail::check_size(P, u_min, "maximality_probe");
  detail::check_size(P, u_max, "maximality_probe");
  ProbeReport rep;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto& c = candidates[k];
    detail::check_size(P, c, "maximality_probe");
    ProbeCandidate pc;
    const Certificate cert = certify_solution(P, c, tol_member);
    pc.certified = cert.passed;
    pc.membership_distance = cert.membership_distance;
    pc.below_min = -std::numeric_limits<double>::infinity();
    pc.above_max = -std::numeric_limits<double>::infinity();
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.size(); ++i) {
      pc.below_min = std::max(pc.below_min, u_min[i] - c[i]);
      pc.above_max = std::max(pc.above_max, c[i] - u_max[i]);
      const double w = std::max(u_min[i] - c[i], c[i] - u_max[i]);
      if (w > worst) {
        worst = w;
        pc.worst_node = i;
      }
    }
    if (rep.passed && !pc.certified) {
      rep.passed = false;
      rep.failure = "candidate " + std::to_string(k) + " is not a certified solution (membership distance " +
                    sci(pc.membership_distance) + ")";
    } else if (rep.passed && worst > tol) {
      rep.passed = false;
      rep.failure = "candidate " + std::to_string(k) + " leaves [u_min, u_max] at node " +
                    std::to_string(pc.worst_node) + " by " + sci(worst);
    }
    rep.candidates.push_back(pc);
  }
  return rep;
}

struct FixedPointSearch {
  std::vector<NodalField> solutions;
  std::vector<std::size_t> iterations;
};

/// Plain Picard iteration z <- T z from `count` random fields drawn nodally
/// between the bracket ends, stopped like solve_extremal. Every start must
/// converge.
inline FixedPointSearch random_fixed_points(const DiscreteProblem& P, const Bracket& B, std::size_t count,
                                            std::uint64_t seed, const IterationTolerances& tol) {
  detail::check_bracket_shape(P, B);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const ViTolerances vi = tol.inner();
  FixedPointSearch out;
  for (std::size_t k = 0; k < count; ++k) {
    NodalField z(P.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = B.lower_u[i] + unit(rng) * (B.upper_u[i] - B.lower_u[i]);
    zero_boundary(P.mesh(), z);
    std::vector<double> increments;
    bool converged = false;
    std::size_t n = 0;
    while (n < tol.max_outer) {
      NodalField next = solve_vi(P, z, z, vi).u;
      const double inc = sup_distance(next, z);
      increments.push_back(inc);
      z = std::move(next);
      ++n;
      if (inc <= tol.outer && certify_solution(P, z, tol.member).passed) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw SolverFailure("random_fixed_points: start " + std::to_string(k) + " did not settle", increments);
    }
    out.solutions.push_back(std::move(z));
    out.iterations.push_back(n);
  }
  return out;
}

}  // namespace monovi
