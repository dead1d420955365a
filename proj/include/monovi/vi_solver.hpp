#pragma once

// The inner map T: for a frozen load b = (m_i g(z_i)), find the unique u with
//   <A u, w - u> + J(w) - J(u) >= <b, w - u>   for all w vanishing on the boundary,
// i.e. the minimizer of F(u) = Phi(u) + J(u) - <b, u>.
//
// General potential operators use forward-backward splitting in the lumped
// mass metric (backward step = nodal resolvent of beta) with backtracking and
// monotone (objective non-increasing) Nesterov acceleration. A faster
// primal-dual active-set (damped semismooth Newton) path with sparse LDL^T
// solves is tried first; it is guarded by a line search on F and falls back
// to forward-backward if it stalls.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "monovi/assembly.hpp"
#include "monovi/error.hpp"
#include "monovi/mesh.hpp"

namespace monovi {

struct ViTolerances {
  /// Stop when ||u - prox_step(u, tau_ref)||_inf <= stat.
  double stat = 1e-9;
  double tau_ref = 1.0;
  std::size_t max_iterations = 1000000;
  std::size_t max_active_set_iterations = 200;
  bool fast_path = true;
};

enum class ViMethod { forward_backward, newton };

inline const char* to_string(ViMethod m) { return m == ViMethod::newton ? "newton" : "forward_backward"; }

struct ViSolution {
  NodalField u;
  NodalField v;               // selection with v_i in beta(u_i)
  double residual = 0.0;      // prox fixed-point residual at tau_ref
  double stationarity = 0.0;  // max_i |(Au)_i + m_i v_i - b_i| / m_i over interior nodes
  std::size_t inner_iterations = 0;
  std::vector<double> energy;  // F after each iteration, starting with F(u_init)
  ViMethod method = ViMethod::forward_backward;
};

namespace detail {

/// Phi(u) and, optionally, A(u) from a single sweep over the elements.
inline double phi_and_grad(const DiscreteProblem& P, std::span<const double> u, NodalField* grad) {
  const Mesh& mesh = P.mesh();
  const auto& op = P.op();
  const auto grads = element_gradients(mesh, u);
  std::vector<Vec2> flux(grads.size());
  std::vector<double> phi(grads.size(), 0.0);
  const bool has_pot = op.has_potential();
  parallel_for(grads.size(), [&](std::size_t e) {
    flux[e] = op.flux(mesh.centroid(e), grads[e]);
    phi[e] = (has_pot ? op.potential(mesh.centroid(e), grads[e]) : 0.5 * dot(flux[e], grads[e])) * mesh.measure(e);
  });
  if (grad) grad->assign(P.size(), 0.0);
  double s = 0.0;
  for (std::size_t e = 0; e < grads.size(); ++e) {
    if (!std::isfinite(flux[e][0]) || !std::isfinite(flux[e][1]) || !std::isfinite(phi[e])) {
      throw Error("vi_solver: non-finite flux or energy on element " + std::to_string(e));
    }
    s += phi[e];
    if (grad) {
      const auto& el = mesh.element(e);
      for (std::size_t a = 0; a < mesh.element_size(); ++a) {
        (*grad)[el[a]] += dot(flux[e], mesh.basis_gradient(e, a)) * mesh.measure(e);
      }
    }
  }
  return s;
}

inline double objective(const DiscreteProblem& P, std::span<const double> u, std::span<const double> b) {
  return phi_and_grad(P, u, nullptr) + functional_J(P, u) - dot(b, u);
}

/// Largest eigenvalue of the unit-coefficient stiffness matrix on interior
/// nodes, by power iteration.
inline double stiffness_scale(const Mesh& mesh, std::size_t iterations = 40) {
  NodalField v(mesh.num_nodes(), 0.0);
  for (std::size_t k = 0; k < mesh.interior().size(); ++k) v[mesh.interior()[k]] = 1.0 + 0.37 * static_cast<double>(k % 7);
  double lambda = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    NodalField w(mesh.num_nodes(), 0.0);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
      const Vec2 g = gradient(mesh, v, e);
      const auto& el = mesh.element(e);
      for (std::size_t a = 0; a < mesh.element_size(); ++a) w[el[a]] += dot(g, mesh.basis_gradient(e, a)) * mesh.measure(e);
    }
    zero_boundary(mesh, w);
    const double nw = std::sqrt(dot(w, w));
    const double nv = std::sqrt(dot(v, v));
    if (nw == 0.0 || nv == 0.0) break;
    lambda = nw / nv;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / nw;
  }
  return lambda > 0.0 ? lambda : 1.0;
}

inline void require_supported(const DiscreteProblem& P) {
  if (!P.op().has_potential() && !P.op().is_linear()) {
    throw UnsupportedOperator("vi_solver: operator '" + P.op().name +
                              "' has no potential; only variational (potential) fluxes are supported");
  }
}

}  // namespace detail

/// One forward-backward step:
///   u+_i = resolvent(beta, tau, u_i - tau ((A u)_i - b_i) / m_i)   (interior),
///   u+_i = 0                                                       (boundary).
inline NodalField prox_step(const DiscreteProblem& P, std::span<const double> u, double tau, std::span<const double> b) {
  if (!(tau > 0.0)) throw InvalidArgument("prox_step: tau must be positive");
  const NodalField Au = apply_A(P, u);
  const auto& m = P.mass();
  NodalField out(P.size(), 0.0);
  for (std::size_t i : P.interior()) out[i] = P.graph().resolvent(tau, u[i] - tau * (Au[i] - b[i]) / m[i]);
  return out;
}

inline double prox_residual(const DiscreteProblem& P, std::span<const double> u, std::span<const double> b,
                            double tau_ref = 1.0) {
  return sup_distance(u, prox_step(P, u, tau_ref, b));
}

/// v_i = projection of (b_i - (A u)_i)/m_i onto beta(u_i); also returns the
/// projection distance, i.e. the stationarity defect.
inline std::pair<NodalField, double> extract_selection(const DiscreteProblem& P, std::span<const double> u,
                                                       std::span<const double> b) {
  const NodalField Au = apply_A(P, u);
  const auto& m = P.mass();
  NodalField v(P.size(), 0.0);
  double defect = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Interval beta_i = P.graph().at(u[i]);
    if (P.mesh().on_boundary(i)) {
      v[i] = beta_i.project(0.0);
      continue;
    }
    const double raw = (b[i] - Au[i]) / m[i];
    v[i] = beta_i.project(raw);
    defect = std::max(defect, std::abs(raw - v[i]));
  }
  return {std::move(v), defect};
}

namespace detail {

inline void finish(const DiscreteProblem& P, std::span<const double> b, const ViTolerances& tol, ViSolution& sol) {
  sol.residual = prox_residual(P, sol.u, b, tol.tau_ref);
  auto [v, defect] = extract_selection(P, sol.u, b);
  sol.v = std::move(v);
  sol.stationarity = defect;
}

/// Forward-backward splitting with backtracking and monotone acceleration.
inline bool forward_backward(const DiscreteProblem& P, std::span<const double> b, const ViTolerances& tol,
                             ViSolution& sol, std::vector<double>& residual_history) {
  const auto& m = P.mass();
  const auto& interior = P.interior();
  const auto& beta = P.graph();
  const double m_min = *std::min_element(m.begin(), m.end());
  double tau = m_min / stiffness_scale(P.mesh());

  NodalField x = sol.u;
  NodalField x_prev = x;
  NodalField y = x;
  NodalField z(P.size(), 0.0), gy, d(P.size(), 0.0);
  double Fx = objective(P, x, b);
  double t = 1.0;
  const std::size_t check_every = 5;

  for (std::size_t k = 1; k <= tol.max_iterations; ++k) {
    const double phi_y = phi_and_grad(P, y, &gy);
    double phi_z = 0.0;
    for (;;) {
      double lin = 0.0, quad = 0.0;
      for (std::size_t i : interior) {
        z[i] = beta.resolvent(tau, y[i] - tau * (gy[i] - b[i]) / m[i]);
        d[i] = z[i] - y[i];
        lin += gy[i] * d[i];
        quad += m[i] * d[i] * d[i];
      }
      phi_z = phi_and_grad(P, z, nullptr);
      const double slack = 8.0 * std::numeric_limits<double>::epsilon() * (std::abs(phi_y) + std::abs(phi_z));
      if (phi_z <= phi_y + lin + quad / (2.0 * tau) + slack) break;
      tau *= 0.5;
      if (tau < 1e-300) throw SolverFailure("forward-backward: step size underflow in backtracking", residual_history);
    }
    const double Jz = functional_J(P, z);
    const double bz = dot(b, z);
    const double Fz = phi_z + Jz - bz;
    ++sol.inner_iterations;

    // Near the minimizer, high-frequency error components change F by less
    // than its rounding error; compare at that resolution.
    const double f_round = 16.0 * std::numeric_limits<double>::epsilon() * (std::abs(phi_z) + std::abs(Jz) + std::abs(bz));
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    bool restart = false;
    if (Fz <= Fx + f_round) {
      // Gradient-style restart: the step reverses the momentum direction.
      double c = 0.0;
      for (std::size_t i : interior) c += (y[i] - z[i]) * (z[i] - x[i]);
      restart = c > 0.0;
      x_prev = x;
      x = z;
      Fx = Fz;
    } else {
      restart = true;
      x_prev = x;
    }
    sol.energy.push_back(Fx);

    if (restart) {
      t = 1.0;
      y = x;
    } else {
      const double w1 = t / t_next, w2 = (t - 1.0) / t_next;
      for (std::size_t i : interior) y[i] = x[i] + w1 * (z[i] - x[i]) + w2 * (x[i] - x_prev[i]);
      t = t_next;
    }
    tau *= 1.05;

    if (k % check_every == 0) {
      const double r = prox_residual(P, x, b, tol.tau_ref);
      residual_history.push_back(r);
      if (r <= tol.stat) {
        sol.u = x;
        return true;
      }
    }
  }
  sol.u = x;
  return false;
}

/// Damped semismooth Newton (primal-dual active set) iteration.
///
/// Each step classifies every interior node from a Jacobi-scaled prediction
/// y_i = u_i + s_i (b - A u)_i / m_i, s_i = m_i / H_ii: nodes whose resolvent
/// lands on a knot are pinned there, the others follow the linear piece of h
/// they land on. The linearized system (H + mu K1 + diag(m sigma)) on free
/// nodes is solved by sparse LDL^T, where H is the Hessian of Phi assembled
/// from element flux Jacobians and K1 the unit stiffness (Levenberg-Marquardt
/// term, zero for linear fluxes). A line search keeps F non-increasing.
inline bool newton_active_set(const DiscreteProblem& P, std::span<const double> b, const ViTolerances& tol,
                              ViSolution& sol, std::vector<double>& residual_history) {
  const Mesh& mesh = P.mesh();
  const auto& m = P.mass();
  const auto& interior = P.interior();
  const auto& beta = P.graph();
  const auto& op = P.op();
  const std::size_t n = P.size();
  const std::size_t ne = mesh.num_elements();
  const std::size_t k = mesh.element_size();
  const int dim = mesh.dim();
  const bool linear = op.is_linear();

  std::vector<long> dof(n, -1);
  for (std::size_t q = 0; q < interior.size(); ++q) dof[interior[q]] = static_cast<long>(q);

  using Jac = std::array<double, 4>;  // row-major 2x2
  std::vector<Jac> jac(ne);
  auto element_jacobians = [&](std::span<const double> u) {
    parallel_for(ne, [&](std::size_t e) {
      const Vec2& x = mesh.centroid(e);
      if (linear) {
        const double c = op.linear_coefficient(x);
        jac[e] = {c, 0.0, 0.0, c};
        return;
      }
      const Vec2 xi = gradient(mesh, u, e);
      const double h = 1e-7 * std::max(norm(xi), 1e-4);
      Jac J{};
      for (int c = 0; c < dim; ++c) {
        Vec2 xp = xi, xm = xi;
        xp[static_cast<std::size_t>(c)] += h;
        xm[static_cast<std::size_t>(c)] -= h;
        const Vec2 ap = op.flux(x, xp), am = op.flux(x, xm);
        for (int r = 0; r < 2; ++r) J[static_cast<std::size_t>(2 * r + c)] = (ap[static_cast<std::size_t>(r)] - am[static_cast<std::size_t>(r)]) / (2.0 * h);
      }
      const double off = 0.5 * (J[1] + J[2]);  // symmetric part: Phi has a symmetric Hessian
      jac[e] = {J[0], off, off, J[3]};
    });
  };

  NodalField u = sol.u;
  double Fu = sol.energy.empty() ? objective(P, u, b) : sol.energy.back();
  double mu = linear ? 0.0 : 1.0;
  std::size_t failures = 0;
  std::vector<ResolventPiece> pieces(n);
  std::vector<long> free_index(n, -1);
  std::vector<Eigen::Triplet<double>> trip;

  for (std::size_t it = 0; it < tol.max_active_set_iterations; ++it) {
    element_jacobians(u);
    const NodalField Au = apply_A(P, u);

    // Interior-interior entries of H + mu K1, and its diagonal.
    struct Entry {
      std::size_t i, j;
      double v;
    };
    std::vector<Entry> entries;
    entries.reserve(ne * k * k);
    NodalField diag(n, 0.0);
    for (std::size_t e = 0; e < ne; ++e) {
      const auto& el = mesh.element(e);
      const Jac& J = jac[e];
      for (std::size_t a = 0; a < k; ++a) {
        if (dof[el[a]] < 0) continue;
        const Vec2& ga = mesh.basis_gradient(e, a);
        for (std::size_t c = 0; c < k; ++c) {
          if (dof[el[c]] < 0) continue;
          const Vec2& gc = mesh.basis_gradient(e, c);
          const Vec2 Jg{J[0] * gc[0] + J[1] * gc[1], J[2] * gc[0] + J[3] * gc[1]};
          const double v = (dot(ga, Jg) + mu * dot(ga, gc)) * mesh.measure(e);
          entries.push_back({el[a], el[c], v});
          if (a == c) diag[el[a]] += v;
        }
      }
    }

    NodalField target(n, 0.0);  // pinned values
    std::size_t nf = 0;
    for (std::size_t i : interior) {
      const double s = diag[i] > 0.0 ? m[i] / diag[i] : 1.0;
      pieces[i] = beta.resolvent_piece(s, u[i] + s * (b[i] - Au[i]) / m[i]);
      free_index[i] = pieces[i].pinned ? -1 : static_cast<long>(nf++);
      if (pieces[i].pinned) target[i] = pieces[i].x;
    }

    Eigen::VectorXd rhs(static_cast<Eigen::Index>(nf));
    trip.clear();
    for (std::size_t i : interior) {
      const long fi = free_index[i];
      if (fi < 0) continue;
      const auto& pc = pieces[i];
      rhs[fi] = b[i] - Au[i] - m[i] * (pc.value + pc.slope * (u[i] - pc.anchor));
      trip.emplace_back(fi, fi, m[i] * pc.slope);
    }
    for (const auto& en : entries) {
      const long fi = free_index[en.i];
      if (fi < 0) continue;
      const long fj = free_index[en.j];
      if (fj >= 0) {
        trip.emplace_back(fi, fj, en.v);
      } else {
        rhs[fi] -= en.v * (target[en.j] - u[en.j]);
      }
    }

    NodalField u_new = u;
    for (std::size_t i : interior) {
      if (pieces[i].pinned) u_new[i] = target[i];
    }
    if (nf > 0) {
      Eigen::SparseMatrix<double> K(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(nf));
      K.setFromTriplets(trip.begin(), trip.end());
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(K);
      if (chol.info() != Eigen::Success) break;
      const Eigen::VectorXd delta = chol.solve(rhs);
      if (chol.info() != Eigen::Success || !delta.allFinite()) break;
      for (std::size_t i : interior) {
        if (free_index[i] >= 0) u_new[i] = u[i] + delta[free_index[i]];
      }
    }

    // Largest step 2^-q that does not increase F (to rounding).
    double step = 1.0;
    NodalField trial = u_new;
    double Ft = objective(P, trial, b);
    const double slack = 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(Fu) + std::abs(dot(b, u)));
    while (!(Ft <= Fu + slack)) {
      step *= 0.5;
      if (step < 1e-6) break;
      for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + step * (u_new[i] - u[i]);
      Ft = objective(P, trial, b);
    }
    if (step < 1e-6) {
      if (linear || ++failures > 30) break;
      mu = std::max(10.0 * mu, 1.0);
      continue;
    }
    failures = 0;
    if (!linear) mu = step == 1.0 ? 0.1 * mu : 4.0 * mu;
    u = std::move(trial);
    Fu = std::min(Ft, Fu);
    sol.energy.push_back(Fu);
    ++sol.inner_iterations;

    const double r = prox_residual(P, u, b, tol.tau_ref);
    residual_history.push_back(r);
    if (r <= tol.stat) {
      sol.u = u;
      return true;
    }
  }
  sol.u = u;
  return false;
}

}  // namespace detail

/// Solves the variational inequality for the load vector b.
inline ViSolution solve_vi_load(const DiscreteProblem& P, std::span<const double> b, std::span<const double> u_init,
                                const ViTolerances& tol = {}) {
  detail::check_size(P, b, "solve_vi");
  detail::check_size(P, u_init, "solve_vi");
  detail::require_supported(P);
  for (double v : b) {
    if (!std::isfinite(v)) throw InvalidArgument("solve_vi: load must be finite");
  }

  ViSolution sol;
  sol.u.assign(u_init.begin(), u_init.end());
  zero_boundary(P.mesh(), sol.u);
  sol.energy.push_back(detail::objective(P, sol.u, b));
  std::vector<double> history;

  const double r0 = prox_residual(P, sol.u, b, tol.tau_ref);
  history.push_back(r0);
  bool converged = r0 <= tol.stat;
  if (!converged && tol.fast_path) {
    sol.method = ViMethod::newton;
    converged = detail::newton_active_set(P, b, tol, sol, history);
  }
  if (!converged) {
    if (!P.op().has_potential() && !P.op().is_linear()) detail::require_supported(P);
    sol.method = ViMethod::forward_backward;
    converged = detail::forward_backward(P, b, tol, sol, history);
  }
  if (!converged) {
    throw SolverFailure("solve_vi: no convergence within " + std::to_string(tol.max_iterations) +
                            " iterations (last residual " + sci(history.back()) + ")",
                        history);
  }
  detail::finish(P, b, tol, sol);
  return sol;
}

/// u = T z: the solution for the frozen load b = m * g(z).
inline ViSolution solve_vi(const DiscreteProblem& P, std::span<const double> z, std::span<const double> u_init,
                           const ViTolerances& tol = {}) {
  const NodalField b = load_from(P, z);
  return solve_vi_load(P, b, u_init, tol);
}

/// Checks T z1 <= T z2 + tol for z1 <= z2.
inline bool check_T_monotone(const DiscreteProblem& P, std::span<const double> z1, std::span<const double> z2,
                             double tol, const ViTolerances& vi_tol = {}) {
  if (!compare(z1, z2, 0.0)) throw InvalidArgument("check_T_monotone: requires z1 <= z2 nodally");
  const NodalField zero(P.size(), 0.0);
  const auto u1 = solve_vi(P, z1, zero, vi_tol);
  const auto u2 = solve_vi(P, z2, zero, vi_tol);
  return compare(u1.u, u2.u, tol);
}

}  // namespace monovi
