#pragma once

// Discrete operator A, energy Phi, lumped functional J and Nemitskii loads on
// a P1 mesh. Flux terms use one-point (centroid) quadrature, exact for
// x-independent fluxes since P1 gradients are element-constant.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "monovi/detail/parallel.hpp"
#include "monovi/error.hpp"
#include "monovi/mesh.hpp"
#include "monovi/monotone_graph.hpp"
#include "monovi/nonlinearity.hpp"
#include "monovi/operator.hpp"

namespace monovi {

/// Mesh, operator, graph beta, Nemitskii G and lumped masses of one problem.
///
/// h is normalized on construction so that 0 is in beta(0); the constant
/// added to h is added to g as well, leaving f = g - h unchanged.
class DiscreteProblem {
 public:
  DiscreteProblem(Mesh mesh, OperatorSpec op, Decomposition d)
      : mesh_(std::move(mesh)), op_(std::move(op)), beta_(d.h) {
    if (!op_.flux) throw InvalidArgument("problem: operator has no flux");
    if (!d.g.nondecreasing()) throw InvalidArgument("problem: g must be nondecreasing (slopes >= 0, jumps > 0)");
    d.h = beta_.h();
    if (beta_.shift() != 0.0) d.g = d.g.shifted(beta_.shift());
    G_ = NemitskiiG(d.g, d.g_side);
    decomposition_ = std::move(d);
  }

  const Mesh& mesh() const noexcept { return mesh_; }
  const OperatorSpec& op() const noexcept { return op_; }
  const MonotoneGraph& graph() const noexcept { return beta_; }
  const NemitskiiG& G() const noexcept { return G_; }
  /// The normalized split actually used.
  const Decomposition& decomposition() const noexcept { return decomposition_; }
  const std::vector<double>& mass() const noexcept { return mesh_.lumped_mass(); }
  const std::vector<std::size_t>& interior() const noexcept { return mesh_.interior(); }
  std::size_t size() const noexcept { return mesh_.num_nodes(); }
  double normalization_shift() const noexcept { return beta_.shift(); }

  /// Same mesh, operator and g, with h replaced by zero.
  DiscreteProblem without_graph() const {
    Decomposition d = decomposition_;
    d.h = PiecewiseFunction{};
    return DiscreteProblem(mesh_, op_, std::move(d));
  }

 private:
  Mesh mesh_;
  OperatorSpec op_;
  MonotoneGraph beta_;
  NemitskiiG G_;
  Decomposition decomposition_;
};

namespace detail {

inline void check_size(const DiscreteProblem& P, std::span<const double> u, const char* what) {
  if (u.size() != P.size()) {
    throw InvalidArgument(std::string(what) + ": field has " + std::to_string(u.size()) + " entries, mesh has " +
                          std::to_string(P.size()) + " nodes");
  }
}

inline std::vector<Vec2> element_gradients(const Mesh& mesh, std::span<const double> u) {
  std::vector<Vec2> g(mesh.num_elements());
  parallel_for(g.size(), [&](std::size_t e) { g[e] = gradient(mesh, u, e); });
  return g;
}

}  // namespace detail

/// (A u)_i = sum_e a(x_e, grad u|_e) . grad phi_i|_e |e|, reported at every
/// node including Dirichlet ones.
inline NodalField apply_A(const DiscreteProblem& P, std::span<const double> u) {
  detail::check_size(P, u, "apply_A");
  const Mesh& mesh = P.mesh();
  const auto grads = detail::element_gradients(mesh, u);
  std::vector<Vec2> flux(grads.size());
  parallel_for(flux.size(), [&](std::size_t e) { flux[e] = P.op().flux(mesh.centroid(e), grads[e]); });
  NodalField r(P.size(), 0.0);
  for (std::size_t e = 0; e < flux.size(); ++e) {
    if (!std::isfinite(flux[e][0]) || !std::isfinite(flux[e][1])) {
      throw Error("apply_A: non-finite flux on element " + std::to_string(e));
    }
    const auto& el = mesh.element(e);
    for (std::size_t a = 0; a < mesh.element_size(); ++a) {
      r[el[a]] += dot(flux[e], mesh.basis_gradient(e, a)) * mesh.measure(e);
    }
  }
  return r;
}

/// Phi(u) = sum_e phi(x_e, grad u|_e) |e|; its gradient is apply_A.
inline double energy_Phi(const DiscreteProblem& P, std::span<const double> u) {
  detail::check_size(P, u, "energy_Phi");
  if (!P.op().has_potential()) throw UnsupportedOperator("energy_Phi: operator '" + P.op().name + "' has no potential");
  const Mesh& mesh = P.mesh();
  const auto grads = detail::element_gradients(mesh, u);
  std::vector<double> vals(grads.size());
  parallel_for(vals.size(), [&](std::size_t e) { vals[e] = P.op().potential(mesh.centroid(e), grads[e]) * mesh.measure(e); });
  double s = 0.0;
  for (double v : vals) s += v;
  return s;
}

/// J(u) = sum_i m_i j(u_i).
inline double functional_J(const DiscreteProblem& P, std::span<const double> u) {
  detail::check_size(P, u, "functional_J");
  const auto& m = P.mass();
  const auto& j = P.graph().potential();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += m[i] * j(u[i]);
  return s;
}

/// b_i = m_i g(z_i).
inline NodalField load_from(const DiscreteProblem& P, std::span<const double> z) {
  detail::check_size(P, z, "load_from");
  NodalField b = apply_G(P.G(), z);
  const auto& m = P.mass();
  for (std::size_t i = 0; i < b.size(); ++i) b[i] *= m[i];
  return b;
}

/// b_i = m_i c.
inline NodalField constant_load(const DiscreteProblem& P, double c) {
  NodalField b = P.mass();
  for (double& v : b) v *= c;
  return b;
}

/// J(u - (u-w)^+) - J(u) + J(w + (u-w)^+) - J(w), which vanishes for any pair.
inline double truncation_identity_check(const DiscreteProblem& P, std::span<const double> u,
                                        std::span<const double> w) {
  detail::check_size(P, u, "truncation_identity_check");
  detail::check_size(P, w, "truncation_identity_check");
  const NodalField t = positive_part(subtract(u, w));
  return functional_J(P, subtract(u, t)) - functional_J(P, u) + functional_J(P, add(w, t)) - functional_J(P, w);
}

/// sum_e |grad u|_e|^p |e|, the discrete p-th power of the W^{1,p} seminorm.
inline double gradient_norm_p(const DiscreteProblem& P, std::span<const double> u) {
  detail::check_size(P, u, "gradient_norm_p");
  const Mesh& mesh = P.mesh();
  const double p = P.op().p;
  double s = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) s += std::pow(norm(gradient(mesh, u, e)), p) * mesh.measure(e);
  return s;
}

}  // namespace monovi
