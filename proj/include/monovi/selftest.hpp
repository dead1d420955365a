#pragma once

// Embedded invariant suites run by `monovi selftest` on fixed seeds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "monovi/assembly.hpp"
#include "monovi/error.hpp"
#include "monovi/mesh.hpp"
#include "monovi/monotone_graph.hpp"
#include "monovi/operator.hpp"
#include "monovi/verify.hpp"
#include "monovi/vi_solver.hpp"

namespace monovi {

struct SelftestOptions {
  std::uint64_t seed = 20240611;
  /// Test-only corruption: negates the flux seen by apply_A while leaving
  /// the energy untouched.
  bool flip_apply_a_sign = false;
};

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline OperatorSpec selftest_operator(double p, const SelftestOptions& opt) {
  OperatorSpec op = plaplacian(p);
  if (opt.flip_apply_a_sign) {
    op.flux = [inner = op.flux](const Vec2& x, const Vec2& xi) {
      const Vec2 f = inner(x, xi);
      return Vec2{-f[0], -f[1]};
    };
    op.linear_coefficient = nullptr;
  }
  return op;
}

inline std::vector<PiecewiseFunction> selftest_graphs() {
  return {PiecewiseFunction::heaviside(0.2, 5.0),
          PiecewiseFunction(PiecewiseSpec{0.0, {}, {1.0}, {Jump{0.3, 2.0}}}),
          PiecewiseFunction(PiecewiseSpec{0.0, {}, {0.0}, {Jump{-0.4, 1.0}, Jump{0.5, 3.0}}})};
}

inline NodalField random_field(const Mesh& mesh, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  NodalField u(mesh.num_nodes());
  for (auto& v : u) v = d(rng);
  zero_boundary(mesh, u);
  return u;
}

inline SuiteResult suite_graph(const SelftestOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> ys(-3.0, 3.0), ls(-2.0, 1.0);
  double worst_incl = 0.0, worst_lip = 0.0, worst_sub = 0.0;
  for (const auto& h : selftest_graphs()) {
    const MonotoneGraph beta(h);
    const auto& j = beta.potential();
    for (int k = 0; k < 400; ++k) {
      const double lam = std::pow(10.0, ls(rng));
      const double y1 = ys(rng), y2 = ys(rng);
      const double x1 = beta.resolvent(lam, y1), x2 = beta.resolvent(lam, y2);
      worst_incl = std::max(worst_incl, beta.at(x1).distance((y1 - x1) / lam) / (1.0 + std::abs(y1) / lam));
      worst_lip = std::max(worst_lip, std::abs(x1 - x2) - std::abs(y1 - y2));
      const double r = ys(rng), s = ys(rng);
      const Interval b = beta.at(r);
      for (double v : {b.lo, b.hi}) worst_sub = std::max(worst_sub, j(r) + v * (s - r) - j(s));
    }
    if (j(0.0) != 0.0) return {"graph", false, "potential does not vanish at 0"};
  }
  const bool ok = worst_incl <= 1e-12 && worst_lip <= 1e-12 && worst_sub <= 1e-10;
  return {"graph", ok,
          "inclusion " + sci(worst_incl) + ", expansion " + sci(worst_lip) + ", subgradient " +
              sci(worst_sub)};
}

inline SuiteResult suite_truncation(const SelftestOptions& opt) {
  std::mt19937_64 rng(opt.seed + 1);
  const Mesh mesh = build_mesh({1, 0.0, 1.0, 0.0, 1.0, 50, 2});
  double worst = 0.0;
  for (const auto& h : selftest_graphs()) {
    const DiscreteProblem P(mesh, selftest_operator(2.0, opt), Decomposition{PiecewiseFunction::constant(1.0), h});
    for (int k = 0; k < 100; ++k) {
      const NodalField u = random_field(mesh, rng, -1.0, 1.0), w = random_field(mesh, rng, -1.0, 1.0);
      const double scale = 1.0 + std::abs(functional_J(P, u)) + std::abs(functional_J(P, w));
      worst = std::max(worst, std::abs(truncation_identity_check(P, u, w)) / scale);
    }
  }
  return {"truncation-identity", worst <= 1e-12, "max scaled residual " + sci(worst)};
}

inline SuiteResult suite_T_monotone(const SelftestOptions& opt) {
  try {
    std::mt19937_64 rng(opt.seed + 2);
    const Mesh mesh = build_mesh({1, 0.0, 1.0, 0.0, 1.0, 50, 2});
    const DiscreteProblem P(mesh, selftest_operator(2.0, opt),
                            Decomposition{PiecewiseFunction(PiecewiseSpec{1.0, {0.0, 0.25}, {0.0, 4.0, 0.0}, {}}),
                                          PiecewiseFunction::heaviside(0.1, 5.0)});
    ViTolerances vt;
    vt.stat = 1e-11;
    vt.max_iterations = 20000;
    const auto [ub, vb] = linear_bracket_helper(P, 2.0, 1e-9, vt);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 10; ++k) {
      NodalField z1(P.size()), z2(P.size());
      for (std::size_t i = 0; i < z1.size(); ++i) {
        const double a = unit(rng) * ub[i], b = unit(rng) * ub[i];
        z1[i] = std::min(a, b);
        z2[i] = std::max(a, b);
      }
      if (!check_T_monotone(P, z1, z2, 1e-8, vt)) return {"T-monotone", false, "order violated on pair " + std::to_string(k)};
    }
    return {"T-monotone", true, "10 ordered pairs"};
  } catch (const Error& e) {
    return {"T-monotone", false, e.what()};
  }
}

inline SuiteResult suite_gradient(const SelftestOptions& opt) {
  std::mt19937_64 rng(opt.seed + 3);
  std::string detail;
  bool ok = true;
  for (int dim : {1, 2}) {
    const Mesh mesh = build_mesh(dim == 1 ? MeshConfig{1, 0.0, 1.0, 0.0, 1.0, 20, 2} : MeshConfig{2, 0.0, 1.0, 0.0, 1.0, 6, 6});
    for (double p : {2.0, 1.5, 3.0}) {
      const DiscreteProblem P(mesh, selftest_operator(p, opt), Decomposition{PiecewiseFunction::constant(0.0), {}});
      const NodalField u = random_field(mesh, rng, -1.0, 1.0);
      const NodalField Au = apply_A(P, u);
      double err = 0.0, scale = 0.0;
      for (std::size_t i : P.interior()) {
        const double step = 1e-5;
        NodalField up = u, um = u;
        up[i] += step;
        um[i] -= step;
        const double fd = (energy_Phi(P, up) - energy_Phi(P, um)) / (2.0 * step);
        err = std::max(err, std::abs(fd - Au[i]));
        scale = std::max(scale, std::abs(Au[i]));
      }
      const double rel = err / std::max(scale, 1e-300);
      const double tol = p == 2.0 ? 1e-6 : 1e-4;
      if (!(rel <= tol)) ok = false;
      char label[32];
      std::snprintf(label, sizeof label, "dim %d p %g: ", dim, p);
      detail += label + sci(rel) + "; ";
    }
  }
  return {"gradient-consistency", ok, detail};
}

inline SuiteResult suite_coercivity(const SelftestOptions& opt) {
  std::mt19937_64 rng(opt.seed + 4);
  const Mesh mesh = build_mesh({2, 0.0, 1.0, 0.0, 1.0, 8, 8});
  double worst = 0.0;
  bool sampled = true;
  for (double p : {2.0, 1.5, 3.0}) {
    const OperatorSpec op = selftest_operator(p, opt);
    sampled = sampled && validate(op, 200, opt.seed).passed();
    const DiscreteProblem P(mesh, op, Decomposition{PiecewiseFunction::constant(0.0), {}});
    for (int k = 0; k < 100; ++k) {
      const NodalField u = random_field(mesh, rng, -2.0, 2.0);
      const double lhs = dot(apply_A(P, u), u);
      const double rhs = op.lambda * gradient_norm_p(P, u);
      worst = std::max(worst, (rhs - lhs) / (1.0 + rhs));
    }
  }
  return {"coercivity", sampled && worst <= 1e-12,
          std::string("pointwise samples ") + (sampled ? "pass" : "fail") + ", discrete deficit " + sci(worst)};
}

}  // namespace detail

inline std::vector<SuiteResult> selftest(const SelftestOptions& opt = {}) {
  return {detail::suite_graph(opt), detail::suite_truncation(opt), detail::suite_T_monotone(opt),
          detail::suite_gradient(opt), detail::suite_coercivity(opt)};
}

}  // namespace monovi
