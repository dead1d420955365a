#pragma once

// Leray-Lions fluxes a(x, xi) for -div a(x, grad u), with sampled checks of
// coercivity, strict monotonicity and growth, and an optional potential phi
// with grad_xi phi = a used by the variational solvers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include "monovi/error.hpp"

namespace monovi {

/// Points and gradients. One-dimensional problems use the first component.
using Vec2 = std::array<double, 2>;

inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Vec2& a) { return std::hypot(a[0], a[1]); }

struct OperatorSpec {
  using Flux = std::function<Vec2(const Vec2& x, const Vec2& xi)>;
  using Potential = std::function<double(const Vec2& x, const Vec2& xi)>;
  using Scalar = std::function<double(const Vec2& x)>;

  std::string name;
  double p = 2.0;
  double lambda = 1.0;  // coercivity constant
  double alpha = 1.0;   // growth constant
  Scalar k = [](const Vec2&) { return 0.0; };
  Flux flux;
  Potential potential;           // empty for non-variational fluxes
  Scalar linear_coefficient;     // set iff flux(x, xi) = c(x) * xi

  double p_conj() const { return p / (p - 1.0); }
  bool has_potential() const { return static_cast<bool>(potential); }
  bool is_linear() const { return static_cast<bool>(linear_coefficient); }
};

namespace detail {

inline double plap_factor(double p, const Vec2& xi) {
  const double r = norm(xi);
  if (r == 0.0) return 0.0;
  return p == 2.0 ? 1.0 : std::pow(r, p - 2.0);
}

}  // namespace detail

/// a(x, xi) = c(x) |xi|^{p-2} xi with c_min <= c <= c_max. The weight is
/// trusted to respect the stated bounds; validate() samples them.
inline OperatorSpec weighted_plaplacian(double p, OperatorSpec::Scalar weight, double c_min, double c_max) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidArgument("p-Laplacian: exponent p must be > 1");
  if (!(c_min > 0.0) || !(c_max >= c_min) || !std::isfinite(c_max)) {
    throw InvalidArgument("p-Laplacian: weight bounds must satisfy 0 < c_min <= c_max < inf");
  }
  OperatorSpec op;
  op.name = "weighted_p_laplacian";
  op.p = p;
  op.lambda = c_min;
  op.alpha = c_max;
  op.flux = [p, weight](const Vec2& x, const Vec2& xi) {
    const double f = weight(x) * detail::plap_factor(p, xi);
    return Vec2{f * xi[0], f * xi[1]};
  };
  op.potential = [p, weight](const Vec2& x, const Vec2& xi) {
    const double r = norm(xi);
    return weight(x) * (p == 2.0 ? 0.5 * r * r : std::pow(r, p) / p);
  };
  if (p == 2.0) op.linear_coefficient = weight;
  return op;
}

/// a(x, xi) = |xi|^{p-2} xi.
inline OperatorSpec plaplacian(double p) {
  auto op = weighted_plaplacian(p, [](const Vec2&) { return 1.0; }, 1.0, 1.0);
  op.name = "p_laplacian";
  return op;
}

struct ValidationReport {
  std::size_t samples = 0;
  double coercivity_margin = std::numeric_limits<double>::infinity();    // min (a.xi - lambda|xi|^p)/(1 + lambda|xi|^p)
  double monotonicity_margin = std::numeric_limits<double>::infinity();  // min (a(xi)-a(eta)).(xi-eta)
  double growth_margin = std::numeric_limits<double>::infinity();        // min (alpha(k + |xi|^{p-1}) - |a|)/(1 + alpha(k + |xi|^{p-1}))
  double potential_error = 0.0;  // max relative finite-difference mismatch of grad phi vs a
  bool coercivity_ok = true;
  bool monotonicity_ok = true;
  bool growth_ok = true;
  bool potential_ok = true;

  bool passed() const { return coercivity_ok && monotonicity_ok && growth_ok && potential_ok; }
};

/// Sampled certification of the structural hypotheses on x in `box`
/// (lower-left, upper-right corners). Gradient magnitudes are drawn
/// log-uniformly over [1e-3, 1e3].
inline ValidationReport validate(const OperatorSpec& op, std::size_t sample_count, std::uint64_t seed,
                                 Vec2 box_lo = {0.0, 0.0}, Vec2 box_hi = {1.0, 1.0}, double tol = 1e-12) {
  if (sample_count < 1) throw InvalidArgument("validate: sample_count must be >= 1");
  if (!op.flux) throw InvalidArgument("validate: operator has no flux");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.14159265358979323846);
  std::uniform_real_distribution<double> log_mag(-3.0, 3.0);
  auto draw_vec = [&] {
    const double r = std::pow(10.0, log_mag(rng));
    const double t = angle(rng);
    return Vec2{r * std::cos(t), r * std::sin(t)};
  };

  ValidationReport rep;
  rep.samples = sample_count;
  for (std::size_t s = 0; s < sample_count; ++s) {
    const Vec2 x{box_lo[0] + (box_hi[0] - box_lo[0]) * unit(rng), box_lo[1] + (box_hi[1] - box_lo[1]) * unit(rng)};
    const Vec2 xi = draw_vec();
    const Vec2 eta = draw_vec();
    const Vec2 a_xi = op.flux(x, xi);
    const Vec2 a_eta = op.flux(x, eta);

    const double lam_term = op.lambda * std::pow(norm(xi), op.p);
    rep.coercivity_margin = std::min(rep.coercivity_margin, (dot(a_xi, xi) - lam_term) / (1.0 + lam_term));

    const Vec2 d{xi[0] - eta[0], xi[1] - eta[1]};
    if (norm(d) >= 1e-12) {
      const Vec2 da{a_xi[0] - a_eta[0], a_xi[1] - a_eta[1]};
      rep.monotonicity_margin = std::min(rep.monotonicity_margin, dot(da, d));
    }

    const double bound = op.alpha * (op.k(x) + std::pow(norm(xi), op.p - 1.0));
    rep.growth_margin = std::min(rep.growth_margin, (bound - norm(a_xi)) / (1.0 + bound));

    if (op.has_potential()) {
      const double r = norm(xi);
      const double h = 1e-6 * std::max(r, 1e-3);
      Vec2 fd{};
      for (int c = 0; c < 2; ++c) {
        Vec2 xp = xi, xm = xi;
        xp[c] += h;
        xm[c] -= h;
        fd[c] = (op.potential(x, xp) - op.potential(x, xm)) / (2.0 * h);
      }
      const Vec2 diff{fd[0] - a_xi[0], fd[1] - a_xi[1]};
      rep.potential_error = std::max(rep.potential_error, norm(diff) / std::max(norm(a_xi), 1e-300));
    }
  }
  rep.coercivity_ok = rep.coercivity_margin >= -tol;
  rep.monotonicity_ok = rep.monotonicity_margin > 0.0;
  rep.growth_ok = rep.growth_margin >= -tol;
  rep.potential_ok = !op.has_potential() || rep.potential_error <= 1e-6;
  return rep;
}

}  // namespace monovi
