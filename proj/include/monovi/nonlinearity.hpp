#pragma once

// The split f = g - h into nondecreasing parts and the superposition
// (Nemitskii) operator G(u)(x) = g(u(x)) acting on nodal fields.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "monovi/error.hpp"
#include "monovi/monotone_graph.hpp"

namespace monovi {

/// Which one-sided limit g takes at its jumps. Maximal solutions need a
/// right-continuous g, minimal solutions a left-continuous one.
enum class Side { right, left };

inline const char* to_string(Side s) { return s == Side::right ? "right" : "left"; }

struct Decomposition {
  PiecewiseFunction g;
  PiecewiseFunction h;
  Side g_side = Side::right;

  /// f(s) = g(s) - h(s), using the g_side limit for both parts.
  double f(double s) const {
    return g_side == Side::right ? g.right(s) - h.right(s) : g.left(s) - h.left(s);
  }
};

inline double eval_g(const Decomposition& d, double s) { return d.g_side == Side::right ? d.g.right(s) : d.g.left(s); }

class NemitskiiG {
 public:
  NemitskiiG() = default;
  NemitskiiG(PiecewiseFunction g, Side side) : g_(std::move(g)), side_(side) {}

  double operator()(double s) const { return side_ == Side::right ? g_.right(s) : g_.left(s); }

  const PiecewiseFunction& g() const noexcept { return g_; }
  Side side() const noexcept { return side_; }

 private:
  PiecewiseFunction g_;
  Side side_ = Side::right;
};

inline std::vector<double> apply_G(const NemitskiiG& G, std::span<const double> u) {
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i])) throw InvalidArgument("apply_G: non-finite nodal value at index " + std::to_string(i));
    out[i] = G(u[i]);
  }
  return out;
}

struct MonotonicityCheck {
  double min_increment = std::numeric_limits<double>::infinity();  // min over adjacent samples of f(s2) - f(s1)
  std::optional<double> violation_at;                              // first s1 where f(s2) < f(s1)
  bool ok() const { return !violation_at.has_value(); }
};

struct DecompositionReport {
  MonotonicityCheck g;
  MonotonicityCheck h;
  bool passed() const { return g.ok() && h.ok(); }
};

namespace detail {

/// Sweeps an increasing grid through [lo, hi] plus both sides of every knot,
/// comparing consecutive one-sided values.
inline MonotonicityCheck sample_nondecreasing(const PiecewiseFunction& fn, std::size_t sample_count) {
  std::vector<double> pts;
  double lo = -1.0, hi = 1.0;
  for (double t : fn.knots()) {
    lo = std::min(lo, t - 1.0);
    hi = std::max(hi, t + 1.0);
  }
  const std::size_t n = std::max<std::size_t>(sample_count, 2);
  for (std::size_t i = 0; i < n; ++i) pts.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  for (double t : fn.knots()) pts.push_back(t);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  MonotonicityCheck chk;
  double prev_right = fn.right(pts[0]);
  double prev_s = pts[0];
  if (fn.right(pts[0]) < fn.left(pts[0])) {
    chk.violation_at = pts[0];
    chk.min_increment = fn.right(pts[0]) - fn.left(pts[0]);
  }
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double s = pts[i];
    const double inc = fn.left(s) - prev_right;
    const double jump = fn.right(s) - fn.left(s);
    chk.min_increment = std::min({chk.min_increment, inc, jump});
    if ((inc < 0.0 || jump < 0.0) && !chk.violation_at) chk.violation_at = inc < 0.0 ? prev_s : s;
    prev_right = fn.right(s);
    prev_s = s;
  }
  return chk;
}

}  // namespace detail

/// Sampled check that both parts of the split are nondecreasing.
inline DecompositionReport validate_decomposition(const Decomposition& d, std::size_t sample_count = 1000) {
  return {detail::sample_nondecreasing(d.g, sample_count), detail::sample_nondecreasing(d.h, sample_count)};
}

}  // namespace monovi
