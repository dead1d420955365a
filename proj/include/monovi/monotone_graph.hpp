#pragma once

// Nondecreasing scalar functions with finitely many jumps, the maximal
// monotone graph beta(s) = [h^-(s), h^+(s)] they induce, the convex potential
// j with dj = beta, and the resolvent (I + lambda*beta)^{-1}.
//
// A function is stored as a continuous piecewise-linear base plus a jump
// list, so one-sided limits and the piecewise-quadratic potential are exact.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "monovi/error.hpp"

namespace monovi {

struct Jump {
  double at = 0.0;
  double height = 0.0;
};

/// Raw, serializable description of a piecewise-linear function with jumps.
///
/// slopes[0] applies on (-inf, breakpoints[0]), slopes[k+1] on
/// [breakpoints[k], breakpoints[k+1]). value_at_zero is the value of the
/// continuous base at s = 0, i.e. before any jump contribution.
struct PiecewiseSpec {
  double value_at_zero = 0.0;
  std::vector<double> breakpoints;
  std::vector<double> slopes{0.0};
  std::vector<Jump> jumps;
};

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v, double tol = 0.0) const { return lo - tol <= v && v <= hi + tol; }
  double distance(double v) const { return v < lo ? lo - v : (v > hi ? v - hi : 0.0); }
  double project(double v) const { return std::clamp(v, lo, hi); }
  double width() const { return hi - lo; }
};

/// Piecewise-linear function with finitely many jumps. Monotonicity is not
/// enforced here; see nondecreasing() and MonotoneGraph.
class PiecewiseFunction {
 public:
  PiecewiseFunction() : PiecewiseFunction(PiecewiseSpec{}) {}

  explicit PiecewiseFunction(PiecewiseSpec spec) : spec_(std::move(spec)) {
    const auto& b = spec_.breakpoints;
    if (!std::isfinite(spec_.value_at_zero)) throw InvalidArgument("piecewise: value_at_zero must be finite");
    if (spec_.slopes.size() != b.size() + 1) {
      throw InvalidArgument("piecewise: expected " + std::to_string(b.size() + 1) + " slopes for " +
                            std::to_string(b.size()) + " breakpoints, got " + std::to_string(spec_.slopes.size()));
    }
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (!std::isfinite(b[k])) throw InvalidArgument("piecewise: breakpoints must be finite");
      if (k > 0 && !(b[k - 1] < b[k])) throw InvalidArgument("piecewise: breakpoints must be strictly increasing");
    }
    for (double s : spec_.slopes) {
      if (!std::isfinite(s)) throw InvalidArgument("piecewise: slopes must be finite");
    }
    std::sort(spec_.jumps.begin(), spec_.jumps.end(), [](const Jump& a, const Jump& c) { return a.at < c.at; });
    for (std::size_t k = 0; k < spec_.jumps.size(); ++k) {
      const auto& jmp = spec_.jumps[k];
      if (!std::isfinite(jmp.at) || !std::isfinite(jmp.height)) throw InvalidArgument("piecewise: jumps must be finite");
      if (jmp.height == 0.0) throw InvalidArgument("piecewise: jump heights must be nonzero");
      if (k > 0 && spec_.jumps[k - 1].at == jmp.at) throw InvalidArgument("piecewise: jump locations must be distinct");
    }
    build_tables();
  }

  static PiecewiseFunction constant(double c) { return PiecewiseFunction(PiecewiseSpec{c, {}, {0.0}, {}}); }
  static PiecewiseFunction linear(double slope, double value_at_zero = 0.0) {
    return PiecewiseFunction(PiecewiseSpec{value_at_zero, {}, {slope}, {}});
  }
  /// height * H(s - at): zero to the left of `at`, `height` to the right.
  static PiecewiseFunction heaviside(double at, double height = 1.0) {
    return PiecewiseFunction(PiecewiseSpec{0.0, {}, {0.0}, {Jump{at, height}}});
  }

  const PiecewiseSpec& spec() const noexcept { return spec_; }

  /// h^-(s), the limit from the left.
  double left(double s) const { return base(s) + jumps_before(s, false); }
  /// h^+(s), the limit from the right.
  double right(double s) const { return base(s) + jumps_before(s, true); }

  /// Slope of the base on the piece to the right (resp. left) of s.
  double slope_right(double s) const {
    const auto& b = spec_.breakpoints;
    return spec_.slopes[static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), s) - b.begin())];
  }
  double slope_left(double s) const {
    const auto& b = spec_.breakpoints;
    return spec_.slopes[static_cast<std::size_t>(std::lower_bound(b.begin(), b.end(), s) - b.begin())];
  }

  bool has_jumps() const noexcept { return !spec_.jumps.empty(); }

  bool nondecreasing() const {
    return std::all_of(spec_.slopes.begin(), spec_.slopes.end(), [](double s) { return s >= 0.0; }) &&
           std::all_of(spec_.jumps.begin(), spec_.jumps.end(), [](const Jump& j) { return j.height > 0.0; });
  }

  /// True when the function is identically zero.
  bool is_zero() const {
    return spec_.value_at_zero == 0.0 && spec_.jumps.empty() &&
           std::all_of(spec_.slopes.begin(), spec_.slopes.end(), [](double s) { return s == 0.0; });
  }

  /// Sorted union of breakpoints and jump locations.
  const std::vector<double>& knots() const noexcept { return knots_; }

  PiecewiseFunction shifted(double c) const {
    PiecewiseSpec s = spec_;
    s.value_at_zero += c;
    return PiecewiseFunction(std::move(s));
  }

  friend PiecewiseFunction operator+(const PiecewiseFunction& a, const PiecewiseFunction& c) {
    PiecewiseSpec out;
    out.value_at_zero = a.base(0.0) + c.base(0.0);
    std::set_union(a.spec_.breakpoints.begin(), a.spec_.breakpoints.end(), c.spec_.breakpoints.begin(),
                   c.spec_.breakpoints.end(), std::back_inserter(out.breakpoints));
    out.slopes.assign(out.breakpoints.size() + 1, 0.0);
    out.slopes[0] = a.spec_.slopes.front() + c.spec_.slopes.front();
    for (std::size_t k = 0; k < out.breakpoints.size(); ++k) {
      out.slopes[k + 1] = a.slope_right(out.breakpoints[k]) + c.slope_right(out.breakpoints[k]);
    }
    out.jumps = a.spec_.jumps;
    for (const auto& jc : c.spec_.jumps) {
      auto it = std::find_if(out.jumps.begin(), out.jumps.end(), [&](const Jump& j) { return j.at == jc.at; });
      if (it == out.jumps.end()) {
        out.jumps.push_back(jc);
      } else {
        it->height += jc.height;
        if (it->height == 0.0) out.jumps.erase(it);
      }
    }
    return PiecewiseFunction(std::move(out));
  }

 private:
  double base(double s) const {
    const auto& b = spec_.breakpoints;
    const auto& sl = spec_.slopes;
    if (b.empty()) return spec_.value_at_zero + sl[0] * s;
    const auto idx = static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), s) - b.begin());
    if (idx == 0) return base_at_break_[0] + sl[0] * (s - b[0]);
    return base_at_break_[idx - 1] + sl[idx] * (s - b[idx - 1]);
  }

  double jumps_before(double s, bool inclusive) const {
    auto it = inclusive ? std::upper_bound(jump_at_.begin(), jump_at_.end(), s)
                        : std::lower_bound(jump_at_.begin(), jump_at_.end(), s);
    return jump_prefix_[static_cast<std::size_t>(it - jump_at_.begin())];
  }

  void build_tables() {
    const auto& b = spec_.breakpoints;
    const auto& sl = spec_.slopes;
    base_at_break_.assign(b.size(), 0.0);
    const auto i0 = static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), 0.0) - b.begin());
    for (std::size_t k = i0; k < b.size(); ++k) {
      base_at_break_[k] = (k == i0) ? spec_.value_at_zero + sl[i0] * b[k]
                                    : base_at_break_[k - 1] + sl[k] * (b[k] - b[k - 1]);
    }
    for (std::size_t k = i0; k-- > 0;) {
      base_at_break_[k] = (k + 1 == i0) ? spec_.value_at_zero - sl[i0] * (0.0 - b[k])
                                        : base_at_break_[k + 1] - sl[k + 1] * (b[k + 1] - b[k]);
    }
    jump_at_.clear();
    jump_prefix_.assign(1, 0.0);
    for (const auto& j : spec_.jumps) {
      jump_at_.push_back(j.at);
      jump_prefix_.push_back(jump_prefix_.back() + j.height);
    }
    knots_.clear();
    std::set_union(b.begin(), b.end(), jump_at_.begin(), jump_at_.end(), std::back_inserter(knots_));
  }

  PiecewiseSpec spec_;
  std::vector<double> base_at_break_;
  std::vector<double> jump_at_;
  std::vector<double> jump_prefix_;
  std::vector<double> knots_;
};

/// (h^-(s), h^+(s)) read off the representation.
inline std::pair<double, double> eval_limits(const PiecewiseFunction& h, double s) { return {h.left(s), h.right(s)}; }

/// j(s) = integral_0^s h(t) dt for a normalized nondecreasing h, stored as
/// exact per-piece quadratics anchored at the knots and at 0.
class ConvexPotential {
 public:
  ConvexPotential() = default;

  explicit ConvexPotential(const PiecewiseFunction& h) {
    anchors_ = h.knots();
    if (!std::binary_search(anchors_.begin(), anchors_.end(), 0.0)) {
      anchors_.insert(std::upper_bound(anchors_.begin(), anchors_.end(), 0.0), 0.0);
    }
    const std::size_t n = anchors_.size();
    left_value_.resize(n);
    right_value_.resize(n);
    slope_left_.resize(n);
    slope_right_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      left_value_[k] = h.left(anchors_[k]);
      right_value_[k] = h.right(anchors_[k]);
      slope_left_[k] = h.slope_left(anchors_[k]);
      slope_right_[k] = h.slope_right(anchors_[k]);
    }
    zero_ = static_cast<std::size_t>(std::lower_bound(anchors_.begin(), anchors_.end(), 0.0) - anchors_.begin());
    cumulative_.assign(n, 0.0);
    // Integrate outward from 0 so every increment carries the sign of j.
    for (std::size_t k = zero_ + 1; k < n; ++k) {
      const double d = anchors_[k] - anchors_[k - 1];
      cumulative_[k] = cumulative_[k - 1] + right_value_[k - 1] * d + 0.5 * slope_right_[k - 1] * d * d;
    }
    for (std::size_t k = zero_; k-- > 0;) {
      const double d = anchors_[k] - anchors_[k + 1];
      cumulative_[k] = cumulative_[k + 1] + left_value_[k + 1] * d + 0.5 * slope_left_[k + 1] * d * d;
    }
  }

  double operator()(double s) const {
    if (anchors_.empty()) return 0.0;
    if (s >= 0.0) {
      const auto k =
          static_cast<std::size_t>(std::upper_bound(anchors_.begin(), anchors_.end(), s) - anchors_.begin()) - 1;
      const double d = s - anchors_[k];
      return cumulative_[k] + right_value_[k] * d + 0.5 * slope_right_[k] * d * d;
    }
    const auto k = static_cast<std::size_t>(std::lower_bound(anchors_.begin(), anchors_.end(), s) - anchors_.begin());
    const double d = s - anchors_[k];
    return cumulative_[k] + left_value_[k] * d + 0.5 * slope_left_[k] * d * d;
  }

 private:
  std::vector<double> anchors_;
  std::vector<double> left_value_, right_value_, slope_left_, slope_right_, cumulative_;
  std::size_t zero_ = 0;
};

inline double potential(const ConvexPotential& j, double s) { return j(s); }

/// Where the resolvent of beta sends a point, together with the local
/// structure of beta there: either pinned at a knot (x = knot, y - x inside
/// lambda*beta(knot)), or on a linear piece h(s) = value + slope*(s - anchor).
struct ResolventPiece {
  double x = 0.0;
  bool pinned = false;
  double anchor = 0.0;
  double value = 0.0;
  double slope = 0.0;
};

/// beta(s) = [h^-(s), h^+(s)] for a nondecreasing h, normalized on
/// construction so that 0 is in beta(0).
class MonotoneGraph {
 public:
  MonotoneGraph() : MonotoneGraph(PiecewiseFunction{}) {}

  explicit MonotoneGraph(const PiecewiseFunction& h) {
    if (!h.nondecreasing()) throw InvalidArgument("monotone graph: h must be nondecreasing (slopes >= 0, jumps > 0)");
    const double lo = h.left(0.0);
    const double hi = h.right(0.0);
    shift_ = lo > 0.0 ? -lo : (hi < 0.0 ? -hi : 0.0);
    h_ = shift_ == 0.0 ? h : h.shifted(shift_);
    j_ = ConvexPotential(h_);
    knots_ = h_.knots();
    for (double t : knots_) {
      left_.push_back(h_.left(t));
      right_.push_back(h_.right(t));
      slope_after_.push_back(h_.slope_right(t));
    }
  }

  /// Constant added to the input h to obtain 0 in beta(0). The same constant
  /// must be added to g so that f = g - h is unchanged.
  double shift() const noexcept { return shift_; }
  const PiecewiseFunction& h() const noexcept { return h_; }
  const ConvexPotential& potential() const noexcept { return j_; }
  bool trivial() const { return h_.is_zero(); }

  Interval at(double s) const { return {h_.left(s), h_.right(s)}; }

  ResolventPiece resolvent_piece(double lambda, double y) const {
    if (!(lambda > 0.0)) throw InvalidArgument("resolvent: lambda must be positive");
    if (!std::isfinite(y)) throw InvalidArgument("resolvent: argument must be finite");
    ResolventPiece piece;
    if (knots_.empty()) {
      piece.anchor = 0.0;
      piece.value = h_.right(0.0);
      piece.slope = h_.slope_right(0.0);
      piece.x = (y - lambda * piece.value) / (1.0 + lambda * piece.slope);
      return piece;
    }
    // s + lambda*h^+(s) is strictly increasing along the knots; bisect for
    // the first knot whose upper image reaches y.
    std::size_t lo = 0;
    std::size_t hi = knots_.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (knots_[mid] + lambda * right_[mid] < y) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    const std::size_t k = lo;
    if (k < knots_.size() && knots_[k] + lambda * left_[k] <= y) {
      piece.pinned = true;
      piece.x = piece.anchor = knots_[k];
      return piece;
    }
    if (k == 0) {
      // Open piece (-inf, t_0): anchor at its right end with the left limit.
      piece.anchor = knots_[0];
      piece.value = left_[0];
      piece.slope = h_.slope_left(knots_[0]);
      const double x = piece.anchor + (y - piece.anchor - lambda * piece.value) / (1.0 + lambda * piece.slope);
      piece.x = std::min(x, piece.anchor);
    } else {
      piece.anchor = knots_[k - 1];
      piece.value = right_[k - 1];
      piece.slope = slope_after_[k - 1];
      const double x = piece.anchor + (y - piece.anchor - lambda * piece.value) / (1.0 + lambda * piece.slope);
      piece.x = k < knots_.size() ? std::clamp(x, piece.anchor, knots_[k]) : std::max(x, piece.anchor);
    }
    return piece;
  }

  double resolvent(double lambda, double y) const { return resolvent_piece(lambda, y).x; }

 private:
  PiecewiseFunction h_;
  ConvexPotential j_;
  double shift_ = 0.0;
  std::vector<double> knots_, left_, right_, slope_after_;
};

inline Interval graph_interval(const MonotoneGraph& beta, double s) { return beta.at(s); }

/// Unique x with (y - x)/lambda in beta(x); the proximal map of lambda*j.
inline double resolvent(const MonotoneGraph& beta, double lambda, double y) { return beta.resolvent(lambda, y); }

inline bool member(const MonotoneGraph& beta, double s, double v, double tol) {
  if (tol < 0.0) throw InvalidArgument("member: tolerance must be nonnegative");
  return beta.at(s).contains(v, tol);
}

}  // namespace monovi
