#pragma once

// Structured P1 meshes on an interval or a rectangle, lumped masses, exact
// element gradients and nodal order operations.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "monovi/error.hpp"
#include "monovi/operator.hpp"

namespace monovi {

/// One real per mesh node.
using NodalField = std::vector<double>;

struct MeshConfig {
  int dim = 1;
  double x0 = 0.0, x1 = 1.0;
  double y0 = 0.0, y1 = 1.0;
  std::size_t nx = 2;  // cells along x (n in 1D)
  std::size_t ny = 2;
};

class Mesh {
 public:
  using Element = std::array<std::size_t, 3>;

  int dim() const noexcept { return dim_; }
  std::size_t num_nodes() const noexcept { return nodes_.size(); }
  std::size_t num_elements() const noexcept { return elements_.size(); }
  /// Nodes per element: 2 for intervals, 3 for triangles.
  std::size_t element_size() const noexcept { return static_cast<std::size_t>(dim_) + 1; }

  const std::vector<Vec2>& nodes() const noexcept { return nodes_; }
  const Element& element(std::size_t e) const { return elements_[e]; }
  double measure(std::size_t e) const { return measure_[e]; }
  const Vec2& centroid(std::size_t e) const { return centroid_[e]; }
  /// Gradient of the local hat function `a` on element e.
  const Vec2& basis_gradient(std::size_t e, std::size_t a) const { return grad_[e][a]; }

  bool on_boundary(std::size_t i) const { return boundary_[i] != 0; }
  const std::vector<double>& lumped_mass() const noexcept { return mass_; }
  const std::vector<std::size_t>& interior() const noexcept { return interior_; }
  double domain_measure() const noexcept { return domain_measure_; }
  const MeshConfig& config() const noexcept { return config_; }

  friend Mesh build_mesh(const MeshConfig& cfg);

 private:
  void finalize() {
    const std::size_t ne = elements_.size();
    measure_.resize(ne);
    centroid_.resize(ne);
    grad_.resize(ne);
    mass_.assign(nodes_.size(), 0.0);
    const std::size_t k = element_size();
    for (std::size_t e = 0; e < ne; ++e) {
      const auto& el = elements_[e];
      if (dim_ == 1) {
        const double h = nodes_[el[1]][0] - nodes_[el[0]][0];
        measure_[e] = h;
        grad_[e] = {Vec2{-1.0 / h, 0.0}, Vec2{1.0 / h, 0.0}, Vec2{}};
        centroid_[e] = {0.5 * (nodes_[el[0]][0] + nodes_[el[1]][0]), 0.0};
      } else {
        const Vec2& p0 = nodes_[el[0]];
        const Vec2& p1 = nodes_[el[1]];
        const Vec2& p2 = nodes_[el[2]];
        const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        measure_[e] = 0.5 * std::abs(det);
        // grad phi_a = rot90(opposite edge) / det
        grad_[e] = {Vec2{(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det},
                    Vec2{(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det},
                    Vec2{(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det}};
        centroid_[e] = {(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0};
      }
      if (!(measure_[e] > 0.0)) throw InvalidArgument("mesh: degenerate element " + std::to_string(e));
      for (std::size_t a = 0; a < k; ++a) mass_[el[a]] += measure_[e] / static_cast<double>(k);
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!boundary_[i]) interior_.push_back(i);
    }
  }

  int dim_ = 1;
  MeshConfig config_;
  std::vector<Vec2> nodes_;
  std::vector<Element> elements_;
  std::vector<char> boundary_;
  std::vector<double> measure_;
  std::vector<Vec2> centroid_;
  std::vector<std::array<Vec2, 3>> grad_;
  std::vector<double> mass_;
  std::vector<std::size_t> interior_;
  double domain_measure_ = 0.0;
};

/// Uniform interval mesh with nx cells, or an nx-by-ny rectangle with each
/// cell split into two triangles along its lower-left/upper-right diagonal.
/// Nodes are numbered x-fastest.
inline Mesh build_mesh(const MeshConfig& cfg) {
  Mesh m;
  m.dim_ = cfg.dim;
  m.config_ = cfg;
  if (cfg.dim != 1 && cfg.dim != 2) throw InvalidArgument("mesh: dimension must be 1 or 2");
  if (!(cfg.x1 > cfg.x0) || !std::isfinite(cfg.x0) || !std::isfinite(cfg.x1)) {
    throw InvalidArgument("mesh: require x0 < x1");
  }
  if (cfg.nx < 2) throw InvalidArgument("mesh: need at least 2 cells along x");
  const double hx = (cfg.x1 - cfg.x0) / static_cast<double>(cfg.nx);
  if (cfg.dim == 1) {
    for (std::size_t i = 0; i <= cfg.nx; ++i) {
      // The last node is pinned to x1 so the extents are reproduced exactly.
      const double x = i == cfg.nx ? cfg.x1 : cfg.x0 + hx * static_cast<double>(i);
      m.nodes_.push_back({x, 0.0});
      m.boundary_.push_back(i == 0 || i == cfg.nx);
    }
    for (std::size_t i = 0; i < cfg.nx; ++i) m.elements_.push_back({i, i + 1, 0});
    m.domain_measure_ = cfg.x1 - cfg.x0;
  } else {
    if (!(cfg.y1 > cfg.y0) || !std::isfinite(cfg.y0) || !std::isfinite(cfg.y1)) {
      throw InvalidArgument("mesh: require y0 < y1");
    }
    if (cfg.ny < 2) throw InvalidArgument("mesh: need at least 2 cells along y");
    const double hy = (cfg.y1 - cfg.y0) / static_cast<double>(cfg.ny);
    const std::size_t sx = cfg.nx + 1;
    for (std::size_t j = 0; j <= cfg.ny; ++j) {
      const double y = j == cfg.ny ? cfg.y1 : cfg.y0 + hy * static_cast<double>(j);
      for (std::size_t i = 0; i <= cfg.nx; ++i) {
        const double x = i == cfg.nx ? cfg.x1 : cfg.x0 + hx * static_cast<double>(i);
        m.nodes_.push_back({x, y});
        m.boundary_.push_back(i == 0 || j == 0 || i == cfg.nx || j == cfg.ny);
      }
    }
    for (std::size_t j = 0; j < cfg.ny; ++j) {
      for (std::size_t i = 0; i < cfg.nx; ++i) {
        const std::size_t n00 = j * sx + i, n10 = n00 + 1, n01 = n00 + sx, n11 = n01 + 1;
        m.elements_.push_back({n00, n10, n11});
        m.elements_.push_back({n00, n11, n01});
      }
    }
    m.domain_measure_ = (cfg.x1 - cfg.x0) * (cfg.y1 - cfg.y0);
  }
  m.finalize();
  return m;
}

/// Exact (element-constant) gradient of the P1 interpolant of u on element e.
inline Vec2 gradient(const Mesh& mesh, std::span<const double> u, std::size_t e) {
  if (e >= mesh.num_elements()) throw InvalidArgument("gradient: element index out of range");
  const auto& el = mesh.element(e);
  Vec2 g{};
  for (std::size_t a = 0; a < mesh.element_size(); ++a) {
    const Vec2& dphi = mesh.basis_gradient(e, a);
    g[0] += u[el[a]] * dphi[0];
    g[1] += u[el[a]] * dphi[1];
  }
  return g;
}

inline NodalField zero_field(const Mesh& mesh) { return NodalField(mesh.num_nodes(), 0.0); }

/// Nodal interpolant of a function of position.
template <class F>
NodalField interpolate(const Mesh& mesh, F&& fn) {
  NodalField u(mesh.num_nodes());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = fn(mesh.nodes()[i]);
  return u;
}

/// True when u vanishes (to tol) on every boundary node.
inline bool satisfies_dirichlet(const Mesh& mesh, std::span<const double> u, double tol = 0.0) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (mesh.on_boundary(i) && std::abs(u[i]) > tol) return false;
  }
  return true;
}

inline void zero_boundary(const Mesh& mesh, NodalField& u) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (mesh.on_boundary(i)) u[i] = 0.0;
  }
}

// Order operations on nodal fields.

inline NodalField positive_part(std::span<const double> u) {
  NodalField out(u.size());
  std::transform(u.begin(), u.end(), out.begin(), [](double v) { return std::max(v, 0.0); });
  return out;
}

inline NodalField pointwise_min(std::span<const double> u, std::span<const double> w) {
  NodalField out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::min(u[i], w[i]);
  return out;
}

inline NodalField pointwise_max(std::span<const double> u, std::span<const double> w) {
  NodalField out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::max(u[i], w[i]);
  return out;
}

/// u <= w + tol at every node.
inline bool compare(std::span<const double> u, std::span<const double> w, double tol = 0.0) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] > w[i] + tol) return false;
  }
  return true;
}

/// max_i (u_i - w_i); negative when u lies strictly below w.
inline double max_excess(std::span<const double> u, std::span<const double> w) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, u[i] - w[i]);
  return m;
}

inline double sup_distance(std::span<const double> u, std::span<const double> w) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i] - w[i]));
  return m;
}

inline double sup_norm(std::span<const double> u) {
  double m = 0.0;
  for (double v : u) m = std::max(m, std::abs(v));
  return m;
}

inline NodalField subtract(std::span<const double> u, std::span<const double> w) {
  NodalField out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] - w[i];
  return out;
}

inline NodalField add(std::span<const double> u, std::span<const double> w) {
  NodalField out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] + w[i];
  return out;
}

inline double dot(std::span<const double> u, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * w[i];
  return s;
}

}  // namespace monovi
