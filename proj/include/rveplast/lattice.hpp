#pragma once

// Periodic triangular lattice on the box [0,L)^2, discrete edge derivatives,
// and the conversion maps between symmetric strain tensors and per-edge-type
// strain vectors.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include <Eigen/Dense>

namespace rveplast {

inline constexpr int kDim = 2;
inline constexpr int kEdgeTypes = 3;

/// One generating edge of the lattice. Types are numbered 0,1,2 for the
/// horizontal (1,0), vertical (0,1) and diagonal (1,1) springs.
struct EdgeType {
  int index;
  std::array<int, 2> dir;
  Eigen::Vector2d unit;
  double length;

  /// ê/|e|: maps a displacement difference to the longitudinal strain.
  Eigen::Vector2d strain_gradient() const { return unit / length; }
};

inline const std::array<EdgeType, kEdgeTypes>& edge_types() {
  static const std::array<EdgeType, kEdgeTypes> types = [] {
    std::array<EdgeType, kEdgeTypes> t{};
    const std::array<std::array<int, 2>, kEdgeTypes> dirs{{{1, 0}, {0, 1}, {1, 1}}};
    for (int a = 0; a < kEdgeTypes; ++a) {
      const Eigen::Vector2d e(dirs[a][0], dirs[a][1]);
      t[a] = EdgeType{a, dirs[a], e.normalized(), e.norm()};
    }
    return t;
  }();
  return types;
}

struct NodeCoord {
  int x = 0;
  int y = 0;
  friend bool operator==(const NodeCoord&, const NodeCoord&) = default;
};

/// Nonnegative remainder.
constexpr int wrap(int v, int L) {
  const int r = v % L;
  return r < 0 ? r + L : r;
}

/// Row-major index of the periodic image of (x, y).
constexpr int wrap_node(int x, int y, int L) {
  if (L < 1) throw std::invalid_argument("wrap_node: side length must be >= 1");
  return wrap(y, L) * L + wrap(x, L);
}

/// Nodes Λ_L = Z^2 ∩ [0,L)^2 with periodic wraparound; one directed edge per
/// (tail node, type). Edge index = type * L^2 + tail index.
class PeriodicLattice {
 public:
  explicit PeriodicLattice(int side) : L_(side) {
    if (side < 1) throw std::invalid_argument("PeriodicLattice: side length must be >= 1");
  }

  int side() const { return L_; }
  int node_count() const { return L_ * L_; }
  int edge_count() const { return kEdgeTypes * L_ * L_; }

  int node(int x, int y) const { return wrap_node(x, y, L_); }
  NodeCoord coord(int node) const { return {node % L_, node / L_}; }

  int edge(int tail_node, int type) const { return type * node_count() + tail_node; }
  int edge_type(int edge) const { return edge / node_count(); }
  int tail(int edge) const { return edge % node_count(); }
  int head(int edge) const {
    const NodeCoord c = coord(tail(edge));
    const auto& d = edge_types()[edge_type(edge)].dir;
    return node(c.x + d[0], c.y + d[1]);
  }

 private:
  int L_;
};

/// Symmetric 2x2 tensor; only the upper triangle is stored.
struct SymTensor2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  static SymTensor2 diag(double a, double b) { return {a, 0.0, b}; }
  static SymTensor2 sym(const Eigen::Matrix2d& m) {
    return {m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), m(1, 1)};
  }
  Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d m;
    m << xx, xy, xy, yy;
    return m;
  }
  friend bool operator==(const SymTensor2&, const SymTensor2&) = default;
};

inline double frobenius(const SymTensor2& a, const SymTensor2& b) {
  return a.xx * b.xx + 2.0 * a.xy * b.xy + a.yy * b.yy;
}

/// One longitudinal component per edge type (strains or stresses).
using StrainVector = std::array<double, kEdgeTypes>;

inline double dot(const StrainVector& a, const StrainVector& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

/// Tensor-to-vector conversion: component α is ê_α · F ê_α.
inline StrainVector ps_map(const SymTensor2& F) {
  return {F.xx, F.yy, 0.5 * (F.xx + 2.0 * F.xy + F.yy)};
}

/// Arbitrary (possibly non-symmetric) F; only sym F contributes.
inline StrainVector ps_map(const Eigen::Matrix2d& F) { return ps_map(SymTensor2::sym(F)); }

/// Adjoint of ps_map with respect to the Frobenius product: Σ_α s_α ê_α⊗ê_α.
inline SymTensor2 ps_adjoint(const StrainVector& s) {
  return {s[0] + 0.5 * s[2], 0.5 * s[2], s[1] + 0.5 * s[2]};
}

/// ∇_s u(e) = ê · (u(head) − u(tail)) / |e| for a per-node 2-vector field
/// stored column-wise (2 x L^2).
inline double projected_edge_derivative(const Eigen::Matrix2Xd& field, int edge,
                                        const PeriodicLattice& lattice) {
  const Eigen::Vector2d g = edge_types()[lattice.edge_type(edge)].strain_gradient();
  return g.dot(field.col(lattice.head(edge)) - field.col(lattice.tail(edge)));
}

}  // namespace rveplast
