#pragma once

// Quadratic increment functional of the periodic RVE problem:
//
//   J(y) = scale * ( 1/2 y.A y - f.y + sum_e r(e) |p(e) - p_prev(e)| )
//
// with y = (p, phi) packed as [plastic DOFs | free displacement DOFs].
// The smooth part equals, up to a constant, the elastic energy
//   1/2 sum_e a(e) (F(e) + grad_s phi(e) - p(e))^2 + h(e) p(e)^2.

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "rveplast/lattice.hpp"
#include "rveplast/randfield.hpp"

namespace rveplast {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Which nodes have their fluctuation pinned to zero.
enum class ClampMode {
  periodic_corner,  ///< node (0,0): the single periodic image of all four box corners
  four_corners,     ///< the distinct nodes among (0,0),(L-1,0),(0,L-1),(L-1,L-1)
  none,             ///< unclamped; A is singular (constant displacements)
};

inline std::string to_string(ClampMode m) {
  switch (m) {
    case ClampMode::periodic_corner: return "corner";
    case ClampMode::four_corners: return "four-corners";
    case ClampMode::none: return "none";
  }
  return "?";
}

inline ClampMode clamp_mode_from_string(const std::string& s) {
  if (s == "corner") return ClampMode::periodic_corner;
  if (s == "four-corners") return ClampMode::four_corners;
  if (s == "none") return ClampMode::none;
  throw std::invalid_argument("unknown clamp mode '" + s + "' (expected corner, four-corners or none)");
}

inline std::vector<int> clamped_nodes(const PeriodicLattice& lat, ClampMode mode) {
  const int L = lat.side();
  std::vector<int> nodes;
  switch (mode) {
    case ClampMode::periodic_corner: nodes = {lat.node(0, 0)}; break;
    case ClampMode::four_corners:
      nodes = {lat.node(0, 0), lat.node(L - 1, 0), lat.node(0, L - 1), lat.node(L - 1, L - 1)};
      break;
    case ClampMode::none: break;
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

/// Plastic strain per edge and displacement fluctuation per node (2 x L^2).
struct RveState {
  Eigen::VectorXd p;
  Eigen::Matrix2Xd phi;

  static RveState zero(const PeriodicLattice& lat) {
    return {Eigen::VectorXd::Zero(lat.edge_count()), Eigen::Matrix2Xd::Zero(2, lat.node_count())};
  }
};

/// Numbering of the free degrees of freedom: all k L^2 plastic strains first,
/// then (x, y) displacement pairs of the unclamped nodes in node order.
class DofMap {
 public:
  DofMap(int L, ClampMode mode) : lat_(L), mode_(mode), clamped_(clamped_nodes(lat_, mode)) {
    disp_.assign(static_cast<std::size_t>(lat_.node_count()), -1);
    int next = lat_.edge_count();
    for (int node = 0; node < lat_.node_count(); ++node) {
      if (std::binary_search(clamped_.begin(), clamped_.end(), node)) continue;
      disp_[node] = next;
      next += 2;
    }
    size_ = next;
  }

  const PeriodicLattice& lattice() const { return lat_; }
  ClampMode clamp_mode() const { return mode_; }
  const std::vector<int>& clamped() const { return clamped_; }

  int plastic_count() const { return lat_.edge_count(); }
  int displacement_count() const { return size_ - lat_.edge_count(); }
  int size() const { return size_; }

  int plastic_dof(int edge) const { return edge; }
  /// First of the two displacement DOFs of `node`, or -1 if clamped.
  int displacement_dof(int node) const { return disp_[node]; }
  bool is_plastic(int dof) const { return dof < lat_.edge_count(); }

  Eigen::VectorXd pack(const RveState& s) const {
    Eigen::VectorXd y(size_);
    y.head(plastic_count()) = s.p;
    for (int node = 0; node < lat_.node_count(); ++node) {
      if (disp_[node] < 0) continue;
      y[disp_[node]] = s.phi(0, node);
      y[disp_[node] + 1] = s.phi(1, node);
    }
    return y;
  }

  RveState unpack(const Eigen::VectorXd& y) const {
    RveState s = RveState::zero(lat_);
    s.p = y.head(plastic_count());
    for (int node = 0; node < lat_.node_count(); ++node) {
      if (disp_[node] < 0) continue;
      s.phi(0, node) = y[disp_[node]];
      s.phi(1, node) = y[disp_[node] + 1];
    }
    return s;
  }

  /// Coefficients of the linear map y -> grad_s phi(e) - p(e) over the free
  /// DOFs; duplicate DOFs (self-loop edges at L = 1) are merged.
  struct EdgeStencil {
    std::array<int, 5> dof{};
    std::array<double, 5> coef{};
    int size = 0;
  };

  EdgeStencil edge_stencil(int edge) const {
    EdgeStencil st;
    auto add = [&st](int dof, double c) {
      if (dof < 0 || c == 0.0) return;
      for (int i = 0; i < st.size; ++i)
        if (st.dof[i] == dof) {
          st.coef[i] += c;
          return;
        }
      st.dof[st.size] = dof;
      st.coef[st.size] = c;
      ++st.size;
    };
    const Eigen::Vector2d g = edge_types()[lat_.edge_type(edge)].strain_gradient();
    add(plastic_dof(edge), -1.0);
    const int t = displacement_dof(lat_.tail(edge));
    const int h = displacement_dof(lat_.head(edge));
    for (int c = 0; c < 2; ++c) {
      add(h < 0 ? -1 : h + c, g[c]);
      add(t < 0 ? -1 : t + c, -g[c]);
    }
    // Self-loops cancel to zero; drop those entries.
    int w = 0;
    for (int i = 0; i < st.size; ++i)
      if (st.coef[i] != 0.0) {
        st.dof[w] = st.dof[i];
        st.coef[w] = st.coef[i];
        ++w;
      }
    st.size = w;
    return st;
  }

 private:
  PeriodicLattice lat_;
  ClampMode mode_;
  std::vector<int> clamped_;
  std::vector<int> disp_;
  int size_ = 0;
};

inline void check_realization(const Realization& real, const DofMap& dofs) {
  if (real.L != dofs.lattice().side())
    throw std::invalid_argument("realization side " + std::to_string(real.L) + " does not match DOF map side " +
                                std::to_string(dofs.lattice().side()));
}

/// A with y.A y = sum_e a(e) (grad_s phi(e) - p(e))^2 + h(e) p(e)^2.
inline SparseMatrix assemble_operator(const Realization& real, const DofMap& dofs) {
  check_realization(real, dofs);
  const PeriodicLattice& lat = dofs.lattice();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(lat.edge_count()) * 26);
  for (int e = 0; e < lat.edge_count(); ++e) {
    const auto st = dofs.edge_stencil(e);
    for (int i = 0; i < st.size; ++i)
      for (int j = 0; j < st.size; ++j) trip.emplace_back(st.dof[i], st.dof[j], real.a[e] * st.coef[i] * st.coef[j]);
    trip.emplace_back(dofs.plastic_dof(e), dofs.plastic_dof(e), real.h[e]);
  }
  SparseMatrix A(dofs.size(), dofs.size());
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

/// f with f.y = -sum_e a(e) F(e) (grad_s phi(e) - p(e)), F(e) = (P_s F)_type.
inline Eigen::VectorXd assemble_load(const Realization& real, const DofMap& dofs, const SymTensor2& F) {
  check_realization(real, dofs);
  const PeriodicLattice& lat = dofs.lattice();
  const StrainVector Fe = ps_map(F);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(dofs.size());
  for (int e = 0; e < lat.edge_count(); ++e) {
    const double force = real.a[e] * Fe[lat.edge_type(e)];
    if (force == 0.0) continue;
    const auto st = dofs.edge_stencil(e);
    for (int i = 0; i < st.size; ++i) f[st.dof[i]] -= force * st.coef[i];
  }
  return f;
}

/// Mass-like operator of the state norm |p|^2 + sum_e |phi(head) - phi(tail)|^2.
inline SparseMatrix state_norm_operator(const DofMap& dofs) {
  const PeriodicLattice& lat = dofs.lattice();
  std::vector<Eigen::Triplet<double>> trip;
  for (int e = 0; e < lat.edge_count(); ++e) {
    trip.emplace_back(e, e, 1.0);
    const int t = dofs.displacement_dof(lat.tail(e));
    const int h = dofs.displacement_dof(lat.head(e));
    if (lat.tail(e) == lat.head(e)) continue;
    for (int c = 0; c < 2; ++c) {
      if (h >= 0) trip.emplace_back(h + c, h + c, 1.0);
      if (t >= 0) trip.emplace_back(t + c, t + c, 1.0);
      if (h >= 0 && t >= 0) {
        trip.emplace_back(h + c, t + c, -1.0);
        trip.emplace_back(t + c, h + c, -1.0);
      }
    }
  }
  SparseMatrix M(dofs.size(), dofs.size());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

/// Everything one time increment needs. A and r are fixed per realization;
/// f and p_prev change from step to step.
struct IncrementProblem {
  DofMap dofs;
  SparseMatrix A;
  Eigen::VectorXd f;
  Eigen::VectorXd r;
  Eigen::VectorXd p_prev;
  double scale = 1.0;  ///< L^{-d}; applied to reported energies only

  static IncrementProblem build(const Realization& real, ClampMode mode, const SymTensor2& F,
                                const Eigen::VectorXd* p_prev = nullptr) {
    DofMap dofs(real.L, mode);
    SparseMatrix A = assemble_operator(real, dofs);
    Eigen::VectorXd f = assemble_load(real, dofs, F);
    Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(real.sy.data(), static_cast<Eigen::Index>(real.sy.size()));
    Eigen::VectorXd pp = p_prev ? *p_prev : Eigen::VectorXd::Zero(dofs.plastic_count());
    const double L = real.L;
    return {std::move(dofs), std::move(A), std::move(f), std::move(r), std::move(pp), 1.0 / (L * L)};
  }

  void set_load(const Realization& real, const SymTensor2& F) { f = assemble_load(real, dofs, F); }
};

/// Unscaled J: 1/2 y.A y - f.y + sum r |p - p_prev|.
inline double increment_objective(const IncrementProblem& prob, const Eigen::VectorXd& y) {
  const int n = prob.dofs.plastic_count();
  const double smooth = 0.5 * y.dot(prob.A * y) - prob.f.dot(y);
  return smooth + prob.r.dot((y.head(n) - prob.p_prev).cwiseAbs());
}

/// Reported increment energy, including the L^{-d} prefactor.
inline double increment_energy(const IncrementProblem& prob, const Eigen::VectorXd& y) {
  return prob.scale * increment_objective(prob, y);
}

inline double increment_energy(const IncrementProblem& prob, const RveState& s) {
  return increment_energy(prob, prob.dofs.pack(s));
}

}  // namespace rveplast
