#pragma once

// Independent oracles: closed-form single-spring plasticity and a naive
// proximal-gradient minimizer of the increment functional.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rveplast/assembly.hpp"

namespace rveplast::reference {

struct SpringParams {
  double a = 0.0;   ///< elastic modulus
  double h = 0.0;   ///< kinematic hardening modulus
  double sy = 0.0;  ///< yield weight
};

/// argmin_p 1/2 a (d - p)^2 + 1/2 h p^2 + sy |p - p_prev|.
inline double return_map(const SpringParams& s, double d, double p_prev) {
  if (!(s.a > 0.0) || !(s.h > 0.0)) throw std::invalid_argument("return_map: a and h must be > 0");
  const double trial = s.a * d - (s.a + s.h) * p_prev;
  if (std::abs(trial) <= s.sy) return p_prev;
  return (s.a * d - (trial > 0.0 ? s.sy : -s.sy)) / (s.a + s.h);
}

struct SpringTrajectory {
  std::vector<double> p;
  std::vector<double> stress;
};

/// Chains return_map along `strains` (which start at 0); stress = a (d - p).
inline SpringTrajectory spring_trajectory(const SpringParams& s, const std::vector<double>& strains) {
  SpringTrajectory out;
  double p = 0.0;
  for (double d : strains) {
    p = return_map(s, d, p);
    out.p.push_back(p);
    out.stress.push_back(s.a * (d - p));
  }
  return out;
}

/// Largest absolute row sum; an upper bound on the spectral norm.
inline double gershgorin_bound(const SparseMatrix& A) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(A.rows());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) rows[it.row()] += std::abs(it.value());
  return rows.maxCoeff();
}

/// Power-iteration estimate of the largest eigenvalue of a symmetric PSD A.
inline double spectral_norm_estimate(const SparseMatrix& A, int iterations = 200) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(A.rows()).normalized();
  double lambda = 0.0;
  for (int i = 0; i < iterations; ++i) {
    const Eigen::VectorXd w = A * v;
    lambda = v.dot(w);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
  }
  return lambda;
}

/// Proximal gradient on J: gradient step on 1/2 y.A y - f.y, then the exact
/// prox of step * r |. - p_prev| on each plastic DOF. `energies`, if given,
/// receives J after every iteration.
inline Eigen::VectorXd brute_force_increment(const IncrementProblem& prob, long iterations, double step,
                                             std::vector<double>* energies = nullptr) {
  const int n = prob.dofs.plastic_count();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(prob.dofs.size());
  y.head(n) = prob.p_prev;
  for (long k = 0; k < iterations; ++k) {
    y -= step * (prob.A * y - prob.f);
    for (int i = 0; i < n; ++i) {
      const double dev = y[i] - prob.p_prev[i];
      const double w = step * prob.r[i];
      if (std::abs(dev) <= w) y[i] = prob.p_prev[i];
      else y[i] -= dev > 0.0 ? w : -w;
    }
    if (energies) energies->push_back(increment_objective(prob, y));
  }
  return y;
}

}  // namespace rveplast::reference
