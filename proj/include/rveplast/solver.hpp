#pragma once

// Minimizer of the nonsmooth convex increment functional
//
//   J(y) = 1/2 y.A y - f.y + sum_i r_i |y_i - p_prev_i|   (i over plastic DOFs)
//
// Each outer iteration is one nonlinear Gauss-Seidel sweep (exact scalar
// minimization, in ascending DOF order) followed by a truncated Newton
// correction: the plastic DOFs sitting exactly at their kink are frozen, the
// remaining smooth quadratic is minimized by a sparse direct solve, DOFs that
// would cross their kink are cut back onto it, and a halving line search on J
// guards the step.
//
// The plastic-plastic block of A must be diagonal (each plastic strain belongs
// to a single spring). The Newton system is then condensed onto the
// displacement DOFs, whose sparsity pattern never changes, so the symbolic
// factorization is computed once per operator.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "rveplast/assembly.hpp"

namespace rveplast {

struct SolverSettings {
  double tol_increment = 1e-10;  ///< relative max-norm of a step / resweep change
  double tol_energy = 1e-12;     ///< relative energy decrease regarded as stagnation
  int max_outer = 500;
  double kink_epsilon = 0.0;     ///< |p - p_prev| <= this counts as "at the kink"

  void validate() const {
    if (!(tol_increment > 0.0)) throw std::invalid_argument("solver: tol_increment must be > 0");
    if (!(tol_energy > 0.0)) throw std::invalid_argument("solver: tol_energy must be > 0");
    if (max_outer < 1) throw std::invalid_argument("solver: max_outer must be >= 1");
    if (!(kink_epsilon >= 0.0)) throw std::invalid_argument("solver: kink_epsilon must be >= 0");
  }
};

struct SolveReport {
  int iterations = 0;
  double energy = 0.0;    ///< scaled increment energy at the returned point
  double residual = 0.0;  ///< subdifferential optimality residual, see optimality_residual()
  bool converged = false;
  bool newton_fallback = false;  ///< a reduced system failed to factorize at least once
  std::vector<double> energy_history;  ///< unscaled J after each outer iteration, starting with J(warm start)
  double load_norm = 0.0;              ///< max-norm of the load vector f
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolveReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

/// argmin_x 1/2 c2 x^2 + c1 x + w |x - anchor|. Returns `anchor` bitwise when
/// the anchor is optimal.
inline double scalar_prox(double c2, double c1, double w, double anchor) {
  if (!(c2 > 0.0)) throw std::invalid_argument("scalar_prox: curvature must be > 0");
  const double slope = c2 * anchor + c1;
  if (std::abs(slope) <= w) return anchor;
  return slope > 0.0 ? (w - c1) / c2 : (-c1 - w) / c2;
}

/// Max over DOFs of the distance of 0 from the subdifferential of J:
/// |(Ay-f)_i| for displacements, |(Ay-f)_i + r_i sign(p_i - p_prev_i)| off the
/// kink and max(0, |(Ay-f)_i| - r_i) on it.
inline double optimality_residual(const IncrementProblem& prob, const Eigen::VectorXd& y) {
  const int n = prob.dofs.plastic_count();
  const Eigen::VectorXd g = prob.A * y - prob.f;
  double worst = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    double res;
    if (i < n) {
      const double dev = y[i] - prob.p_prev[i];
      res = dev == 0.0 ? std::max(0.0, std::abs(g[i]) - prob.r[i])
                       : std::abs(g[i] + prob.r[i] * (dev > 0.0 ? 1.0 : -1.0));
    } else {
      res = std::abs(g[i]);
    }
    worst = std::max(worst, res);
  }
  return worst;
}

class IncrementSolver {
 public:
  /// Caches the condensed Newton pattern of `A`; every problem passed later
  /// must carry the same operator.
  IncrementSolver(const SparseMatrix& A, int plastic_count, SolverSettings settings = {})
      : settings_(settings), n_(plastic_count), size_(static_cast<int>(A.rows())) {
    settings_.validate();
    if (A.rows() != A.cols()) throw std::invalid_argument("IncrementSolver: operator must be square");
    if (n_ < 0 || n_ > size_) throw std::invalid_argument("IncrementSolver: bad plastic DOF count");
    build_condensed_structure(A);
  }

  const SolverSettings& settings() const { return settings_; }

  /// One nonlinear Gauss-Seidel pass over all DOFs in ascending order.
  /// Returns the largest single-DOF change.
  double sweep(const IncrementProblem& prob, Eigen::VectorXd& y) const {
    check(prob, y);
    double biggest = 0.0;
    for (int i = 0; i < size_; ++i) {
      const double x = scalar_minimizer(prob, y, i);
      biggest = std::max(biggest, std::abs(x - y[i]));
      y[i] = x;
    }
    return biggest;
  }

  /// Largest change a Gauss-Seidel resweep would make to any single DOF if
  /// applied to the current point (Jacobi-style probe, y is not modified).
  double resweep_change(const IncrementProblem& prob, const Eigen::VectorXd& y) const {
    check(prob, y);
    double biggest = 0.0;
    for (int i = 0; i < size_; ++i) biggest = std::max(biggest, std::abs(scalar_minimizer(prob, y, i) - y[i]));
    return biggest;
  }

  /// Truncated Newton step with line search. Returns false if the reduced
  /// system could not be factorized (y is then left unchanged).
  bool newton_correction(const IncrementProblem& prob, Eigen::VectorXd& y) {
    check(prob, y);
    const SparseMatrix& A = prob.A;
    const int m = size_ - n_;

    Eigen::VectorXd grad = A * y - prob.f;  // smooth gradient
    // side: 0 frozen at the kink, +-1 off the kink, 2 no kink (zero weight).
    std::vector<signed char> side(static_cast<std::size_t>(n_), 0);
    Eigen::VectorXd g = grad;  // gradient of the reduced smooth functional
    for (int i = 0; i < n_; ++i) {
      if (prob.r[i] == 0.0) {
        side[i] = 2;
        continue;
      }
      const double dev = y[i] - prob.p_prev[i];
      if (std::abs(dev) <= settings_.kink_epsilon) continue;
      side[i] = dev > 0.0 ? 1 : -1;
      g[i] += prob.r[i] * side[i];
    }

    Eigen::VectorXd d = Eigen::VectorXd::Zero(size_);
    if (m > 0) {
      double* sv = S_.valuePtr();
      std::copy(S0_values_.begin(), S0_values_.end(), sv);
      Eigen::VectorXd rhs = -g.tail(m);
      for (int i = 0; i < n_; ++i) {
        if (side[i] == 0) continue;
        const auto& cpl = couplings_[i];
        const double inv = 1.0 / diag_[i];
        for (std::size_t a = 0; a < cpl.size(); ++a) {
          rhs[cpl[a].first] += cpl[a].second * g[i] * inv;
          for (std::size_t b = 0; b < cpl.size(); ++b)
            sv[pair_pos_[i][a * cpl.size() + b]] -= cpl[a].second * cpl[b].second * inv;
        }
      }
      ldlt_.factorize(S_);
      if (ldlt_.info() != Eigen::Success) return false;
      const Eigen::VectorXd dphi = ldlt_.solve(rhs);
      if (ldlt_.info() != Eigen::Success || !dphi.allFinite()) return false;
      d.tail(m) = dphi;
    }
    for (int i = 0; i < n_; ++i) {
      if (side[i] == 0) continue;
      double coupled = 0.0;
      for (const auto& [j, v] : couplings_[i]) coupled += v * d[n_ + j];
      d[i] = (-g[i] - coupled) / diag_[i];
    }

    // Cut back DOFs that would cross (or land on) their kink.
    std::vector<int> truncated;
    for (int i = 0; i < n_; ++i) {
      if (side[i] == 0 || side[i] == 2) continue;
      const double dev = y[i] - prob.p_prev[i];
      const double next = dev + d[i];
      if (next == 0.0 || (next > 0.0) != (dev > 0.0)) {
        d[i] = -dev;
        truncated.push_back(i);
      }
    }
    if (d.lpNorm<Eigen::Infinity>() == 0.0) return true;

    const Eigen::VectorXd Ad = A * d;
    const double lin = grad.dot(d);
    const double quad = 0.5 * d.dot(Ad);
    for (double step = 1.0; step >= 1e-16; step *= 0.5) {
      double change = step * lin + step * step * quad;
      for (int i = 0; i < n_; ++i) {
        if (d[i] == 0.0) continue;
        const double dev = y[i] - prob.p_prev[i];
        change += prob.r[i] * (std::abs(dev + step * d[i]) - std::abs(dev));
      }
      if (change < 0.0) {
        y += step * d;
        if (step == 1.0)
          for (int i : truncated) y[i] = prob.p_prev[i];
        return true;
      }
    }
    return true;
  }

  /// Full increment solve from `y` (a packed warm start).
  SolveReport solve(const IncrementProblem& prob, Eigen::VectorXd& y) {
    check(prob, y);
    SolveReport rep;
    double J = increment_objective(prob, y);
    rep.energy_history.push_back(J);

    auto finish = [&](bool converged) {
      rep.converged = converged;
      rep.energy = prob.scale * J;
      rep.residual = optimality_residual(prob, y);
      rep.load_norm = prob.f.lpNorm<Eigen::Infinity>();
      return rep;
    };

    if (certified(prob, y)) return finish(true);

    for (int it = 1; it <= settings_.max_outer; ++it) {
      const Eigen::VectorXd y_old = y;
      sweep(prob, y);
      if (!newton_correction(prob, y)) rep.newton_fallback = true;
      const double J_new = increment_objective(prob, y);
      rep.energy_history.push_back(J_new);
      rep.iterations = it;

      const double scale_y = y.lpNorm<Eigen::Infinity>();
      const double step = (y - y_old).lpNorm<Eigen::Infinity>();
      const bool small_step = step <= settings_.tol_increment * scale_y;
      const bool stagnant = (J - J_new) <= settings_.tol_energy * std::abs(J_new);
      J = J_new;
      if ((small_step || stagnant) && certified(prob, y)) return finish(true);
    }
    finish(false);
    throw SolverError("increment solver did not converge in " + std::to_string(settings_.max_outer) +
                          " outer iterations (resweep change " + std::to_string(resweep_change(prob, y)) + ")",
                      rep);
  }

 private:
  bool certified(const IncrementProblem& prob, const Eigen::VectorXd& y) const {
    return resweep_change(prob, y) <= settings_.tol_increment * y.lpNorm<Eigen::Infinity>();
  }

  double scalar_minimizer(const IncrementProblem& prob, const Eigen::VectorXd& y, int i) const {
    double off = 0.0;
    for (SparseMatrix::InnerIterator it(prob.A, i); it; ++it)
      if (it.row() != i) off += it.value() * y[it.row()];
    const double c1 = off - prob.f[i];
    if (i < n_) return scalar_prox(diag_[i], c1, prob.r[i], prob.p_prev[i]);
    return -c1 / diag_[i];
  }

  void check(const IncrementProblem& prob, const Eigen::VectorXd& y) const {
    if (prob.A.rows() != size_ || y.size() != size_ || prob.f.size() != size_ || prob.dofs.plastic_count() != n_ ||
        prob.r.size() != n_ || prob.p_prev.size() != n_)
      throw std::invalid_argument("IncrementSolver: problem dimensions do not match the cached operator");
  }

  void build_condensed_structure(const SparseMatrix& A) {
    const int m = size_ - n_;
    diag_ = A.diagonal();
    for (int i = 0; i < size_; ++i)
      if (!(diag_[i] > 0.0)) throw std::invalid_argument("IncrementSolver: operator diagonal must be positive");

    couplings_.assign(static_cast<std::size_t>(n_), {});
    for (int i = 0; i < n_; ++i)
      for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
        const int r = static_cast<int>(it.row());
        if (r >= n_) couplings_[i].emplace_back(r - n_, it.value());
        else if (r != i && it.value() != 0.0)
          throw std::invalid_argument("IncrementSolver: plastic-plastic block must be diagonal");
      }

    S_ = A.bottomRightCorner(m, m);
    S_.makeCompressed();
    S0_values_.assign(S_.valuePtr(), S_.valuePtr() + S_.nonZeros());

    auto position = [this](int row, int col) -> int {
      const auto* outer = S_.outerIndexPtr();
      const auto* inner = S_.innerIndexPtr();
      const auto* first = inner + outer[col];
      const auto* last = inner + outer[col + 1];
      const auto* hit = std::lower_bound(first, last, row);
      if (hit == last || *hit != row)
        throw std::logic_error("IncrementSolver: condensed coupling outside displacement pattern");
      return static_cast<int>(hit - inner);
    };
    pair_pos_.assign(static_cast<std::size_t>(n_), {});
    for (int i = 0; i < n_; ++i) {
      const auto& cpl = couplings_[i];
      auto& pos = pair_pos_[i];
      pos.resize(cpl.size() * cpl.size());
      for (std::size_t a = 0; a < cpl.size(); ++a)
        for (std::size_t b = 0; b < cpl.size(); ++b) pos[a * cpl.size() + b] = position(cpl[a].first, cpl[b].first);
    }
    if (m > 0) ldlt_.analyzePattern(S_);
  }

  SolverSettings settings_;
  int n_;
  int size_;
  Eigen::VectorXd diag_;
  std::vector<std::vector<std::pair<int, double>>> couplings_;
  std::vector<std::vector<int>> pair_pos_;
  SparseMatrix S_;
  std::vector<double> S0_values_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> ldlt_;
};

inline Eigen::VectorXd gauss_seidel_sweep(const IncrementProblem& prob, Eigen::VectorXd y) {
  IncrementSolver(prob.A, prob.dofs.plastic_count()).sweep(prob, y);
  return y;
}

/// Returns y unchanged if the reduced system is singular.
inline Eigen::VectorXd truncated_newton_correction(const IncrementProblem& prob, Eigen::VectorXd y) {
  IncrementSolver(prob.A, prob.dofs.plastic_count()).newton_correction(prob, y);
  return y;
}

inline std::pair<RveState, SolveReport> solve_increment(const IncrementProblem& prob, const RveState& warm_start,
                                                        const SolverSettings& settings = {}) {
  IncrementSolver solver(prob.A, prob.dofs.plastic_count(), settings);
  Eigen::VectorXd y = prob.dofs.pack(warm_start);
  SolveReport rep = solver.solve(prob, y);
  return {prob.dofs.unpack(y), std::move(rep)};
}

}  // namespace rveplast
