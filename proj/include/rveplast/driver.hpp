#pragma once

// Time-incremental evolution of one realization along a macroscopic strain
// path, and extraction of the effective stress and plastic fractions.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "rveplast/assembly.hpp"
#include "rveplast/randfield.hpp"
#include "rveplast/solver.hpp"

namespace rveplast {

struct StrainPath {
  std::vector<double> t;
  std::vector<SymTensor2> F;

  int steps() const { return static_cast<int>(t.size()) - 1; }

  void validate() const {
    if (t.size() < 2 || t.size() != F.size())
      throw std::invalid_argument("strain path: need matching stamps and strains, at least two of each");
    if (!(F.front() == SymTensor2{})) throw std::invalid_argument("strain path: F(t0) must be zero");
    for (std::size_t l = 1; l < t.size(); ++l)
      if (!(t[l] > t[l - 1])) throw std::invalid_argument("strain path: time stamps must increase strictly");
  }
};

/// Uniform grid t_l = l T / N with F(t_l) = diag(g(t_l), 0).
template <class Fn>
StrainPath uniaxial_path(Fn&& g, int N, double T) {
  if (N < 1) throw std::invalid_argument("strain path: N must be >= 1");
  if (!(T > 0.0)) throw std::invalid_argument("strain path: T must be > 0");
  StrainPath path;
  for (int l = 0; l <= N; ++l) {
    const double t = T * l / N;
    path.t.push_back(t);
    path.F.push_back(l == 0 ? SymTensor2{} : SymTensor2::diag(g(t), 0.0));
  }
  return path;
}

inline StrainPath cyclic_path(double amplitude = 3e-3, double frequency = 8.0, int N = 50, double T = 1.0) {
  return uniaxial_path([=](double t) { return amplitude * std::sin(frequency * t); }, N, T);
}

inline StrainPath monotonic_path(double rate = 0.0034, int N = 50, double T = 1.0) {
  return uniaxial_path([=](double t) { return rate * t; }, N, T);
}

using PlasticFractions = std::array<double, kEdgeTypes>;

struct StressRecord {
  double t = 0.0;
  SymTensor2 F;
  StrainVector s{};
  SymTensor2 sigma;
  PlasticFractions R{};
  double energy = 0.0;
  friend bool operator==(const StressRecord&, const StressRecord&) = default;
};

/// s_α = L^{-d} Σ_{edges of type α} a(e) ((P_s F)_α + grad_s phi(e) - p(e)).
inline StrainVector stress_vector(const Realization& real, const RveState& state, const SymTensor2& F) {
  const PeriodicLattice lat = real.lattice();
  const StrainVector Fe = ps_map(F);
  StrainVector s{};
  for (int e = 0; e < lat.edge_count(); ++e) {
    const int type = lat.edge_type(e);
    s[type] += real.a[e] * (Fe[type] + projected_edge_derivative(state.phi, e, lat) - state.p[e]);
  }
  const double inv = 1.0 / lat.node_count();
  for (double& v : s) v *= inv;
  return s;
}

/// Share of type-α edges with p != 0 (exact; the solver leaves untouched
/// springs bitwise at zero).
inline PlasticFractions plastic_fraction(const RveState& state, const PeriodicLattice& lat) {
  PlasticFractions R{};
  for (int e = 0; e < lat.edge_count(); ++e)
    if (state.p[e] != 0.0) R[lat.edge_type(e)] += 1.0;
  for (double& v : R) v /= lat.node_count();
  return R;
}

enum class Regime { elastic, transitional, plastic };

inline Regime regime_of(double fraction) {
  if (fraction <= 0.0) return Regime::elastic;
  if (fraction >= 1.0) return Regime::plastic;
  return Regime::transitional;
}

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::elastic: return "elastic";
    case Regime::transitional: return "transitional";
    case Regime::plastic: return "plastic";
  }
  return "?";
}

struct StepResult {
  RveState state;
  StressRecord record;
  SolveReport report;
};

class PathError : public std::runtime_error {
 public:
  PathError(const std::string& what, int step) : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Walks the path from the zero state. `visit(l, state, record, report)` is
/// called for every l = 0..N (l = 0 is the trivial initial state).
template <class Visit>
void evolve(const Realization& real, const StrainPath& path, const SolverSettings& settings, ClampMode clamp,
            Visit&& visit) {
  path.validate();
  IncrementProblem prob = IncrementProblem::build(real, clamp, SymTensor2{});
  IncrementSolver solver(prob.A, prob.dofs.plastic_count(), settings);
  const PeriodicLattice lat = real.lattice();

  RveState state = RveState::zero(lat);
  Eigen::VectorXd y = prob.dofs.pack(state);
  {
    StressRecord rec{path.t[0], path.F[0], {}, {}, {}, 0.0};
    visit(0, state, rec, SolveReport{0, 0.0, 0.0, true, false, {0.0}});
  }
  for (int l = 1; l <= path.steps(); ++l) {
    prob.set_load(real, path.F[l]);
    prob.p_prev = y.head(prob.dofs.plastic_count());
    SolveReport rep;
    try {
      rep = solver.solve(prob, y);
    } catch (const SolverError& err) {
      throw PathError(std::string(err.what()) + " at step " + std::to_string(l), l);
    }
    state = prob.dofs.unpack(y);
    StressRecord rec;
    rec.t = path.t[l];
    rec.F = path.F[l];
    rec.s = stress_vector(real, state, rec.F);
    rec.sigma = ps_adjoint(rec.s);
    rec.R = plastic_fraction(state, lat);
    rec.energy = rep.energy;
    visit(l, state, rec, rep);
  }
}

/// States, records and solver reports for l = 0..N.
inline std::vector<StepResult> run_path(const Realization& real, const StrainPath& path,
                                        const SolverSettings& settings = {},
                                        ClampMode clamp = ClampMode::periodic_corner) {
  std::vector<StepResult> out;
  evolve(real, path, settings, clamp,
         [&](int, const RveState& s, const StressRecord& r, const SolveReport& rep) { out.push_back({s, r, rep}); });
  return out;
}

/// Optional per-step hook receiving the solver report of steps 1..N.
using StepObserver = std::function<void(int step, const SolveReport&)>;

/// Records only; avoids keeping every intermediate state.
inline std::vector<StressRecord> run_path_records(const Realization& real, const StrainPath& path,
                                                  const SolverSettings& settings = {},
                                                  ClampMode clamp = ClampMode::periodic_corner,
                                                  const StepObserver& observer = {}) {
  std::vector<StressRecord> out;
  evolve(real, path, settings, clamp, [&](int l, const RveState&, const StressRecord& r, const SolveReport& rep) {
    out.push_back(r);
    if (observer && l > 0) observer(l, rep);
  });
  return out;
}

}  // namespace rveplast
