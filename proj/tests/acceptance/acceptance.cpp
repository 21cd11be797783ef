// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "rveplast/reference.hpp"
#include "rveplast/runner.hpp"

using namespace rveplast;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Collects solver certificates from every solve of every run.
struct Audit {
  std::mutex mu;
  long solves = 0;
  long energy_violations = 0;
  long residual_violations = 0;
  double worst_residual_ratio = 0.0;

  void operator()(int, const SolveReport& rep) {
    bool energy_ok = true;
    for (std::size_t k = 1; k < rep.energy_history.size(); ++k)
      if (rep.energy_history[k] > rep.energy_history[k - 1] + 1e-12 * std::abs(rep.energy_history[k - 1]))
        energy_ok = false;
    const double ratio = rep.residual / (1e-8 * (1.0 + rep.load_norm));
    std::lock_guard lock(mu);
    ++solves;
    if (!energy_ok) ++energy_violations;
    if (ratio > 1.0) ++residual_violations;
    worst_residual_ratio = std::max(worst_residual_ratio, ratio);
  }

  StepObserver observer() {
    return [this](int l, const SolveReport& rep) { (*this)(l, rep); };
  }
};

Audit g_audit;

RunOptions audited(int threads = 1) {
  RunOptions opt;
  opt.threads = threads;
  opt.observer = g_audit.observer();
  return opt;
}

std::vector<StressRecord> audited_records(const Realization& real, const StrainPath& path) {
  return run_path_records(real, path, {}, ClampMode::periodic_corner, g_audit.observer());
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  if (!out.pass) ++g_failures;
  std::printf("criterion %d %s: %s | %s | %.2f s\n", id, out.pass ? "PASS" : "FAIL", title, out.detail.c_str(),
              seconds_since(t0));
  std::fflush(stdout);
}

// Homogeneous law at the midpoints of the default intervals.
constexpr double kA = 1.5e6, kH = 1.625e6, kSy = 1e3;

int first_step_with(const std::vector<double>& values, double threshold) {
  for (std::size_t l = 0; l < values.size(); ++l)
    if (values[l] > threshold) return static_cast<int>(l);
  return -1;
}

std::vector<std::array<double, kEdgeTypes>> mean_fractions(const McEnsemble& ens) {
  std::vector<std::array<double, kEdgeTypes>> R(ens.mean.size(), std::array<double, kEdgeTypes>{});
  for (const auto& traj : ens.samples)
    for (std::size_t l = 0; l < traj.size(); ++l)
      for (int a = 0; a < kEdgeTypes; ++a) R[l][a] += traj[l].R[a] / ens.M;
  return R;
}

// First step at which every edge of type `a` in every sample is plastic.
int first_step_all_plastic(const McEnsemble& ens, int a) {
  for (int l = 0; l <= ens.steps(); ++l)
    if (std::all_of(ens.samples.begin(), ens.samples.end(), [&](const auto& traj) { return traj[l].R[a] == 1.0; }))
      return l;
  return -1;
}

double relative_spread(const std::vector<double>& xs) {
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  return std::max(*hi - mean, mean - *lo) / std::abs(mean);
}

Outcome single_spring() {
  const auto t0 = Clock::now();
  const StrainPath path = monotonic_path(0.0034, 50, 1.0);
  const auto rec = audited_records(sample(MaterialLaw::point_mass(kA, kH, kSy), 1, 1, 3), path);
  double worst = 0.0;
  for (int k = 0; k < kEdgeTypes; ++k) {
    std::vector<double> strains;
    for (const auto& F : path.F) strains.push_back(ps_map(F)[k]);
    const auto oracle = reference::spring_trajectory({kA, kH, kSy}, strains);
    for (std::size_t l = 0; l < rec.size(); ++l) worst = std::max(worst, std::abs(rec[l].s[k] - oracle.stress[l]));
  }
  const double t = seconds_since(t0);
  return {worst < 1e-6 && t < 1.0, fmt("max |s - s_spring| = %.3g (< 1e-6), runtime %.3f s (< 1 s)", worst, t)};
}

Outcome brute_force() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> strain(-3e-3, 3e-3), plastic(-5e-4, 5e-4);
  double worst_gap = -1e300, worst_dof = 0.0;
  for (int inst = 0; inst < 10; ++inst) {
    const Realization real = sample(MaterialLaw{}, 500 + inst, 1, 2);
    const SymTensor2 F{strain(rng), strain(rng), strain(rng)};
    Eigen::VectorXd prev(12);
    for (int i = 0; i < prev.size(); ++i) prev[i] = plastic(rng);
    const auto prob = IncrementProblem::build(real, ClampMode::periodic_corner, F, &prev);
    IncrementSolver solver(prob.A, prob.dofs.plastic_count());
    Eigen::VectorXd y = Eigen::VectorXd::Zero(prob.dofs.size());
    y.head(12) = prev;
    g_audit(1, solver.solve(prob, y));
    const Eigen::VectorXd oracle =
        reference::brute_force_increment(prob, 1000000, 1.0 / reference::gershgorin_bound(prob.A));
    worst_gap = std::max(worst_gap, increment_energy(prob, y) - increment_energy(prob, oracle));
    worst_dof = std::max(worst_dof, (y - oracle).lpNorm<Eigen::Infinity>());
  }
  const double t = seconds_since(t0);
  return {worst_gap <= 1e-9 && worst_dof < 1e-6 && t < 10.0,
          fmt("max E_solver - E_oracle = %.3g (<= 1e-9), max DOF diff = %.3g (< 1e-6), runtime %.2f s (< 10 s)",
              worst_gap, worst_dof, t)};
}

Outcome rate_independence() {
  const Realization real = sample(MaterialLaw{}, 1, 1, 6);
  const StrainPath uniform = cyclic_path(3e-3, 8.0, 50, 1.0);
  StrainPath warped = uniform;
  for (double& t : warped.t) t = 3.0 * t + t * t;
  const auto a = audited_records(real, uniform);
  const auto b = audited_records(real, warped);
  int mismatches = 0;
  for (std::size_t l = 0; l < a.size(); ++l)
    if (a[l].s != b[l].s || a[l].R != b[l].R || a[l].sigma != b[l].sigma || a[l].energy != b[l].energy) ++mismatches;
  return {mismatches == 0 && a.size() == b.size(),
          fmt("%d of %zu records differ between the uniform and the warped time grid", mismatches, a.size())};
}

Outcome linearity_and_yield() {
  // Elastic linearity with the random law at 1e-2 loads.
  double worst = 0.0;
  for (std::uint32_t id = 1; id <= 3; ++id) {
    const auto rec = audited_records(sample(MaterialLaw{}, 1, id, 8), monotonic_path(0.0034e-2, 50, 1.0));
    for (int l = 1; 2 * l <= 50; ++l) {
      double diff = 0.0, scale = 0.0;
      for (int a = 0; a < kEdgeTypes; ++a) {
        diff = std::max(diff, std::abs(rec[2 * l].s[a] - 2.0 * rec[l].s[a]));
        scale = std::max(scale, std::abs(2.0 * rec[l].s[a]));
      }
      worst = std::max(worst, diff / scale);
    }
  }
  // Yield onset for homogeneous coefficients.
  const StrainPath path = monotonic_path(0.0034, 50, 1.0);
  const double dF = path.F[1].xx;
  const auto rec = audited_records(sample(MaterialLaw::point_mass(kA, kH, kSy), 1, 1, 4), path);
  std::vector<double> R1, R3;
  for (const auto& r : rec) R1.push_back(r.R[0]), R3.push_back(r.R[2]);
  const int l1 = first_step_with(R1, 0.0), l3 = first_step_with(R3, 0.0);
  const double F1 = l1 < 0 ? NAN : path.F[l1].xx, F3 = l3 < 0 ? NAN : path.F[l3].xx;
  const bool onset1 = std::abs(F1 - kSy / kA) <= dF;
  const bool onset3 = std::abs(F3 - 2 * kSy / kA) <= dF;
  return {worst <= 1e-8 && onset1 && onset3,
          fmt("max |s(2F) - 2 s(F)| / |2 s(F)| = %.3g (<= 1e-8); horizontal onset F11 = %.4g (expect %.4g +- %.2g); "
              "diagonal onset F11 = %.4g (expect %.4g +- %.2g)",
              worst, F1, kSy / kA, dF, F3, 2 * kSy / kA, dF)};
}

Outcome cyclic_hysteresis() {
  const StrainPath path = cyclic_path(3e-3, 8.0, 50, 1.0);
  auto t0 = Clock::now();
  const McEnsemble small = monte_carlo(MaterialLaw{}, 4, 5, 1, path, audited());
  const double t_small = seconds_since(t0);

  std::vector<double> F11;
  for (const auto& F : path.F) F11.push_back(F.xx);
  int min_distinct = 1 << 30;
  int min_linear_pieces = 1 << 30;
  for (const auto& traj : small.samples) {
    std::vector<double> s1;
    for (const auto& r : traj) s1.push_back(r.s[0]);
    const auto slopes = numerical_slope(s1, F11);
    std::vector<double> distinct;
    for (double k : slopes)
      if (std::none_of(distinct.begin(), distinct.end(), [&](double d) { return std::abs(k - d) <= 0.01 * std::abs(d); }))
        distinct.push_back(k);
    min_distinct = std::min(min_distinct, static_cast<int>(distinct.size()));
    // Consecutive steps sharing one slope form a linear piece.
    int pieces = 0;
    for (std::size_t k = 1; k < slopes.size(); ++k)
      if (std::abs(slopes[k] - slopes[k - 1]) <= 1e-8 * std::abs(slopes[k - 1])) ++pieces;
    min_linear_pieces = std::min(min_linear_pieces, pieces);
  }

  t0 = Clock::now();
  const McEnsemble big = monte_carlo(MaterialLaw{}, 40, 5, 1, path, audited());
  const double t_big = seconds_since(t0);
  const int last = path.steps();
  const double sd4 = std::sqrt(sample_variance(small, last, 0));
  const double sd40 = std::sqrt(sample_variance(big, last, 0));
  return {t_small < 5.0 && min_distinct >= 2 && min_linear_pieces >= 1 && sd4 >= 2.0 * sd40 && t_big < 300.0,
          fmt("L=4 runtime %.2f s (< 5 s); min distinct slopes per sample %d (>= 2); min repeated-slope step pairs "
              "per sample %d (>= 1); std s1(T): L=4 %.4g, L=40 %.4g, ratio %.2f (>= 2); L=40 runtime %.1f s (< 300 s)",
              t_small, min_distinct, min_linear_pieces, sd4, sd40, sd4 / sd40, t_big)};
}

Outcome monotonic_regimes() {
  const auto t0 = Clock::now();
  const StrainPath path = monotonic_path(0.0034, 50, 1.0);
  const McEnsemble ens = monte_carlo(MaterialLaw{}, 30, 40, 1, path, audited());
  const double t = seconds_since(t0);
  const auto R = mean_fractions(ens);
  std::vector<double> F11, R1, R2, R3, s1;
  for (std::size_t l = 0; l < R.size(); ++l) {
    F11.push_back(path.F[l].xx);
    R1.push_back(R[l][0]);
    R2.push_back(R[l][1]);
    R3.push_back(R[l][2]);
    s1.push_back(ens.mean[l][0]);
  }
  const bool r2_zero = *std::max_element(R2.begin(), R2.end()) == 0.0;
  const int r1_on = first_step_with(R1, 0.0), r1_full = first_step_all_plastic(ens, 0);
  const int r3_on = first_step_with(R3, 0.0), r3_full = first_step_all_plastic(ens, 2);
  auto at = [&](int l) { return l < 0 ? NAN : F11[l]; };
  const bool r1_ok = r1_on >= 0 && at(r1_on) >= 0.0003 && at(r1_on) <= 0.0008 && r1_full >= 0 && at(r1_full) <= 0.0015;
  const bool r3_ok = r3_on > r1_on && r3_full >= 0 && at(r3_full) <= 0.0025;

  const auto slopes = numerical_slope(s1, F11);
  std::vector<double> early, late;
  for (std::size_t k = 1; k < F11.size(); ++k) {
    if (F11[k] <= 0.0003) early.push_back(slopes[k - 1]);
    if (F11[k - 1] >= 0.0025) late.push_back(slopes[k - 1]);
  }
  const double e_spread = relative_spread(early), l_spread = relative_spread(late);
  const int l_25 = nearest_step(path.t, 0.0025 / 0.0034);
  return {r2_zero && r1_ok && r3_ok && e_spread <= 0.01 && l_spread <= 0.01 && t < 900.0,
          fmt("R2 == 0: %s; R1 onset F11 = %.4g, full at %.4g; R3 onset F11 = %.4g, full at %.4g "
              "(mean R3 = %.6f at F11 = %.4g); slope spread on [0, 3e-4] %.2g and on [2.5e-3, 3.4e-3] %.2g "
              "(<= 1%%); runtime %.1f s (< 900 s)",
              r2_zero ? "yes" : "no", at(r1_on), at(r1_full), at(r3_on), at(r3_full), R3[l_25], F11[l_25], e_spread,
              l_spread, t)};
}

Outcome random_error() {
  const auto t0 = Clock::now();
  const StrainPath path = monotonic_path(0.0034, 50, 1.0);
  const std::vector<int> Ls{6, 10, 14, 18, 22};
  const ErrorTable tab = systematic_error_study(MaterialLaw{}, Ls, 22, 25, 1, path, audited());
  const double t = seconds_since(t0);
  auto slope_at = [&](double time) {
    const int l = nearest_step(tab.t, time);
    std::vector<double> xs, ys;
    for (std::size_t li = 0; li < Ls.size(); ++li) {
      xs.push_back(Ls[li]);
      ys.push_back(tab.variance[li][l][0]);
    }
    return loglog_slope(xs, ys);
  };
  const double s_el = slope_at(0.08), s_pl = slope_at(1.0);
  auto inside = [](double s) { return s >= -2.8 && s <= -1.2; };
  return {inside(s_el) && inside(s_pl) && t < 600.0,
          fmt("variance slope at t=0.08: %.3f, at t=1.0: %.3f (both in [-2.8, -1.2]); runtime %.1f s (< 600 s)", s_el,
              s_pl, t)};
}

Outcome systematic_error() {
  const auto t0 = Clock::now();
  const StrainPath path = monotonic_path(0.0034, 50, 1.0);
  const std::vector<int> Ls{6, 10, 14, 18, 22, 26};
  const ErrorTable tab = systematic_error_study(MaterialLaw{}, Ls, 42, 25, 1, path, audited());
  const double t = seconds_since(t0);
  const int l = nearest_step(tab.t, 0.08);
  std::vector<double> xs, rel;
  for (std::size_t li = 0; li < Ls.size(); ++li) {
    xs.push_back(Ls[li]);
    rel.push_back(tab.e_sys[li][l][0] / std::abs(tab.mean_ref[l][0]));
  }
  std::vector<double> paired;
  for (std::size_t i = 0; i + 1 < rel.size(); ++i) paired.push_back(0.5 * (rel[i] + rel[i + 1]));
  bool decreasing = true;
  for (std::size_t i = 1; i < paired.size(); ++i) decreasing = decreasing && paired[i] < paired[i - 1];
  double slope = NAN;
  const bool positive = std::all_of(rel.begin(), rel.end(), [](double v) { return v > 0.0; });
  if (positive) slope = loglog_slope(xs, rel);
  std::string values;
  for (double v : rel) values += fmt("%s%.3g", values.empty() ? "" : ", ", v);
  return {decreasing && positive && slope >= -3.0 && slope <= -1.2 && t < 1800.0,
          fmt("relative E_sys at t=0.08 for L=6..26: [%s]; pairwise averages decreasing: %s; slope %.3f "
              "(in [-3.0, -1.2]); runtime %.1f s (< 1800 s)",
              values.c_str(), decreasing ? "yes" : "no", slope, t)};
}

Outcome certificates() {
  return {g_audit.solves > 0 && g_audit.energy_violations == 0 && g_audit.residual_violations == 0,
          fmt("%ld increment solves audited; energy increases: %ld; residual above 1e-8 (1 + |f|_inf): %ld "
              "(worst ratio %.3g)",
              g_audit.solves, g_audit.energy_violations, g_audit.residual_violations, g_audit.worst_residual_ratio)};
}

}  // namespace

int main() {
  report(1, "single-spring oracle", single_spring);
  report(2, "brute-force equivalence", brute_force);
  report(3, "rate independence", rate_independence);
  report(4, "elastic linearity and yield onset", linearity_and_yield);
  report(5, "cyclic hysteresis", cyclic_hysteresis);
  report(6, "monotonic regime structure", monotonic_regimes);
  report(7, "random-error scaling", random_error);
  report(8, "systematic-error decay", systematic_error);
  report(9, "solver certificates", certificates);
  std::printf("%s: %d of 9 criteria failed\n", g_failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
