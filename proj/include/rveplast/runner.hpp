#pragma once

// Experiment runner behind the rve-plast command line tool.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "rveplast/config.hpp"
#include "rveplast/csv.hpp"
#include "rveplast/stats.hpp"

namespace rveplast {

/// Pseudo-times sampling the elastic, transitional and plastic regimes of the
/// monotonic preset.
struct TimeLabel {
  const char* name;
  double t;
};
inline constexpr TimeLabel kRegimeTimes[] = {{"elast", 0.08}, {"trans", 0.22}, {"plast", 1.0}};

inline StrainPath path_for(const RunConfig& c) {
  switch (c.experiment) {
    case Experiment::cyclic: return cyclic_path(c.amplitude, c.frequency, c.N, c.T);
    case Experiment::custom_path: {
      std::ifstream in(c.path_file);
      if (!in) throw ConfigError("path_file", "cannot open '" + c.path_file + "'");
      return csv::read_strain_path(in);
    }
    default: return monotonic_path(c.rate, c.N, c.T);
  }
}

inline RunOptions run_options(const RunConfig& c) { return {c.solver, c.clamp, c.threads}; }

/// Index of the grid point closest to t, or -1 if t lies outside the path.
inline int nearest_step(const std::vector<double>& grid, double t) {
  if (grid.empty() || t < grid.front() || t > grid.back() + 1e-12) return -1;
  int best = 0;
  for (int l = 1; l < static_cast<int>(grid.size()); ++l)
    if (std::abs(grid[l] - t) < std::abs(grid[best] - t)) best = l;
  return best;
}

inline std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream os(dir / name);
  if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
  return os;
}

inline void write_ensemble(const McEnsemble& ens, const std::filesystem::path& dir) {
  auto traj = open_output(dir, "trajectories.csv");
  csv::write_trajectory_header(traj);
  for (int i = 0; i < ens.M; ++i)
    for (std::size_t l = 0; l < ens.samples[i].size(); ++l)
      csv::write_trajectory_row(traj, {i + 1, static_cast<int>(l), ens.samples[i][l]});

  auto mean = open_output(dir, "mean.csv");
  csv::write_trajectory_header(mean);
  for (std::size_t l = 0; l < ens.mean.size(); ++l) {
    StressRecord r = ens.samples[0][l];
    r.s = ens.mean[l];
    r.sigma = ps_adjoint(r.s);
    r.R = {};
    r.energy = 0.0;
    for (const auto& traj_i : ens.samples) {
      for (int a = 0; a < kEdgeTypes; ++a) r.R[a] += traj_i[l].R[a];
      r.energy += traj_i[l].energy;
    }
    for (double& v : r.R) v /= ens.M;
    r.energy /= ens.M;
    csv::write_trajectory_row(mean, {0, static_cast<int>(l), r});
  }
}

/// Slope rows for the relative first-component errors at the regime times.
inline std::vector<csv::SlopeRow> error_slopes(const ErrorTable& tab, int window_lo, int window_hi) {
  std::vector<csv::SlopeRow> rows;
  const std::string window = std::to_string(window_lo) + "-" + std::to_string(window_hi);
  for (const auto& tl : kRegimeTimes) {
    const int l = nearest_step(tab.t, tl.t);
    if (l < 0) continue;
    std::vector<double> xs_sys, ys_sys, xs_var, ys_var;
    for (std::size_t li = 0; li < tab.Ls.size(); ++li) {
      const int L = tab.Ls[li];
      if (L < window_lo || L > window_hi) continue;
      const double rel_sys = tab.e_sys[li][l][0] / std::abs(tab.mean_ref[l][0]);
      const double rel_var = tab.variance[li][l][0] / (tab.F11[l] * tab.F11[l]);
      if (std::isfinite(rel_sys) && rel_sys > 0.0) {
        xs_sys.push_back(L);
        ys_sys.push_back(rel_sys);
      }
      if (std::isfinite(rel_var) && rel_var > 0.0) {
        xs_var.push_back(L);
        ys_var.push_back(rel_var);
      }
    }
    if (xs_sys.size() >= 2) rows.push_back({"e_sys_rel_1", tl.name, window, loglog_slope(xs_sys, ys_sys)});
    if (xs_var.size() >= 2) rows.push_back({"variance_rel_1", tl.name, window, loglog_slope(xs_var, ys_var)});
  }
  return rows;
}

/// Error-table rows; `reference_scaling` anchors L^{-d}(ln L)^d to the first
/// L's systematic error (error-study) or L^{-d} to its variance (variance-study).
inline std::vector<csv::ErrorRow> error_rows(const ErrorTable& tab, bool variance_reference) {
  std::vector<csv::ErrorRow> rows;
  const double L0 = tab.Ls.front();
  for (std::size_t li = 0; li < tab.Ls.size(); ++li) {
    const double L = tab.Ls[li];
    for (std::size_t l = 0; l < tab.t.size(); ++l)
      for (int a = 0; a < kEdgeTypes; ++a) {
        const double ref = variance_reference
                               ? tab.variance[0][l][a] * (L0 * L0) / (L * L)
                               : tab.e_sys[0][l][a] * systematic_error_reference(L) / systematic_error_reference(L0);
        rows.push_back({tab.Ls[li], static_cast<int>(l), tab.t[l], tab.F11[l], a + 1, tab.e_sys[li][l][a],
                        tab.variance[li][l][a], ref});
      }
  }
  return rows;
}

/// Runs the configured experiment, writes its CSV files under c.out and prints
/// a one-line summary. Returns 0 on success.
inline int run(const RunConfig& c, std::ostream& log) {
  const std::filesystem::path dir(c.out);
  const StrainPath path = path_for(c);
  const RunOptions opt = run_options(c);

  if (c.experiment == Experiment::error_study || c.experiment == Experiment::variance_study) {
    const bool variance = c.experiment == Experiment::variance_study;
    const ErrorTable tab = systematic_error_study(c.law, c.L_list, c.L_max, c.M, c.seed, path, opt);
    {
      auto os = open_output(dir, variance ? "variance_study.csv" : "error_study.csv");
      os << csv::kErrorStudyHeader << '\n';
      for (const auto& row : error_rows(tab, variance)) csv::write_error_row(os, row);
    }
    const auto slopes = error_slopes(tab, c.window_lo, c.window_hi);
    {
      auto os = open_output(dir, "slopes.csv");
      os << csv::kSlopeHeader << '\n';
      for (const auto& row : slopes) csv::write_slope_row(os, row);
    }
    log << to_string(c.experiment) << " M=" << c.M << " L_max=" << c.L_max << " N=" << c.N << ":";
    for (const auto& s : slopes) log << ' ' << s.quantity << '(' << s.t_label << ")=" << csv::num(s.slope);
    log << '\n';
    return 0;
  }

  const McEnsemble ens = monte_carlo(c.law, c.L, c.M, c.seed, path, opt);
  write_ensemble(ens, dir);
  const StrainVector& last = ens.mean.back();
  log << to_string(c.experiment) << " L=" << c.L << " M=" << c.M << " N=" << path.steps()
      << ": final mean s=(" << csv::num(last[0]) << ", " << csv::num(last[1]) << ", " << csv::num(last[2]) << ")\n";
  return 0;
}

}  // namespace rveplast
