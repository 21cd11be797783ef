#pragma once

// Monte-Carlo ensembles over realizations, the biased sample variance, the
// nested-restriction systematic error study, and slope fits.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rveplast/driver.hpp"

namespace rveplast {

/// Runs body(i) for i in [0, count) on up to `threads` workers. Results must be
/// written by index; the first exception (lowest index) is rethrown.
template <class Body>
void parallel_for(int count, int threads, Body&& body) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  int failed_index = count;
  std::exception_ptr failure;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

class SampleError : public std::runtime_error {
 public:
  SampleError(const std::string& what, std::uint32_t sample_id)
      : std::runtime_error(what), sample_id_(sample_id) {}
  std::uint32_t sample_id() const { return sample_id_; }

 private:
  std::uint32_t sample_id_;
};

struct McEnsemble {
  int L = 0;
  int M = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<StressRecord>> samples;  ///< [sample][l], sample ids 1..M
  std::vector<StrainVector> mean;                  ///< [l]

  int steps() const { return mean.empty() ? 0 : static_cast<int>(mean.size()) - 1; }
};

/// Mean over samples in ascending sample order.
inline std::vector<StrainVector> ensemble_mean(const std::vector<std::vector<StressRecord>>& samples) {
  if (samples.empty()) return {};
  std::vector<StrainVector> mean(samples.front().size(), StrainVector{});
  for (const auto& traj : samples)
    for (std::size_t l = 0; l < traj.size(); ++l)
      for (int a = 0; a < kEdgeTypes; ++a) mean[l][a] += traj[l].s[a];
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (auto& m : mean)
    for (double& v : m) v *= inv;
  return mean;
}

struct RunOptions {
  SolverSettings solver;
  ClampMode clamp = ClampMode::periodic_corner;
  int threads = 1;
  StepObserver observer;  ///< called concurrently from worker threads
};

/// Runs sample ids 1..M on the side-L box. Output does not depend on the
/// thread count.
inline McEnsemble monte_carlo(const MaterialLaw& law, int L, int M, std::uint64_t seed, const StrainPath& path,
                              const RunOptions& opt = {}) {
  if (M < 1) throw std::invalid_argument("monte_carlo: M must be >= 1");
  law.validate();
  path.validate();
  McEnsemble ens{L, M, seed, std::vector<std::vector<StressRecord>>(static_cast<std::size_t>(M)), {}};
  parallel_for(M, opt.threads, [&](int i) {
    const auto id = static_cast<std::uint32_t>(i + 1);
    try {
      ens.samples[i] = run_path_records(sample(law, seed, id, L), path, opt.solver, opt.clamp, opt.observer);
    } catch (const PathError& err) {
      throw SampleError("sample " + std::to_string(id) + ": " + err.what(), id);
    }
  });
  ens.mean = ensemble_mean(ens.samples);
  return ens;
}

/// (1/M) Σ_i (s_i - mean)^2 for component α at step l.
inline double sample_variance(const McEnsemble& ens, int l, int alpha) {
  double acc = 0.0;
  for (const auto& traj : ens.samples) {
    const double d = traj.at(l).s.at(alpha) - ens.mean.at(l)[alpha];
    acc += d * d;
  }
  return acc / static_cast<double>(ens.samples.size());
}

struct ErrorTable {
  std::vector<int> Ls;
  int L_max = 0;
  int M = 0;
  std::vector<double> t;
  std::vector<double> F11;
  std::vector<std::vector<StrainVector>> mean;      ///< [L index][l]
  std::vector<std::vector<StrainVector>> e_sys;     ///< [L index][l], |mean_L - mean_Lmax|
  std::vector<std::vector<StrainVector>> variance;  ///< [L index][l], biased sample variance
  std::vector<StrainVector> mean_ref;               ///< mean at L_max

  int index_of(int L) const {
    const auto it = std::find(Ls.begin(), Ls.end(), L);
    if (it == Ls.end()) throw std::invalid_argument("error table has no L = " + std::to_string(L));
    return static_cast<int>(it - Ls.begin());
  }
};

/// Samples M realizations on Λ_{L_max}, restricts each to Λ_L for every L in
/// `Ls`, and compares Monte-Carlo means against the L_max mean.
inline ErrorTable systematic_error_study(const MaterialLaw& law, const std::vector<int>& Ls, int L_max, int M,
                                         std::uint64_t seed, const StrainPath& path, const RunOptions& opt = {}) {
  if (M < 1) throw std::invalid_argument("systematic_error_study: M must be >= 1");
  if (Ls.empty()) throw std::invalid_argument("systematic_error_study: empty L list");
  for (int L : Ls)
    if (L < 1 || L > L_max)
      throw std::invalid_argument("systematic_error_study: L = " + std::to_string(L) + " outside [1, L_max]");
  law.validate();
  path.validate();

  std::vector<Realization> big(static_cast<std::size_t>(M));
  parallel_for(M, opt.threads, [&](int i) { big[i] = sample(law, seed, static_cast<std::uint32_t>(i + 1), L_max); });

  // Runs for every requested L plus the reference L_max, flattened for the pool.
  std::vector<int> sizes = Ls;
  if (std::find(sizes.begin(), sizes.end(), L_max) == sizes.end()) sizes.push_back(L_max);
  const int nL = static_cast<int>(sizes.size());
  std::vector<std::vector<std::vector<StressRecord>>> runs(
      static_cast<std::size_t>(nL), std::vector<std::vector<StressRecord>>(static_cast<std::size_t>(M)));
  // Largest boxes first keeps the pool busy to the end.
  std::vector<int> order(static_cast<std::size_t>(nL * M));
  for (int k = 0; k < nL * M; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return sizes[x / M] > sizes[y / M]; });
  parallel_for(nL * M, opt.threads, [&](int k) {
    const int li = order[k] / M;
    const int i = order[k] % M;
    const auto id = static_cast<std::uint32_t>(i + 1);
    try {
      runs[li][i] = run_path_records(restrict(big[i], sizes[li]), path, opt.solver, opt.clamp, opt.observer);
    } catch (const PathError& err) {
      throw SampleError("L = " + std::to_string(sizes[li]) + ", sample " + std::to_string(id) + ": " + err.what(), id);
    }
  });

  ErrorTable tab;
  tab.Ls = Ls;
  tab.L_max = L_max;
  tab.M = M;
  tab.t = path.t;
  for (const auto& F : path.F) tab.F11.push_back(F.xx);
  std::vector<std::vector<StrainVector>> means(static_cast<std::size_t>(nL));
  for (int li = 0; li < nL; ++li) means[li] = ensemble_mean(runs[li]);
  tab.mean_ref = means[std::find(sizes.begin(), sizes.end(), L_max) - sizes.begin()];

  const std::size_t steps = path.t.size();
  for (std::size_t li = 0; li < Ls.size(); ++li) {
    tab.mean.push_back(means[li]);
    std::vector<StrainVector> err(steps), var(steps);
    for (std::size_t l = 0; l < steps; ++l)
      for (int a = 0; a < kEdgeTypes; ++a) {
        err[l][a] = std::abs(means[li][l][a] - tab.mean_ref[l][a]);
        double acc = 0.0;
        for (int i = 0; i < M; ++i) {
          const double d = runs[li][i][l].s[a] - means[li][l][a];
          acc += d * d;
        }
        var[l][a] = acc / M;
      }
    tab.e_sys.push_back(std::move(err));
    tab.variance.push_back(std::move(var));
  }
  return tab;
}

/// Least-squares slope of log(ys) against log(xs).
inline double loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("loglog_slope: length mismatch");
  if (xs.size() < 2) throw std::invalid_argument("loglog_slope: need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw std::invalid_argument("loglog_slope: inputs must be positive");
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= xs.size();
  my /= ys.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = std::log(xs[i]) - mx;
    sxy += dx * (std::log(ys[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::invalid_argument("loglog_slope: all abscissae coincide");
  return sxy / sxx;
}

/// Difference quotients (v_k - v_{k-1}) / (F11_k - F11_{k-1}), k = 1..N.
inline std::vector<double> numerical_slope(std::span<const double> values, std::span<const double> F11) {
  if (values.size() != F11.size()) throw std::invalid_argument("numerical_slope: grids differ");
  std::vector<double> out;
  for (std::size_t k = 1; k < values.size(); ++k) {
    const double dF = F11[k] - F11[k - 1];
    if (dF == 0.0) throw std::invalid_argument("numerical_slope: zero strain increment at step " + std::to_string(k));
    out.push_back((values[k] - values[k - 1]) / dF);
  }
  return out;
}

/// L^{-d/2} (random error) and L^{-d} (ln L)^d (systematic error) reference
/// shapes for d = 2.
inline double random_error_reference(double L) { return 1.0 / L; }
inline double systematic_error_reference(double L) {
  const double lg = std::log(L);
  return lg * lg / (L * L);
}

}  // namespace rveplast
