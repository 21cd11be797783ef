#include <atomic>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "rveplast/stats.hpp"

using namespace rveplast;

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(37);
  parallel_for(37, 4, [&](int i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, RethrowsLowestFailingIndex) {
  try {
    parallel_for(20, 3, [](int i) {
      if (i == 7 || i == 13) throw std::runtime_error(std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "7");
  }
}

TEST(MonteCarlo, SingleSampleMeanIsTheTrajectory) {
  const StrainPath path = cyclic_path(3e-3, 8.0, 10, 1.0);
  const McEnsemble ens = monte_carlo(MaterialLaw{}, 3, 1, 42, path);
  const auto direct = run_path_records(sample(MaterialLaw{}, 42, 1, 3), path);
  ASSERT_EQ(ens.mean.size(), direct.size());
  for (std::size_t l = 0; l < direct.size(); ++l) EXPECT_EQ(ens.mean[l], direct[l].s);
  EXPECT_EQ(ens.steps(), 10);
}

TEST(MonteCarlo, PointMassHasZeroVariance) {
  const McEnsemble ens =
      monte_carlo(MaterialLaw::point_mass(1.5e6, 1.6e6, 1e3), 3, 4, 1, monotonic_path(0.0034, 8, 1.0));
  for (int l = 0; l <= ens.steps(); ++l)
    for (int a = 0; a < kEdgeTypes; ++a) EXPECT_EQ(sample_variance(ens, l, a), 0.0);
}

TEST(SampleVariance, IsTheBiasedEstimator) {
  McEnsemble ens;
  ens.M = 2;
  StressRecord r0, r1;
  r1.s = {2.0, 0.0, 0.0};
  ens.samples = {{r0}, {r1}};
  ens.mean = ensemble_mean(ens.samples);
  EXPECT_DOUBLE_EQ(ens.mean[0][0], 1.0);
  EXPECT_DOUBLE_EQ(sample_variance(ens, 0, 0), 1.0);
}

TEST(SampleVariance, ScalesQuadraticallyInTheElasticRegime) {
  const McEnsemble ens = monte_carlo(MaterialLaw{}, 4, 6, 3, monotonic_path(2e-4, 2, 1.0));
  for (int a : {0, 2}) {
    const double v1 = sample_variance(ens, 1, a);
    ASSERT_GT(v1, 0.0);
    EXPECT_NEAR(sample_variance(ens, 2, a) / v1, 4.0, 4e-8);
  }
}

TEST(MonteCarlo, IndependentOfThreadCount) {
  const StrainPath path = monotonic_path(0.0034, 10, 1.0);
  const McEnsemble one = monte_carlo(MaterialLaw{}, 5, 6, 9, path, {{}, ClampMode::periodic_corner, 1});
  const McEnsemble many = monte_carlo(MaterialLaw{}, 5, 6, 9, path, {{}, ClampMode::periodic_corner, 3});
  EXPECT_EQ(one.samples, many.samples);
  EXPECT_EQ(one.mean, many.mean);
}

TEST(MonteCarlo, VarianceOfTheMeanFallsLikeOneOverM) {
  const StrainPath path = monotonic_path(2e-4, 1, 1.0);
  auto rerun_variance = [&](int M, std::uint64_t seed0) {
    std::vector<double> means;
    for (int k = 0; k < 20; ++k) means.push_back(monte_carlo(MaterialLaw{}, 4, M, seed0 + k, path).mean[1][0]);
    const double mu = std::accumulate(means.begin(), means.end(), 0.0) / means.size();
    double v = 0.0;
    for (double m : means) v += (m - mu) * (m - mu);
    return v / (means.size() - 1);
  };
  const double ratio = rerun_variance(5, 1000) / rerun_variance(20, 2000);
  EXPECT_GE(ratio, 2.5);
  EXPECT_LE(ratio, 6.5);
}

TEST(SystematicErrorStudy, ReferenceBoxHasNoError) {
  const ErrorTable tab = systematic_error_study(MaterialLaw{}, {6}, 6, 3, 1, monotonic_path(0.0034, 4, 1.0));
  for (const auto& step : tab.e_sys[0])
    for (double v : step) EXPECT_EQ(v, 0.0);
}

TEST(SystematicErrorStudy, RestrictionMatchesDirectEnsembles) {
  const StrainPath path = monotonic_path(0.0034, 4, 1.0);
  const ErrorTable tab = systematic_error_study(MaterialLaw{}, {3, 5}, 7, 3, 11, path);
  const McEnsemble direct = monte_carlo(MaterialLaw{}, 3, 3, 11, path);
  EXPECT_EQ(tab.mean[tab.index_of(3)], direct.mean);
  EXPECT_EQ(tab.variance[0][4][0], sample_variance(direct, 4, 0));
  const McEnsemble ref = monte_carlo(MaterialLaw{}, 7, 3, 11, path);
  EXPECT_EQ(tab.mean_ref, ref.mean);
  EXPECT_EQ(tab.e_sys[1][4][0], std::abs(tab.mean[1][4][0] - ref.mean[4][0]));
  EXPECT_THROW(tab.index_of(4), std::invalid_argument);
}

TEST(SystematicErrorStudy, RejectsBadInputs) {
  const StrainPath path = monotonic_path(0.0034, 2, 1.0);
  EXPECT_THROW(systematic_error_study(MaterialLaw{}, {8}, 6, 2, 1, path), std::invalid_argument);
  EXPECT_THROW(systematic_error_study(MaterialLaw{}, {}, 6, 2, 1, path), std::invalid_argument);
  EXPECT_THROW(systematic_error_study(MaterialLaw{}, {4}, 6, 0, 1, path), std::invalid_argument);
}

TEST(LogLogSlope, Examples) {
  const std::vector<double> xs{1, 2, 4};
  EXPECT_NEAR(loglog_slope(xs, std::vector<double>{1, 2, 4}), 1.0, 1e-14);
  EXPECT_NEAR(loglog_slope(xs, std::vector<double>{1, 0.25, 0.0625}), -2.0, 1e-14);
  EXPECT_NEAR(loglog_slope(xs, std::vector<double>{1, 0.5, 0.25}), -1.0, 1e-14);
  EXPECT_THROW(loglog_slope(xs, std::vector<double>{1, 0, 1}), std::invalid_argument);
  EXPECT_THROW(loglog_slope(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
}

TEST(NumericalSlope, Examples) {
  const auto s = numerical_slope(std::vector<double>{0, 3, 6}, std::vector<double>{0, 1, 2});
  EXPECT_EQ(s, (std::vector<double>{3, 3}));
  const auto q = numerical_slope(std::vector<double>{0, 1, 4}, std::vector<double>{0, 1, 2});
  EXPECT_EQ(q, (std::vector<double>{1, 3}));
  EXPECT_THROW(numerical_slope(std::vector<double>{0, 1}, std::vector<double>{1, 1}), std::invalid_argument);
}

TEST(ReferenceShapes, Values) {
  EXPECT_DOUBLE_EQ(random_error_reference(4.0), 0.25);
  EXPECT_DOUBLE_EQ(systematic_error_reference(std::exp(1.0)), std::exp(-2.0));
}
