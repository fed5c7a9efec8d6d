#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "curiefield/stats.hpp"

using namespace curiefield;

TEST(Ks, SinglePointAtMedian) {
  const auto s = EmpiricalSample::from({0.0});
  EXPECT_EQ(ks_distance(s, [](double x) { return normal_cdf(x); }), 0.5);
}

TEST(Ks, PointMassAgainstStep) {
  const auto s = EmpiricalSample::from({1.0, 1.0, 1.0});
  EXPECT_EQ(ks_distance(s, [](double x) { return x >= 1.0 ? 1.0 : 0.0; }), 0.0);
}

TEST(Ks, SampleFromItsOwnCdf) {
  auto rng = make_stream(60, Substream::auxiliary, 0);
  std::vector<double> u(1'000'000);
  for (auto& x : u) {
    x = uniform_open(rng);
  }
  EXPECT_LE(ks_distance(EmpiricalSample::from(u), [](double x) { return x; }), 0.002);
}

TEST(Ks, TwoSample) {
  const auto a = EmpiricalSample::from({1.0, 2.0, 3.0});
  EXPECT_EQ(ks_two_sample(a, a), 0.0);
  EXPECT_EQ(ks_two_sample(a, EmpiricalSample::from({10.0, 11.0})), 1.0);
}

TEST(Tv, BasicCases) {
  ExactPmf p{1, {-1, 1}, {1.0, 0.0}};
  ExactPmf q{1, {-1, 1}, {0.0, 1.0}};
  EXPECT_EQ(tv_distance(p, p), 0.0);
  EXPECT_EQ(tv_distance(p, q), 1.0);
  ExactPmf r{2, {-2, 0, 2}, {0.5, 0.0, 0.5}};
  EXPECT_THROW(tv_distance(p, r), std::invalid_argument);
}

TEST(Independence, IndependentAndComonotonePairs) {
  auto rng = make_stream(61, Substream::calibration, 0);
  const std::size_t n = 100000;
  std::vector<std::pair<double, double>> ind(n), same(n);
  for (std::size_t i = 0; i < n; ++i) {
    ind[i] = {uniform_open(rng), uniform_open(rng)};
    same[i] = {ind[i].first, ind[i].first};
  }
  EXPECT_LE(independence_check(ind), independence_bound(n));
  EXPECT_GE(independence_check(same), 0.1);
}

TEST(Moments, CovarianceMatrix) {
  const std::vector<std::vector<double>> rows = {{1, 2}, {2, 4}, {3, 6}};
  const auto c = covariance_matrix(rows);
  EXPECT_DOUBLE_EQ(c[0][0], 1.0);
  EXPECT_DOUBLE_EQ(c[0][1], 2.0);
  EXPECT_DOUBLE_EQ(c[1][1], 4.0);
}

TEST(ParallelFor, IdenticalAcrossWorkerCounts) {
  std::vector<double> reference;
  for (int workers : {1, 4, 8}) {
    std::vector<double> out(1000);
    parallel_for(out.size(), workers, [&](std::size_t i) {
      auto rng = make_stream(62, Substream::uniforms, i);
      out[i] = uniform_open(rng);
    });
    if (reference.empty()) {
      reference = out;
    }
    EXPECT_EQ(out, reference);
  }
}

TEST(Sweep, OneInversionAllowed) {
  EXPECT_TRUE(assess_sweep({0.3, 0.2, 0.1}, 0.15).pass);
  EXPECT_TRUE(assess_sweep({0.3, 0.2, 0.1}, 0.15).strictly_decreasing);
  const auto one = assess_sweep({0.2, 0.3, 0.1}, 0.15);
  EXPECT_TRUE(one.pass);
  EXPECT_FALSE(one.strictly_decreasing);
  EXPECT_FALSE(assess_sweep({0.1, 0.2, 0.3}, 0.5).pass);
  EXPECT_FALSE(assess_sweep({0.3, 0.2, 0.1}, 0.05).pass);
}

TEST(Verdicts, Relations) {
  EXPECT_TRUE(make_verdict("a", 0.1, Relation::at_most, 0.2).pass);
  EXPECT_FALSE(make_verdict("a", 0.3, Relation::at_most, 0.2).pass);
  EXPECT_TRUE(make_verdict("b", -0.1, Relation::within, 0.2).pass);
  EXPECT_TRUE(make_verdict("c", 1.0, Relation::holds, 1.0).pass);
  ExperimentReport r;
  r.add(make_verdict("x", 1.0, Relation::at_least, 2.0));
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.statistics.at("x.threshold"), 2.0);
}
