#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "curiefield/limits.hpp"
#include "curiefield/stats.hpp"

using namespace curiefield;

TEST(Subcritical, Variance) {
  EXPECT_EQ(sigma2_subcritical(0.0), 1.0);
  EXPECT_EQ(sigma2_subcritical(0.5), 2.0);
  for (double beta : {0.1, 0.3, 0.5, 0.9}) {
    EXPECT_NEAR(sigma2_subcritical(beta), 1.0 + beta / (1.0 - beta), 1e-14);
  }
  EXPECT_THROW(sigma2_subcritical(1.0), std::domain_error);
}

TEST(FixedPoint, KnownValuesAndResiduals) {
  const auto t2 = fixed_point_tbeta(2.0);
  EXPECT_NEAR(t2.t, 0.957504024077269, 1e-12);
  EXPECT_NEAR(t2.x, 2.0 * t2.t, 1e-15);
  double t = 0.5;
  for (int i = 0; i < 200; ++i) {
    t = std::tanh(2.0 * t);
  }
  EXPECT_NEAR(t2.t, t, 1e-12);
  const auto near_one = fixed_point_tbeta(1.001);
  EXPECT_LT(near_one.t, 0.06);
  EXPECT_NEAR(near_one.t, 0.054723010317843, 1e-12);
  for (double beta : {1.1, 1.5, 2.0, 5.0, 10.0}) {
    const double tb = fixed_point_tbeta(beta).t;
    EXPECT_LE(std::abs(std::tanh(beta * tb) - tb), 1e-14) << beta;
    EXPECT_GT(tb, 0.0);
    EXPECT_LE(tb, 1.0);
  }
  EXPECT_THROW(fixed_point_tbeta(1.0), std::domain_error);
}

TEST(FixedPoint, MonotoneInBeta) {
  double last = 0.0;
  for (int i = 1; i <= 10; ++i) {
    const double tb = fixed_point_tbeta(1.0 + 0.3 * i).t;
    EXPECT_GT(tb, last);
    last = tb;
  }
}

TEST(Couple, TheoremAndBridgeValues) {
  const auto c = couple_supercritical_cov(2.0);
  EXPECT_NEAR(c.theorem_cross, 0.957955501069675, 1e-12);
  EXPECT_NEAR(c.bridge_cross, 0.001805907969625, 1e-12);
  EXPECT_NEAR(c.variance, 1.0 - c.t_beta * c.t_beta, 1e-15);
  EXPECT_GT(couple_supercritical_cov(50.0).theorem_cross, 0.999999);
}

TEST(Quartic, NormalisationMatchesClosedForm) {
  const QuarticLaw f(0.0);
  EXPECT_NEAR(quartic_zf_closed_form(), 3.37401019780002524288, 1e-14);
  EXPECT_NEAR(f.normalisation() / quartic_zf_closed_form(), 1.0, 1e-10);
  EXPECT_NEAR(quartic_normalisation(1e-4) / quartic_zf_closed_form(), 1.0, 1e-4);
  EXPECT_NEAR(quartic_normalisation(-1e-4) / quartic_zf_closed_form(), 1.0, 1e-4);
}

TEST(Quartic, ContinuityAtZero) {
  const double z0 = quartic_zf_closed_form();
  // Z'(0) = -E[x^2]/2 Z, so probes at ±1e-4 differ from Z_F by ~1e-4 at first
  // order; the symmetric mean is within 1e-8.
  const double mid = 0.5 * (quartic_normalisation(1e-4) + quartic_normalisation(-1e-4));
  EXPECT_NEAR(mid / z0, 1.0, 1e-8);
}

TEST(Quartic, DensityIsSymmetricAndNormalised) {
  for (double gamma : {-5.0, -2.0, 0.0, 2.0, 50.0}) {
    const QuarticLaw f(gamma);
    for (double x : {0.3, 1.7, 4.0}) {
      EXPECT_EQ(f.logdensity(x), f.logdensity(-x));
    }
    const double mass = integrate_pieces([&](double x) { return f.density(x); }, -f.window(), f.window(), 32, 1e-12);
    EXPECT_NEAR(mass, 1.0, 1e-9) << gamma;
    EXPECT_NEAR(f.cdf(0.0), 0.5, 1e-12);
  }
}

TEST(Quartic, LargeGammaIsNearlyGaussian) {
  const QuarticLaw f(50.0);
  const double var = integrate_pieces([&](double x) { return x * x * f.density(x); }, -f.window(), f.window(), 32, 1e-12);
  EXPECT_NEAR(var * 50.0, 1.0, 0.05);
}

TEST(Quartic, NegativeGammaModes) {
  const QuarticLaw f(-2.0);
  double best = 0.0;
  double arg = 0.0;
  for (double x = 0.0; x < 5.0; x += 1e-4) {
    if (f.logdensity(x) > best || x == 0.0) {
      best = f.logdensity(x);
      arg = x;
    }
  }
  EXPECT_NEAR(arg, std::sqrt(6.0), 1e-3);
  EXPECT_GT(f.density(std::sqrt(6.0)), f.density(0.0));
}

TEST(Quartic, GammaRepresentationSampler) {
  const QuarticLaw f(0.0);
  auto rng = make_stream(50, Substream::auxiliary, 0);
  const int n = 1'000'000;
  std::vector<double> xs(n);
  for (auto& x : xs) {
    x = f.sample_gamma_representation(rng);
  }
  EXPECT_LE(std::abs(mean(xs)), 3.0 * standard_error(xs));
  EXPECT_LE(ks_distance(EmpiricalSample::from(xs), [&](double x) { return f.cdf(x); }), 0.002);
}

TEST(Quartic, RejectionSamplerAcrossGamma) {
  for (double gamma : {-2.0, 0.0, 2.0}) {
    const QuarticLaw f(gamma);
    EXPECT_GT(f.acceptance_rate(), 0.2) << gamma;
    auto rng = make_stream(51, Substream::auxiliary, static_cast<std::uint64_t>(gamma + 10));
    std::vector<double> xs(200000);
    for (auto& x : xs) {
      x = f.sample_rejection(rng);
    }
    EXPECT_LE(ks_distance(EmpiricalSample::from(xs), [&](double x) { return f.cdf(x); }), 0.005) << gamma;
  }
}

TEST(LimitLaw, Marginals) {
  const auto sub = LimitLaw::gaussian_subcritical(0.5);
  EXPECT_NEAR(sub.cdf(std::sqrt(2.0)), normal_cdf(1.0), 1e-15);
  const auto atom = LimitLaw::bernoulli_atom(2.0);
  EXPECT_EQ(atom.cdf(0.0), 0.5);
  EXPECT_EQ(atom.cdf(1.0), 1.0);
  const auto crit = LimitLaw::couple_critical(0.0);
  EXPECT_NEAR(crit.marginal_cdf(0, 0.0), 0.5, 1e-15);
  EXPECT_NEAR(crit.marginal_cdf(1, 0.0), 0.5, 1e-12);
  const auto sup = LimitLaw::couple_supercritical(2.0);
  EXPECT_NEAR(sup.sigma2(), 1.0 - sup.t_beta() * sup.t_beta(), 1e-15);
}
