#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "curiefield/numeric.hpp"

using namespace curiefield;

TEST(CompensatedSum, RecoversCancelledTerms) {
  CompensatedSum s;
  s += 1.0;
  s += 1e100;
  s += 1.0;
  s += -1e100;
  EXPECT_EQ(s.value(), 2.0);
}

TEST(LogSumExp, StableForLargeArguments) {
  const std::vector<double> a = {1000.0, 1000.0};
  EXPECT_NEAR(log_sum_exp(a), 1000.0 + std::log(2.0), 1e-12);
  const std::vector<double> b = {-1e4, 0.0};
  EXPECT_NEAR(log_sum_exp(b), 0.0, 1e-15);
}

TEST(Logistic, InvertsLogitHalf) {
  for (double p : {0.01, 0.2, 0.5, 0.77, 0.999}) {
    EXPECT_NEAR(logistic(logit_half(p)), p, 1e-15);
  }
  EXPECT_EQ(logistic(0.0), 0.5);
}

TEST(Quadrature, SmoothIntegrands) {
  auto r = integrate_adaptive([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-13);
  EXPECT_NEAR(r.value, std::numbers::e - 1.0, 1e-14);
  auto g = integrate_adaptive([](double x) { return normal_pdf(x); }, -12.0, 12.0, 1e-13);
  EXPECT_NEAR(g.value, 1.0, 1e-13);
  auto s = integrate_adaptive([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-10);
  EXPECT_NEAR(s.value, 2.0 / 3.0, 1e-10);
}

TEST(Quadrature, BudgetExhaustionCarriesEstimates) {
  auto wild = [](double x) { return std::sin(1e6 * x) / (x + 1e-9); };
  try {
    integrate_adaptive(wild, 0.0, 1.0, 1e-14, 0.0, 200);
    FAIL() << "expected QuadratureError";
  } catch (const QuadratureError& e) {
    EXPECT_TRUE(std::isfinite(e.last_estimate));
    EXPECT_TRUE(std::isfinite(e.previous_estimate));
  }
}

TEST(TabulatedCdf, LinearQuantileInvertsCdf) {
  auto table = tabulate_cdf([](double x) { return normal_pdf(x); }, -9.0, 9.0, 2000);
  EXPECT_NEAR(table.cdf(0.0), 0.5, 1e-12);
  EXPECT_NEAR(table.cdf(1.0), normal_cdf(1.0), 1e-10);
  TabulatedCdf linear(std::vector<double>(table.nodes().begin(), table.nodes().end()),
                      std::vector<double>(table.values().begin(), table.values().end()));
  for (double u : {0.01, 0.3, 0.5, 0.9}) {
    EXPECT_NEAR(linear.cdf(linear.quantile(u)), u, 1e-14);
  }
  const auto v = table.values();
  for (std::size_t i = 1; i < v.size(); ++i) {
    ASSERT_GE(v[i], v[i - 1]);
  }
  EXPECT_EQ(v.back(), 1.0);
}
