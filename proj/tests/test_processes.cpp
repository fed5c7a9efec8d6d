#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "curiefield/processes.hpp"
#include "curiefield/stats.hpp"

using namespace curiefield;

namespace {

std::vector<KernelPoint> line(std::initializer_list<double> xs) {
  std::vector<KernelPoint> g;
  for (double x : xs) {
    g.push_back({x, 0.0});
  }
  return g;
}

std::vector<double> uniforms(int n, std::uint64_t seed, std::uint64_t replica) {
  auto rng = make_stream(seed, Substream::uniforms, replica);
  std::vector<double> u(static_cast<std::size_t>(n));
  for (double& x : u) {
    x = uniform_open(rng);
  }
  return u;
}

}  // namespace

TEST(KernelEval, ClosedFormValues) {
  EXPECT_EQ(kernel_eval(CovarianceKernel::bridge(), {0.5, 0}, {0.5, 0}), 0.25);
  EXPECT_EQ(kernel_eval(CovarianceKernel::iid_field(), {0.0, 0}, {0.0, 0}), 0.0);
  // Frozen 30-digit evaluations of M_Z(s+w) - M_Z(s) M_Z(w) (tools/oracles.py).
  EXPECT_NEAR(kernel_eval(CovarianceKernel::iid_field(), {1.0, 0}, {1.0, 0}), 0.032755957487966, 1e-14);
  EXPECT_NEAR(iid_field_covariance(0.5, 0.8).real(), 0.017910505424981, 1e-14);
  EXPECT_NEAR(kernel_eval(CovarianceKernel::sheet(), {0.3, 0.5}, {0.7, 0.5}), 0.3 * 0.25, 1e-15);
  EXPECT_THROW(kernel_eval(CovarianceKernel::bridge(), {1.5, 0}, {0.5, 0}), std::domain_error);
  EXPECT_THROW(kernel_eval(CovarianceKernel::sheet(), {-1.0, 0.5}, {0.5, 0.5}), std::domain_error);
}

TEST(KernelEval, ComplexExtensionIsConjugateSymmetric) {
  const cplx s{0.3, 2.0};
  const cplx w{1.1, -0.4};
  EXPECT_LT(std::abs(iid_field_covariance(std::conj(s), std::conj(w)) -
                     std::conj(iid_field_covariance(s, w))),
            1e-15);
  EXPECT_LT(std::abs(iid_field_covariance(s, w) - iid_field_covariance(w, s)), 1e-16);
}

TEST(KernelEval, SymmetricAndPsdOnRandomGrids) {
  auto rng = make_stream(40, Substream::auxiliary, 0);
  const auto couple = CovarianceKernel::supercritical_couple(0.9575);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<KernelPoint> field, bridge, sheet, pair;
    for (int i = 0; i < 20; ++i) {
      field.push_back({3.0 * uniform_open(rng), 0.0});
      bridge.push_back({uniform_open(rng), 0.0});
      sheet.push_back({2.0 * uniform_open(rng), uniform_open(rng)});
      pair.push_back({2.0 * uniform_open(rng), uniform_open(rng) < 0.5 ? -1.0 : 1.0});
    }
    for (auto [kernel, grid] : {std::pair{CovarianceKernel::iid_field(), field},
                                std::pair{CovarianceKernel::bridge(), bridge},
                                std::pair{CovarianceKernel::sheet(), sheet},
                                std::pair{couple, pair}}) {
      const auto g = gram_matrix(kernel, grid);
      EXPECT_EQ(g, g.transpose());
      const auto f = factorise(g);
      EXPECT_LE(f.jitter, 1e-10);
      EXPECT_LT((f.root * f.root.transpose() - g).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(SampleField, BridgeEndpointsVanishAndCovarianceMatches) {
  const auto grid = line({0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
  const GaussianFieldSampler sampler(CovarianceKernel::bridge(), grid);
  auto rng = make_stream(41, Substream::gaussian, 0);
  std::vector<std::vector<double>> rows;
  for (int r = 0; r < 100000; ++r) {
    const auto s = sampler.draw(rng);
    ASSERT_EQ(s.values.front(), 0.0);
    ASSERT_EQ(s.values.back(), 0.0);
    rows.emplace_back(s.values.begin() + 1, s.values.end() - 1);
  }
  const auto cov = covariance_matrix(rows);
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = 0; j < 9; ++j) {
      EXPECT_NEAR(cov[i][j], bridge_covariance(grid[i + 1].first, grid[j + 1].first), 0.01);
    }
  }
}

TEST(SampleField, SheetVanishesAtTimeZero) {
  std::vector<KernelPoint> grid;
  for (double t : {0.0, 0.5, 1.0}) {
    for (double p : {0.25, 0.5, 0.75}) {
      grid.push_back({t, p});
    }
  }
  auto rng = make_stream(42, Substream::gaussian, 0);
  const GaussianFieldSampler sampler(CovarianceKernel::sheet(), grid);
  for (int r = 0; r < 100; ++r) {
    const auto s = sampler.draw(rng);
    for (int i = 0; i < 3; ++i) {
      ASSERT_EQ(s.values[static_cast<std::size_t>(i)], 0.0);
    }
  }
}

TEST(Bridge, DirectPathBasics) {
  const auto u = uniforms(1000, 43, 0);
  const std::vector<double> p = {0.0, 0.5, 1.0};
  const auto b = bridge_direct(u, p);
  EXPECT_EQ(b[0], 0.0);
  EXPECT_EQ(b[2], 0.0);
  long below = 0;
  for (double x : u) {
    below += x < 0.5;
  }
  EXPECT_DOUBLE_EQ(b[1], (below - 500.0) / std::sqrt(1000.0));
}

TEST(Bridge, ContourPathMatchesDirectPath) {
  const auto u = uniforms(64, 44, 0);
  std::vector<double> p;
  for (int i = 1; i <= 9; ++i) {
    p.push_back(i / 10.0);
  }
  double gap = 1.0;
  for (double x : u) {
    for (double q : p) {
      gap = std::min(gap, std::abs(q - x));
    }
  }
  const ContourSpec spec{1.0, std::min(1e7, 1e3 / gap), 2.0};
  const auto direct = bridge_direct(u, p);
  const auto contour = bridge_via_contour(u, spec, p);
  for (std::size_t i = 0; i < p.size(); ++i) {
    // Each indicator is off by at most about e^{cx}/(pi |x| T) <= e/(pi 1e3).
    EXPECT_NEAR(contour[i], direct[i], 64 * 1e-3 / std::sqrt(64.0)) << "p=" << p[i];
  }
}

TEST(Bridge, PreLimitCovarianceAndUnitVarianceAtHalf) {
  std::vector<double> p;
  for (int i = 1; i <= 9; ++i) {
    p.push_back(i / 10.0);
  }
  const int replicas = 100000;
  std::vector<std::vector<double>> rows(replicas);
  std::vector<double> twice_half(replicas);
  parallel_for(replicas, 1, [&](std::size_t r) {
    rows[r] = bridge_direct(uniforms(4096, 45, r), p);
    twice_half[r] = 2.0 * rows[r][4];
  });
  const auto cov = covariance_matrix(rows);
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = 0; j < 9; ++j) {
      EXPECT_NEAR(cov[i][j], bridge_covariance(p[i], p[j]), 0.01);
    }
  }
  EXPECT_LE(std::abs(variance(twice_half) - 1.0), 3.0 * variance_standard_error(twice_half));
}

TEST(Sheet, DirectPathCovariance) {
  const std::vector<double> t = {0.2, 0.4, 0.6, 0.8, 1.0};
  const std::vector<double> p = {0.1, 0.3, 0.5, 0.7, 0.9};
  const int replicas = 20000;
  std::vector<std::vector<double>> rows(replicas);
  parallel_for(replicas, 1, [&](std::size_t r) { rows[r] = sheet_direct(uniforms(1024, 46, r), t, p); });
  const auto cov = covariance_matrix(rows);
  for (std::size_t a = 0; a < 25; ++a) {
    for (std::size_t b = 0; b < 25; ++b) {
      const double expect = sheet_covariance(t[a / 5], p[a % 5], t[b / 5], p[b % 5]);
      EXPECT_NEAR(cov[a][b], expect, 0.02);
    }
  }
  // Restriction to p = 1/2: twice the sheet is a Brownian motion.
  for (std::size_t a = 0; a < 5; ++a) {
    for (std::size_t b = 0; b < 5; ++b) {
      EXPECT_NEAR(4.0 * cov[a * 5 + 2][b * 5 + 2], std::min(t[a], t[b]), 0.06);
    }
  }
}

TEST(Series, CovarianceEntries) {
  EXPECT_EQ(series_covariance(0, 0), 0.0);
  EXPECT_EQ(series_covariance(0, 1), 0.0);
  EXPECT_NEAR(series_covariance(1, 1), 1.0 / 3.0 - 0.25, 1e-16);
  EXPECT_THROW(series_covariance(-1, 0), std::domain_error);
}

TEST(Series, TruncatedSeriesReproducesKernel) {
  EXPECT_LE(std::abs(series_iid_covariance(0.5, 0.8, 20) - iid_field_covariance(0.5, 0.8)), 1e-8);
  for (double s = -1.0; s <= 1.0; s += 0.25) {
    for (double w = -1.0; w <= 1.0; w += 0.25) {
      EXPECT_LE(std::abs(series_iid_covariance(s, w, 20) - iid_field_covariance(s, w)), 1e-8);
    }
  }
}
