#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "curiefield/ising.hpp"

using namespace curiefield;

TEST(Graphs, ShiftMakesShiftedMatrixDefinite) {
  for (const auto& g : {SpinGraph::single_vertex(), SpinGraph::edge(), SpinGraph::path(4),
                        SpinGraph::cycle(4), SpinGraph::torus(3, 2), SpinGraph::torus(5, 1)}) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.shifted());
    EXPECT_NEAR(eig.eigenvalues().minCoeff(), 1.0, 1e-12) << g.name;
    EXPECT_EQ(g.adjacency, g.adjacency.transpose());
    EXPECT_EQ(g.adjacency.diagonal().sum(), 0.0);
  }
  EXPECT_EQ(SpinGraph::torus(3, 2).adjacency.sum(), 9 * 4);
  EXPECT_EQ(SpinGraph::by_name("torus3x3").size, 9);
  EXPECT_EQ(SpinGraph::by_name("cycle4").adjacency.sum(), 8);
  EXPECT_THROW(SpinGraph::by_name("blob"), std::invalid_argument);
  EXPECT_THROW(SpinGraph::edge().with_shift(0.5), std::domain_error);
}

TEST(Enumeration, EdgelessIsIndependentFair) {
  const auto e = exact_enumeration(SpinGraph::edgeless(4), 0.7);
  EXPECT_LT((e.second - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(e.first.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Enumeration, EdgeCorrelationIsTanhBeta) {
  for (double beta : {0.3, 1.0}) {
    const auto e = exact_enumeration(SpinGraph::edge(), beta);
    EXPECT_NEAR(e.second(0, 1), std::tanh(beta), 1e-14);
    EXPECT_NEAR(e.second(0, 0), 1.0, 1e-15);
  }
}

TEST(Enumeration, ZeroBetaIsUniform) {
  const auto e = exact_enumeration(SpinGraph::cycle(4), 0.0);
  EXPECT_NEAR(e.log_partition, 0.0, 1e-15);
  EXPECT_NEAR(e.log_sum, 4.0 * std::log(2.0), 1e-14);
}

TEST(Mu, SingleVertexMatchesGPlusBDensity) {
  const auto g = SpinGraph::single_vertex();
  const auto exact = exact_enumeration(g, 1.0);
  for (double x : {-2.0, 0.0, 0.7, 3.0}) {
    Eigen::VectorXd v(1);
    v << x;
    EXPECT_NEAR(std::exp(mu_logdensity(v, g, 1.0) - exact.log_partition), g_plus_b_density(x), 1e-14);
  }
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  EXPECT_NEAR(mu_logdensity(zero, g, 1.0), -0.5 * std::log(2.0 * std::numbers::pi), 1e-15);
}

TEST(Mu, QuadraticFormMatchesExplicitInverse) {
  const auto g = SpinGraph::torus(3, 2);
  const MuDensity mu(g, 0.6);
  Eigen::VectorXd v(9);
  v << 0.3, -1.2, 0.5, 2.0, 0.0, -0.7, 1.1, 0.4, -0.2;
  const Eigen::MatrixXd inv = (0.6 * g.shifted()).inverse();
  EXPECT_NEAR(mu.quadratic_form(v), v.dot(inv * v), 1e-12);
}

TEST(Mu, NormalisationIsSpinPartitionFunction) {
  const auto g = SpinGraph::edge();
  const double beta = 0.6;
  const MuDensity mu(g, beta);
  const auto exact = exact_enumeration(g, beta);
  const double mass = integrate_pieces(
      [&](double x) {
        return integrate_pieces(
            [&](double y) {
              Eigen::VectorXd v(2);
              v << x, y;
              return std::exp(mu.logdensity(v));
            },
            -15.0, 15.0, 8, 1e-11);
      },
      -15.0, 15.0, 8, 1e-10);
  EXPECT_NEAR(std::log(mass), exact.log_partition, 1e-8);
}

TEST(SpinsFromV, PathsAgreeAndLimits) {
  auto rng = make_stream(70, Substream::auxiliary, 0);
  Eigen::VectorXd v(3);
  v << 0.0, 1e3, -0.4;
  long plus_big = 0;
  long plus_zero = 0;
  const int draws = 1'000'000;
  for (int i = 0; i < draws; ++i) {
    std::vector<double> u = {uniform_open(rng), uniform_open(rng), uniform_open(rng)};
    const auto a = spins_from_v_artanh(v, u);
    ASSERT_EQ(a, spins_from_v_logistic(v, u));
    plus_zero += a[0] > 0;
    plus_big += a[1] > 0;
  }
  EXPECT_GE(plus_big, draws * (1.0 - 1e-6));
  EXPECT_NEAR(static_cast<double>(plus_zero) / draws, 0.5, 3.0 * std::sqrt(0.25 / draws));
}

TEST(IdentitySampler, SingleVertexIsGPlusB) {
  const auto g = SpinGraph::single_vertex();
  const MuDensity mu(g, 1.0);
  const auto exact = exact_enumeration(g, 1.0);
  auto rng = make_stream(71, Substream::auxiliary, 0);
  std::vector<double> xs(1'000'000);
  for (auto& x : xs) {
    x = sample_v_identity(mu, exact, rng).v(0);
  }
  EXPECT_LE(std::abs(mean(xs)), 3.0 * standard_error(xs));
  EXPECT_LE(ks_distance(EmpiricalSample::from(xs), g_plus_b_cdf), 0.002);
}

TEST(IdentitySampler, CovarianceFromExactMoments) {
  const auto g = SpinGraph::cycle(4);
  const double beta = 0.6;
  const MuDensity mu(g, beta);
  const auto exact = exact_enumeration(g, beta);
  const Eigen::MatrixXd cb = beta * g.shifted();
  const Eigen::MatrixXd expected = cb + cb * exact.second * cb;
  auto rng = make_stream(72, Substream::auxiliary, 0);
  const int draws = 200000;
  std::vector<std::vector<double>> rows(draws);
  for (auto& r : rows) {
    const auto v = sample_v_identity(mu, exact, rng).v;
    r.assign(v.data(), v.data() + v.size());
  }
  const auto cov = covariance_matrix(rows);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      // Relative sampling error of a covariance is about sqrt(2 / N).
      EXPECT_NEAR(cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], expected(i, j),
                  4.0 * std::sqrt(2.0 / draws) * expected(i, i));
    }
  }
}

TEST(Mcmc, SingleVertexAgreesWithIdentitySampler) {
  const auto g = SpinGraph::single_vertex();
  const MuDensity mu(g, 1.0);
  auto rng = make_stream(73, Substream::mcmc, 0);
  const auto run = sample_v_mcmc(mu, {2000, 5, 100000}, rng);
  EXPECT_GT(run.acceptance, 0.05);
  EXPECT_LT(run.acceptance, 0.95);
  std::vector<double> xs;
  for (const auto& d : run.draws) {
    xs.push_back(d.v(0));
  }
  EXPECT_LE(ks_distance(EmpiricalSample::from(xs), g_plus_b_cdf), 0.01);
}

TEST(Mcmc, TwoDispersedChainsAgree) {
  const auto g = SpinGraph::cycle(4);
  const MuDensity mu(g, 0.6);
  std::vector<std::vector<double>> second(2);
  for (int chain = 0; chain < 2; ++chain) {
    auto rng = make_stream(74, Substream::mcmc, static_cast<std::uint64_t>(chain));
    const Eigen::VectorXd start = Eigen::VectorXd::Constant(4, chain == 0 ? 8.0 : -8.0);
    const auto run = sample_v_mcmc(mu, {2000, 5, 40000}, rng, &start);
    for (const auto& d : run.draws) {
      second[static_cast<std::size_t>(chain)].push_back(d.v(0) * d.v(1));
    }
  }
  const double diff = mean(second[0]) - mean(second[1]);
  // Batch-free bound inflated for autocorrelation.
  const double se = std::sqrt(std::pow(standard_error(second[0]), 2) + std::pow(standard_error(second[1]), 2));
  EXPECT_LE(std::abs(diff), 3.0 * 3.0 * se);
}

TEST(Gumbel, IdentityHolds) {
  auto rng = make_stream(75, Substream::auxiliary, 0);
  const auto check = gumbel_w_check(1'000'000, rng);
  EXPECT_LE(check.ks, 0.002);
  EXPECT_LE(check.ks_w_logistic, 0.002);
  EXPECT_LE(check.ks_gumbel_logistic, 0.002);
  EXPECT_NEAR(check.cdf_at_minus_one, logistic(-1.0), 0.002);
  EXPECT_NEAR(check.cdf_at_one, logistic(1.0), 0.002);
  EXPECT_EQ(logistic(0.0), 0.5);
}
