#ifndef CURIEFIELD_ISING_HPP
#define CURIEFIELD_ISING_HPP

// Ising spins on a finite graph and their Gaussian randomisation field.
//
// With A = C + gamma_d I and C_beta = beta A, the spin law is
//   P(B) ∝ exp(B^T C_beta B / 2)   (B uniform on {-1,+1}^Λ),
// and the field V with density ∝ f_{N(0, C_beta)}(v) Π cosh(v_λ) makes the
// spins conditionally independent: P(B_λ = +1 | V) = ψ(V_λ) with
// ψ(α) = 1 / (1 + e^{-2α}).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "curiefield/numeric.hpp"
#include "curiefield/rng.hpp"
#include "curiefield/stats.hpp"

namespace curiefield {

struct SpinGraph {
  std::string name;
  int size = 0;
  Eigen::MatrixXd adjacency;
  double diagonal_shift = 1.0;

  Eigen::MatrixXd shifted() const {
    return adjacency + diagonal_shift * Eigen::MatrixXd::Identity(size, size);
  }

  // Shift making C + gamma_d I positive definite with smallest eigenvalue 1.
  static double automatic_shift(const Eigen::MatrixXd& adjacency) {
    if (adjacency.rows() == 0) {
      return 1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(adjacency, Eigen::EigenvaluesOnly);
    return std::max(0.0, -eig.eigenvalues().minCoeff()) + 1.0;
  }

  static SpinGraph from_edges(std::string name, int size,
                              const std::vector<std::pair<int, int>>& edges) {
    if (size < 1 || size > 20) {
      throw std::domain_error("SpinGraph: size must lie in [1, 20]");
    }
    SpinGraph g;
    g.name = std::move(name);
    g.size = size;
    g.adjacency = Eigen::MatrixXd::Zero(size, size);
    for (auto [a, b] : edges) {
      if (a == b || a < 0 || b < 0 || a >= size || b >= size) {
        throw std::domain_error("SpinGraph: invalid edge");
      }
      g.adjacency(a, b) = g.adjacency(b, a) = 1.0;
    }
    g.diagonal_shift = automatic_shift(g.adjacency);
    return g;
  }

  SpinGraph with_shift(double shift) const {
    SpinGraph g = *this;
    g.diagonal_shift = shift;
    Eigen::LLT<Eigen::MatrixXd> llt(g.shifted());
    if (shift < 0.0 || llt.info() != Eigen::Success) {
      throw std::domain_error("SpinGraph: C + gamma_d I must be positive definite");
    }
    return g;
  }

  static SpinGraph edgeless(int size) { return from_edges("edgeless" + std::to_string(size), size, {}); }
  static SpinGraph single_vertex() { return from_edges("vertex", 1, {}); }
  static SpinGraph edge() { return from_edges("edge", 2, {{0, 1}}); }
  static SpinGraph path(int k) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < k; ++i) {
      e.emplace_back(i, i + 1);
    }
    return from_edges("path" + std::to_string(k), k, e);
  }
  static SpinGraph cycle(int k) {
    if (k < 3) {
      throw std::domain_error("cycle: need at least 3 vertices");
    }
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < k; ++i) {
      e.emplace_back(i, (i + 1) % k);
    }
    return from_edges("cycle" + std::to_string(k), k, e);
  }
  static SpinGraph torus(int side, int dim) {
    if (dim == 1) {
      auto g = cycle(side);
      g.name = "torus" + std::to_string(side);
      return g;
    }
    if (dim != 2 || side < 3) {
      throw std::domain_error("torus: dimension must be 1 or 2 and side >= 3");
    }
    std::vector<std::pair<int, int>> e;
    for (int r = 0; r < side; ++r) {
      for (int c = 0; c < side; ++c) {
        const int here = r * side + c;
        e.emplace_back(here, r * side + (c + 1) % side);
        e.emplace_back(here, ((r + 1) % side) * side + c);
      }
    }
    return from_edges("torus" + std::to_string(side) + "x" + std::to_string(side), side * side, e);
  }

  // Names accepted on the command line: vertex, edge, pathK, cycleK, torusN, torusNxN.
  static SpinGraph by_name(const std::string& name) {
    auto number = [&](std::size_t from) { return std::stoi(name.substr(from)); };
    if (name == "vertex") {
      return single_vertex();
    }
    if (name == "edge") {
      return edge();
    }
    if (name.rfind("edgeless", 0) == 0) {
      return edgeless(number(8));
    }
    if (name.rfind("path", 0) == 0) {
      return path(number(4));
    }
    if (name.rfind("cycle", 0) == 0) {
      return cycle(number(5));
    }
    if (name.rfind("torus", 0) == 0) {
      const auto x = name.find('x');
      return x == std::string::npos ? torus(number(5), 1) : torus(number(5), 2);
    }
    throw std::invalid_argument("unknown graph '" + name + "'");
  }
};

struct IsingExact {
  SpinGraph graph;
  double beta = 0.0;
  double log_partition = 0.0;  // log E[exp(B^T C_beta B / 2)], B uniform
  double log_sum = 0.0;        // log Σ_B exp(...) = log_partition + |Λ| log 2
  Eigen::VectorXd first;       // E[B_i]
  Eigen::MatrixXd second;      // E[B_i B_j]
  std::vector<double> config_cdf;  // over bitmasks, bit i set <=> B_i = +1

  Eigen::VectorXd spins(std::uint32_t mask) const {
    Eigen::VectorXd b(graph.size);
    for (int i = 0; i < graph.size; ++i) {
      b(i) = (mask >> i) & 1u ? 1.0 : -1.0;
    }
    return b;
  }
};

inline IsingExact exact_enumeration(const SpinGraph& graph, double beta) {
  if (graph.size > 20) {
    throw std::domain_error("exact_enumeration: at most 20 vertices");
  }
  if (!(beta >= 0.0)) {
    throw std::domain_error("exact_enumeration: beta must be >= 0");
  }
  const int n = graph.size;
  const std::uint32_t configs = 1u << n;
  const Eigen::MatrixXd cb = beta * graph.shifted();
  std::vector<double> logw(configs);
  for (std::uint32_t mask = 0; mask < configs; ++mask) {
    double q = 0.0;
    for (int i = 0; i < n; ++i) {
      const double bi = (mask >> i) & 1u ? 1.0 : -1.0;
      for (int j = 0; j < n; ++j) {
        const double bj = (mask >> j) & 1u ? 1.0 : -1.0;
        q += cb(i, j) * bi * bj;
      }
    }
    logw[mask] = 0.5 * q;
  }
  IsingExact out;
  out.graph = graph;
  out.beta = beta;
  out.log_sum = log_sum_exp(logw);
  out.log_partition = out.log_sum - n * std::log(2.0);
  out.first = Eigen::VectorXd::Zero(n);
  out.second = Eigen::MatrixXd::Zero(n, n);
  out.config_cdf.resize(configs);
  CompensatedSum acc;
  for (std::uint32_t mask = 0; mask < configs; ++mask) {
    const double p = std::exp(logw[mask] - out.log_sum);
    acc += p;
    out.config_cdf[mask] = acc.value();
    const Eigen::VectorXd b = out.spins(mask);
    out.first += p * b;
    out.second += p * (b * b.transpose());
  }
  for (double& c : out.config_cdf) {
    c /= acc.value();
  }
  out.config_cdf.back() = 1.0;
  return out;
}

// log cosh without overflow.
inline double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

// Log density of the randomisation field, without the -log 𝔷 constant:
// -v^T (beta A)^{-1} v / 2 - log det(2 pi beta A) / 2 + Σ log cosh(v).
class MuDensity {
 public:
  MuDensity(const SpinGraph& graph, double beta) : graph_(graph), beta_(beta) {
    if (!(beta > 0.0)) {
      throw std::domain_error("MuDensity: beta must be > 0");
    }
    const Eigen::MatrixXd cb = beta * graph.shifted();
    llt_.compute(cb);
    if (llt_.info() != Eigen::Success) {
      throw std::domain_error("MuDensity: C_beta is singular or indefinite");
    }
    const Eigen::MatrixXd l = llt_.matrixL();
    log_det_ = 2.0 * l.diagonal().array().log().sum();
    precision_ = llt_.solve(Eigen::MatrixXd::Identity(graph.size, graph.size));
    factor_ = l;
  }

  double quadratic_form(const Eigen::VectorXd& v) const { return v.dot(llt_.solve(v)); }

  double logdensity(const Eigen::VectorXd& v) const {
    double s = -0.5 * quadratic_form(v) -
               0.5 * (graph_.size * std::log(2.0 * std::numbers::pi) + log_det_);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      s += log_cosh(v(i));
    }
    return s;
  }

  const SpinGraph& graph() const { return graph_; }
  double beta() const { return beta_; }
  const Eigen::MatrixXd& precision() const { return precision_; }
  const Eigen::MatrixXd& covariance_root() const { return factor_; }

 private:
  SpinGraph graph_;
  double beta_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_det_ = 0.0;
  Eigen::MatrixXd precision_;
  Eigen::MatrixXd factor_;
};

inline double mu_logdensity(const Eigen::VectorXd& v, const SpinGraph& graph, double beta) {
  return MuDensity(graph, beta).logdensity(v);
}

enum class VSource { mcmc, identity };

struct VFieldSample {
  Eigen::VectorXd v;
  VSource source = VSource::identity;
};

// V = Z + C_beta B with Z ~ N(0, C_beta) and B drawn from the exact spin law.
template <class Rng>
VFieldSample sample_v_identity(const MuDensity& mu, const IsingExact& exact, Rng& rng) {
  const double u = uniform_open(rng);
  const auto mask = static_cast<std::uint32_t>(
      std::lower_bound(exact.config_cdf.begin(), exact.config_cdf.end(), u) -
      exact.config_cdf.begin());
  std::normal_distribution<double> normal;
  Eigen::VectorXd g(mu.graph().size);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    g(i) = normal(rng);
  }
  const Eigen::MatrixXd cb = mu.beta() * mu.graph().shifted();
  return {mu.covariance_root() * g + cb * exact.spins(mask), VSource::identity};
}

class McmcTuningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct McmcConfig {
  int burn_in = 2000;  // sweeps, with scale adaptation
  int thin = 5;        // sweeps between kept draws
  int draws = 10000;   // kept draws
};

struct McmcRun {
  std::vector<VFieldSample> draws;
  std::vector<double> scales;
  double acceptance = 0.0;  // after adaptation
};

// Random-walk Metropolis, one Gaussian proposal per coordinate per sweep,
// followed by the exact symmetry move v -> -v (always accepted, since the
// target is even). Proposal scales adapt towards 40% acceptance during
// burn-in and are frozen afterwards.
template <class Rng>
McmcRun sample_v_mcmc(const MuDensity& mu, const McmcConfig& config, Rng& rng,
                      const Eigen::VectorXd* start = nullptr) {
  const int n = mu.graph().size;
  const Eigen::MatrixXd& prec = mu.precision();
  Eigen::VectorXd v = start ? *start : Eigen::VectorXd::Zero(n);
  Eigen::VectorXd pv = prec * v;
  std::vector<double> scales(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    scales[static_cast<std::size_t>(i)] = 2.4 / std::sqrt(prec(i, i));
  }
  std::normal_distribution<double> normal;
  std::vector<long> accepted(static_cast<std::size_t>(n), 0);
  std::vector<long> proposed(static_cast<std::size_t>(n), 0);

  auto sweep = [&] {
    for (int i = 0; i < n; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      const double delta = scales[iu] * normal(rng);
      const double vi = v(i) + delta;
      // Change of -v^T P v / 2 + log cosh(v_i).
      const double log_ratio = -(delta * pv(i) + 0.5 * delta * delta * prec(i, i)) +
                               log_cosh(vi) - log_cosh(v(i));
      ++proposed[iu];
      if (std::log(uniform_open(rng)) < log_ratio) {
        v(i) = vi;
        pv += delta * prec.col(i);
        ++accepted[iu];
      }
    }
    if ((rng() >> 63) != 0) {
      v = -v;
      pv = -pv;
    }
  };

  for (int s = 1; s <= config.burn_in; ++s) {
    sweep();
    if (s % 50 == 0) {
      for (std::size_t i = 0; i < scales.size(); ++i) {
        const double rate = static_cast<double>(accepted[i]) / static_cast<double>(proposed[i]);
        scales[i] *= std::exp(rate - 0.4);
        accepted[i] = proposed[i] = 0;
      }
      pv = prec * v;  // shed drift from the incremental updates
    }
  }
  std::fill(accepted.begin(), accepted.end(), 0);
  std::fill(proposed.begin(), proposed.end(), 0);

  McmcRun run;
  run.draws.reserve(static_cast<std::size_t>(config.draws));
  for (int d = 0; d < config.draws; ++d) {
    for (int s = 0; s < config.thin; ++s) {
      sweep();
    }
    run.draws.push_back({v, VSource::mcmc});
  }
  long acc = 0;
  long prop = 0;
  for (std::size_t i = 0; i < accepted.size(); ++i) {
    acc += accepted[i];
    prop += proposed[i];
  }
  run.acceptance = prop > 0 ? static_cast<double>(acc) / static_cast<double>(prop) : 0.0;
  run.scales = scales;
  if (run.acceptance < 0.05 || run.acceptance > 0.95) {
    throw McmcTuningError("sample_v_mcmc: acceptance rate " + std::to_string(run.acceptance) +
                          " outside [0.05, 0.95]");
  }
  return run;
}

// spin = +1 iff Argtanh(2U - 1) <= v.
inline std::vector<int> spins_from_v_artanh(const Eigen::VectorXd& v, std::span<const double> u) {
  std::vector<int> s(static_cast<std::size_t>(v.size()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = std::atanh(2.0 * u[i] - 1.0) <= v(static_cast<Eigen::Index>(i)) ? 1 : -1;
  }
  return s;
}

// spin = +1 iff U <= ψ(v).
inline std::vector<int> spins_from_v_logistic(const Eigen::VectorXd& v, std::span<const double> u) {
  std::vector<int> s(static_cast<std::size_t>(v.size()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = u[i] <= logistic(v(static_cast<Eigen::Index>(i))) ? 1 : -1;
  }
  return s;
}

template <class Rng>
std::vector<int> spins_from_v(const VFieldSample& sample, Rng& rng) {
  std::vector<double> u(static_cast<std::size_t>(sample.v.size()));
  for (double& x : u) {
    x = uniform_open(rng);
  }
  return spins_from_v_artanh(sample.v, u);
}

// Draws of W = Argtanh(2U - 1) and of (Gb - Gb')/2 with Gb = -log(E),
// E ~ Exp(1).
template <class Rng>
std::pair<std::vector<double>, std::vector<double>> gumbel_w_samples(std::size_t replicas,
                                                                     Rng& rng) {
  std::vector<double> w(replicas);
  std::vector<double> g(replicas);
  for (std::size_t i = 0; i < replicas; ++i) {
    w[i] = std::atanh(2.0 * uniform_open(rng) - 1.0);
    const double gb = -std::log(-std::log(uniform_open(rng)));
    const double gb2 = -std::log(-std::log(uniform_open(rng)));
    g[i] = 0.5 * (gb - gb2);
  }
  return {std::move(w), std::move(g)};
}

struct GumbelCheck {
  double ks = 0.0;               // two-sample, W against (Gb - Gb')/2
  double ks_w_logistic = 0.0;    // W against ψ(x) = 1 / (1 + e^{-2x})
  double ks_gumbel_logistic = 0.0;
  double cdf_at_minus_one = 0.0;  // empirical P(W <= -1)
  double cdf_at_one = 0.0;
};

template <class Rng>
GumbelCheck gumbel_w_check(std::size_t replicas, Rng& rng) {
  auto [w, g] = gumbel_w_samples(replicas, rng);
  const auto ws = EmpiricalSample::from(std::move(w));
  const auto gs = EmpiricalSample::from(std::move(g));
  GumbelCheck out;
  out.ks = ks_two_sample(ws, gs);
  out.ks_w_logistic = ks_distance(ws, logistic);
  out.ks_gumbel_logistic = ks_distance(gs, logistic);
  const double n = static_cast<double>(replicas);
  out.cdf_at_minus_one =
      static_cast<double>(std::upper_bound(ws.values.begin(), ws.values.end(), -1.0) - ws.values.begin()) / n;
  out.cdf_at_one =
      static_cast<double>(std::upper_bound(ws.values.begin(), ws.values.end(), 1.0) - ws.values.begin()) / n;
  return out;
}

// Density of G + B with G ~ N(0,1), B = ±1 fair: cosh(x) e^{-x^2/2} / sqrt(2 pi e).
inline double g_plus_b_density(double x) {
  return std::cosh(x) * std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi * std::numbers::e);
}

inline double g_plus_b_cdf(double x) { return 0.5 * (normal_cdf(x - 1.0) + normal_cdf(x + 1.0)); }

}  // namespace curiefield

#endif  // CURIEFIELD_ISING_HPP
