#ifndef CURIEFIELD_COUPLING_HPP
#define CURIEFIELD_COUPLING_HPP

// Curie-Weiss spins through the uniform coupling X_k = 2 1{U_k < V} - 1,
// and exact magnetisation laws used as oracles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "curiefield/definetti.hpp"
#include "curiefield/numeric.hpp"
#include "curiefield/rng.hpp"

namespace curiefield {

// Law of the randomisation V. At beta = 0 the spins are fair coins and V is
// the point mass at 1/2; otherwise V follows the de Finetti density.
class RandomisationLaw {
 public:
  RandomisationLaw() = default;
  explicit RandomisationLaw(std::shared_ptr<const DeFinettiDensity> density)
      : density_(std::move(density)) {}

  static RandomisationLaw for_params(const ModelParams& params, double rel_tol = 1e-12) {
    params.validate();
    if (params.beta == 0.0) {
      return RandomisationLaw();
    }
    return RandomisationLaw(std::make_shared<const DeFinettiDensity>(normalise(params, rel_tol)));
  }

  bool degenerate() const { return density_ == nullptr; }
  const DeFinettiDensity* density() const { return density_.get(); }

  template <class Rng>
  RandomisationSample sample(Rng& rng) const {
    if (!density_) {
      rng();  // keep stream positions aligned with the beta > 0 case
      return RandomisationSample::from_v(0.5);
    }
    return sample_v(*density_, rng);
  }

 private:
  std::shared_ptr<const DeFinettiDensity> density_;
};

// The two independent streams a replica draws from.
struct ReplicaRng {
  Philox4x32 randomisation;
  Philox4x32 uniforms;

  static ReplicaRng make(std::uint64_t seed, std::uint64_t replica) {
    return {make_stream(seed, Substream::randomisation, replica),
            make_stream(seed, Substream::uniforms, replica)};
  }
};

struct SpinSample {
  std::vector<int> spins;
  std::vector<double> uniforms;
  RandomisationSample v;

  int n() const { return static_cast<int>(spins.size()); }
};

struct MagnetisationPath {
  std::vector<double> times;
  std::vector<int> values;
  std::vector<int> lengths;  // prefix lengths floor(n t)
};

// Spins for a given V; the debug entry point behind sample_spins.
template <class Rng>
SpinSample sample_spins_given_v(int n, RandomisationSample v, Rng& uniforms) {
  if (n < 1) {
    throw std::domain_error("sample_spins: n must be >= 1");
  }
  SpinSample s;
  s.v = v;
  s.spins.resize(static_cast<std::size_t>(n));
  s.uniforms.resize(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < s.spins.size(); ++k) {
    s.uniforms[k] = uniform_open(uniforms);
    s.spins[k] = s.uniforms[k] < v.v ? 1 : -1;
  }
  return s;
}

inline SpinSample sample_spins(const ModelParams& params, const RandomisationLaw& law,
                               ReplicaRng& rng) {
  const auto v = law.sample(rng.randomisation);
  return sample_spins_given_v(params.n, v, rng.uniforms);
}

struct MagnetisationDraw {
  int m = 0;
  RandomisationSample v;
};

// Same draws as sample_spins followed by magnetisation, without storing spins.
inline MagnetisationDraw sample_magnetisation(int n, const RandomisationLaw& law,
                                              ReplicaRng& rng) {
  MagnetisationDraw d;
  d.v = law.sample(rng.randomisation);
  int below = 0;
  for (int k = 0; k < n; ++k) {
    below += uniform_open(rng.uniforms) < d.v.v;
  }
  d.m = 2 * below - n;
  return d;
}

inline int magnetisation(const SpinSample& s) {
  int m = 0;
  for (int x : s.spins) {
    m += x;
  }
  return m;
}

// 2 #{k : U_k < V} - n, computed from the uniforms rather than the spins.
inline int magnetisation_from_uniforms(const SpinSample& s) {
  int below = 0;
  for (double u : s.uniforms) {
    below += u < s.v.v;
  }
  return 2 * below - s.n();
}

inline int prefix_length(int n, double t) {
  return static_cast<int>(std::floor(static_cast<double>(n) * t + 1e-9));
}

inline MagnetisationPath magnetisation_path(const SpinSample& s, const std::vector<double>& times) {
  MagnetisationPath path;
  path.times = times;
  int k = 0;
  int partial = 0;
  double last = 0.0;
  for (double t : times) {
    if (!(t >= 0.0) || t < last) {
      throw std::domain_error("magnetisation_path: times must be nonnegative and nondecreasing");
    }
    last = t;
    const int len = prefix_length(s.n(), t);
    if (len > s.n()) {
      throw std::domain_error("magnetisation_path: floor(n t) exceeds n");
    }
    for (; k < len; ++k) {
      partial += s.spins[static_cast<std::size_t>(k)];
    }
    path.values.push_back(partial);
    path.lengths.push_back(len);
  }
  return path;
}

struct ExactPmf {
  int n = 0;
  std::vector<int> support;
  std::vector<double> probs;

  double prob(int m) const {
    if (m < -n || m > n || (m + n) % 2 != 0) {
      return 0.0;
    }
    return probs[static_cast<std::size_t>((m + n) / 2)];
  }
};

namespace detail {

inline double log_binomial(int n, int k) {
  k = std::min(k, n - k);  // exact symmetry in k <-> n - k
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline ExactPmf pmf_from_logweights(int n, const std::vector<double>& logw) {
  ExactPmf pmf;
  pmf.n = n;
  const double log_total = log_sum_exp(logw);
  for (int k = 0; k <= n; ++k) {
    pmf.support.push_back(2 * k - n);
    pmf.probs.push_back(std::exp(logw[static_cast<std::size_t>(k)] - log_total));
  }
  return pmf;
}

}  // namespace detail

// P(M = 2k - n) ∝ C(n,k) exp(beta (2k-n)^2 / (2n)).
inline ExactPmf exact_pmf_tilted(const ModelParams& params) {
  params.validate();
  if (params.n > 1'000'000) {
    throw std::domain_error("exact_pmf_tilted: n must be <= 1e6");
  }
  const int n = params.n;
  std::vector<double> logw(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    const double m = 2.0 * k - n;
    logw[static_cast<std::size_t>(k)] =
        detail::log_binomial(n, k) + params.beta * m * m / (2.0 * n);
  }
  return detail::pmf_from_logweights(n, logw);
}

// P(M = 2k - n) = ∫ C(n,k) p^k (1-p)^(n-k) density(p) dp.
inline ExactPmf exact_pmf_definetti(const ModelParams& params, const DeFinettiDensity& density,
                                    double rel_tol = 1e-12) {
  params.validate();
  if (params.n > 2000) {
    throw std::domain_error("exact_pmf_definetti: n must be <= 2000");
  }
  const int n = params.n;
  ExactPmf pmf;
  pmf.n = n;
  for (int k = 0; k <= n; ++k) {
    const double logc = detail::log_binomial(n, k);
    auto integrand = [&](double p) {
      return std::exp(logc + k * std::log(p) + (n - k) * std::log1p(-p) + density.log_density(p));
    };
    CompensatedSum mass;
    for (const auto& [a, b] : density.support()) {
      mass += integrate_pieces(integrand, a, b, 16, rel_tol, 1e-17);
    }
    pmf.support.push_back(2 * k - n);
    pmf.probs.push_back(mass.value());
  }
  return pmf;
}

}  // namespace curiefield

#endif  // CURIEFIELD_COUPLING_HPP
