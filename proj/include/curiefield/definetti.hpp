#ifndef CURIEFIELD_DEFINETTI_HPP
#define CURIEFIELD_DEFINETTI_HPP

// De Finetti mixing measure of the Curie-Weiss spins.
//
// Conditionally on V ~ nu_{n,beta}, the n spins are i.i.d. +-1 with
// P(+1) = V. The mixing density on (0,1) is
//
//   f(p) ∝ exp(-n/(2 beta) Argtanh(2p-1)^2 - (n/2 + 1) ln(1 - (2p-1)^2)),
//
// symmetric about 1/2, unimodal for beta <= 1 and bimodal for beta > 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "curiefield/numeric.hpp"
#include "curiefield/rng.hpp"

namespace curiefield {

struct ModelParams {
  int n = 1;
  double beta = 0.0;
  std::optional<double> gamma_window;  // beta = 1 - gamma / sqrt(n) when set

  static ModelParams fixed(int n, double beta) {
    ModelParams p{n, beta, std::nullopt};
    p.validate();
    return p;
  }

  static ModelParams window(int n, double gamma) {
    if (n < 1) {
      throw std::domain_error("ModelParams: n must be >= 1");
    }
    ModelParams p{n, 1.0 - gamma / std::sqrt(static_cast<double>(n)), gamma};
    p.validate();
    return p;
  }

  void validate() const {
    if (n < 1) {
      throw std::domain_error("ModelParams: n must be >= 1");
    }
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
      throw std::domain_error("ModelParams: beta must be finite and >= 0");
    }
    if (gamma_window &&
        std::abs(beta - (1.0 - *gamma_window / std::sqrt(static_cast<double>(n)))) > 1e-15) {
      throw std::domain_error("ModelParams: beta inconsistent with gamma window");
    }
  }
};

struct RandomisationSample {
  double v = 0.5;
  double t = 0.0;

  static RandomisationSample from_v(double v) { return {v, 2.0 * v - 1.0}; }
};

// -(n/(2 beta)) Argtanh(2p-1)^2 - (n/2 + 1) ln(1 - (2p-1)^2), using
// Argtanh(2p-1) = ln(p/(1-p))/2 and 1-(2p-1)^2 = 4p(1-p).
inline double unnorm_logdensity(double p, const ModelParams& params) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("unnorm_logdensity: p must lie in (0,1)");
  }
  if (!(params.beta > 0.0)) {
    throw std::domain_error("unnorm_logdensity: beta must be > 0 (beta = 0 spins are i.i.d.)");
  }
  const double n = params.n;
  const double h = logit_half(p);
  return -(n / (2.0 * params.beta)) * h * h - (0.5 * n + 1.0) * std::log(4.0 * p * (1.0 - p));
}

namespace detail {

struct Support {
  std::vector<std::pair<double, double>> segments;  // disjoint, increasing
  double log_peak = 0.0;
};

// Locate where a symmetric log-density on (0,1) exceeds its maximum minus
// `depth`. Only the half [0, 1/2] is scanned; segments are mirrored.
template <class LogDensity>
Support symmetric_support(LogDensity&& logf, double depth, std::size_t coarse = 8192) {
  // Uniform grid on the half, preceded by halvings of its first point so
  // that mass piled up near 0 on a logarithmic scale is not cut off.
  const double first = 1.0 / static_cast<double>(coarse + 2);
  std::vector<double> p;
  for (int k = 1000; k >= 1; --k) {
    p.push_back(std::ldexp(first, -k));
  }
  for (std::size_t i = 0; i <= coarse / 2; ++i) {
    p.push_back((static_cast<double>(i) + 1.0) * first);
  }
  p.back() = 0.5;
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    g[i] = logf(p[i]);
  }
  std::size_t arg = static_cast<std::size_t>(std::max_element(g.begin(), g.end()) - g.begin());
  // Golden-section polish of the peak inside the neighbouring cells.
  double a = p[arg > 0 ? arg - 1 : 0];
  double b = p[std::min(arg + 1, p.size() - 1)];
  double peak = g[arg];
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = logf(x1);
  double f2 = logf(x2);
  for (int it = 0; it < 80 && b - a > 1e-15; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = logf(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = logf(x1);
    }
  }
  peak = std::max({peak, f1, f2});

  const double level = peak - depth;
  auto crossing = [&](double lo, double hi) {
    // logf(lo) and logf(hi) straddle `level`.
    const bool rising = logf(lo) < logf(hi);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((logf(mid) < level) == rising) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  Support out;
  out.log_peak = peak;
  std::vector<std::pair<double, double>> left;
  std::size_t i = 0;
  while (i < p.size()) {
    if (g[i] < level) {
      ++i;
      continue;
    }
    const double start = i == 0 ? p[0] * 0.5 : crossing(p[i - 1], p[i]);
    std::size_t j = i;
    while (j + 1 < p.size() && g[j + 1] >= level) {
      ++j;
    }
    const double end = j + 1 == p.size() ? 0.5 : crossing(p[j], p[j + 1]);
    left.emplace_back(start, end);
    i = j + 1;
  }
  if (left.empty()) {
    throw std::runtime_error("symmetric_support: no mass found");
  }
  for (const auto& seg : left) {
    out.segments.push_back(seg);
  }
  for (auto it = left.rbegin(); it != left.rend(); ++it) {
    const std::pair<double, double> mirrored{1.0 - it->second, 1.0 - it->first};
    if (out.segments.back().second >= 0.5 && mirrored.first <= 0.5) {
      out.segments.back().second = mirrored.second;
    } else {
      out.segments.push_back(mirrored);
    }
  }
  return out;
}

}  // namespace detail

// Normalised mixing density with an inverse-cdf table. Immutable once built.
class DeFinettiDensity {
 public:
  const ModelParams& params() const { return params_; }
  double log_norm() const { return log_norm_; }
  const TabulatedCdf& grid() const { return grid_; }
  const std::vector<std::pair<double, double>>& support() const { return support_; }

  double log_density(double p) const { return unnorm_logdensity(p, params_) - log_norm_; }
  double density(double p) const {
    if (p <= 0.0 || p >= 1.0) {
      return 0.0;
    }
    return std::exp(log_density(p));
  }
  double cdf(double p) const { return grid_.cdf(p); }
  double quantile(double u) const { return grid_.quantile(u); }

 private:
  friend DeFinettiDensity normalise(const ModelParams&, double, std::size_t);
  ModelParams params_;
  double log_norm_ = 0.0;
  TabulatedCdf grid_;
  std::vector<std::pair<double, double>> support_;
};

// Depth (in log units below the peak) of the quadrature window. The tails
// beyond it are monotone, so the clipped mass is at most e^-depth relative.
inline constexpr double kSupportDepth = 60.0;

inline DeFinettiDensity normalise(const ModelParams& params, double rel_tol = 1e-12,
                                  std::size_t grid_nodes = 4096) {
  params.validate();
  if (!(rel_tol > 0.0)) {
    throw std::invalid_argument("normalise: rel_tol must be positive");
  }
  if (!(params.beta > 0.0)) {
    throw std::domain_error("normalise: beta must be > 0");
  }
  auto logf = [&](double p) { return unnorm_logdensity(p, params); };
  const auto support = detail::symmetric_support(logf, kSupportDepth);
  const double peak = support.log_peak;
  auto scaled = [&](double p) { return std::exp(logf(p) - peak); };

  // Adaptive integral over each live segment, started from 16 panels each.
  CompensatedSum total;
  for (const auto& [a, b] : support.segments) {
    total += integrate_pieces(scaled, a, b, 16, rel_tol);
  }
  const double mass = total.value();

  DeFinettiDensity out;
  out.params_ = params;
  out.log_norm_ = peak + std::log(mass);
  out.support_ = support.segments;

  // Sampling grid: equal cells over the live segments, cells holding more
  // than 1/grid_nodes of the mass split further.
  double live = 0.0;
  for (const auto& [a, b] : support.segments) {
    live += b - a;
  }
  auto density = [&](double p) { return scaled(p) / mass; };
  std::vector<double> nodes;
  std::vector<double> cdf;
  CompensatedSum acc;
  const double cell_cap = 1.0 / static_cast<double>(grid_nodes);
  for (const auto& [a, b] : support.segments) {
    const auto cells = std::max<std::size_t>(
        8, static_cast<std::size_t>(std::ceil(grid_nodes * (b - a) / live)));
    if (nodes.empty() || nodes.back() < a) {
      nodes.push_back(a);
      cdf.push_back(acc.value());
    }
    for (std::size_t c = 0; c < cells; ++c) {
      const double lo = a + (b - a) * static_cast<double>(c) / static_cast<double>(cells);
      const double hi = c + 1 == cells
                            ? b
                            : a + (b - a) * static_cast<double>(c + 1) / static_cast<double>(cells);
      const double cell_mass = kronrod15(density, lo, hi);
      const auto pieces = cell_mass > 2.0 * cell_cap
                              ? static_cast<std::size_t>(std::ceil(cell_mass / cell_cap))
                              : std::size_t{1};
      for (std::size_t k = 0; k < pieces; ++k) {
        const double x0 = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(pieces);
        const double x1 =
            k + 1 == pieces ? hi : lo + (hi - lo) * static_cast<double>(k + 1) / pieces;
        acc += pieces == 1 ? cell_mass : kronrod15(density, x0, x1);
        nodes.push_back(x1);
        cdf.push_back(acc.value());
      }
    }
  }
  const double grid_mass = acc.value();
  for (double& c : cdf) {
    c /= grid_mass;
  }
  cdf.back() = 1.0;
  out.grid_ = TabulatedCdf(std::move(nodes), std::move(cdf));
  return out;
}

template <class Rng>
RandomisationSample sample_v(const DeFinettiDensity& density, Rng& rng) {
  return RandomisationSample::from_v(density.quantile(uniform_open(rng)));
}

}  // namespace curiefield

#endif  // CURIEFIELD_DEFINETTI_HPP
