#ifndef CURIEFIELD_LIMITS_HPP
#define CURIEFIELD_LIMITS_HPP

// Limit laws of the Curie-Weiss magnetisation in its four regimes.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>

#include "curiefield/numeric.hpp"
#include "curiefield/rng.hpp"

namespace curiefield {

// Variance 1/(1 - beta) of the subcritical limit of M / sqrt(n).
inline double sigma2_subcritical(double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw std::domain_error("sigma2_subcritical: beta must lie in [0,1)");
  }
  return 1.0 / (1.0 - beta);
}

// Variance beta/(1 - beta) of the limit of sqrt(n) T.
inline double sigma2_randomisation(double beta) { return sigma2_subcritical(beta) - 1.0; }

struct TBeta {
  double t = 0.0;  // t = tanh(beta t)
  double x = 0.0;  // x = beta t, the positive root of tanh(x) = x / beta
};

inline TBeta fixed_point_tbeta(double beta) {
  if (!(beta > 1.0) || !std::isfinite(beta)) {
    throw std::domain_error("fixed_point_tbeta: beta must be > 1");
  }
  // g(x) = tanh(x) - x/beta is positive on (0, x_beta) and negative after.
  auto g = [beta](double x) { return std::tanh(x) - x / beta; };
  double lo = 0.0;
  double hi = beta;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) {
      break;
    }
    if (g(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double t = 0.5 * (lo + hi) / beta;
  // Newton polish on h(t) = tanh(beta t) - t.
  for (int it = 0; it < 5; ++it) {
    const double th = std::tanh(beta * t);
    const double dh = beta * (1.0 - th * th) - 1.0;
    if (dh == 0.0) {
      break;
    }
    const double next = t - (th - t) / dh;
    if (!(next > 0.0 && next <= 1.0) || std::abs(std::tanh(beta * next) - next) >= std::abs(th - t)) {
      break;
    }
    t = next;
  }
  return {t, beta * t};
}

struct SupercriticalCouple {
  double t_beta = 0.0;
  double theorem_cross = 0.0;  // ((1 + t)/2)^2, the stated E[G+ G-]
  double bridge_cross = 0.0;   // 4 (p- - p+ p-) from the bridge kernel, = (1 - t)^2
  double variance = 0.0;       // 4 p+ (1 - p+) = 1 - t^2, for either sign
};

inline SupercriticalCouple couple_supercritical_cov(double beta) {
  const double t = fixed_point_tbeta(beta).t;
  const double plus = 0.5 * (1.0 + t);
  const double minus = 0.5 * (1.0 - t);
  SupercriticalCouple c;
  c.t_beta = t;
  c.theorem_cross = plus * plus;
  c.bridge_cross = 4.0 * (std::min(plus, minus) - plus * minus);
  c.variance = 4.0 * (plus - plus * plus);
  return c;
}

inline double quartic_unnorm_logdensity(double x, double gamma) {
  const double x2 = x * x;
  return -x2 * x2 / 12.0 - 0.5 * gamma * x2;
}

// 3^{1/4} 2^{-1/2} Gamma(1/4), the normaliser of e^{-x^4/12}.
inline double quartic_zf_closed_form() {
  return std::pow(3.0, 0.25) / std::sqrt(2.0) * std::tgamma(0.25);
}

// Density ∝ exp(-x^4/12 - gamma x^2/2) on the real line.
class QuarticLaw {
 public:
  explicit QuarticLaw(double gamma, std::size_t cells = 8000) : gamma_(gamma) {
    if (!std::isfinite(gamma)) {
      throw std::domain_error("QuarticLaw: gamma must be finite");
    }
    peak_ = gamma < 0.0 ? 0.75 * gamma * gamma : 0.0;  // at x^2 = -3 gamma
    window_ = std::max(6.0, std::pow(12.0 * 40.0, 0.25) + std::sqrt(2.0 * 40.0 / std::max(gamma, 1.0)));
    while (quartic_unnorm_logdensity(window_, gamma_) - peak_ > -40.0) {
      window_ *= 1.25;
    }
    auto scaled = [this](double x) { return std::exp(quartic_unnorm_logdensity(x, gamma_) - peak_); };
    const double mass = integrate_pieces(scaled, -window_, window_, 64, 1e-14);
    log_norm_ = peak_ + std::log(mass);
    table_ = std::make_shared<const TabulatedCdf>(tabulate_cdf(scaled, -window_, window_, cells));
    tune_envelope();
  }

  double gamma() const { return gamma_; }
  double window() const { return window_; }
  double log_normalisation() const { return log_norm_; }
  double normalisation() const { return std::exp(log_norm_); }
  double logdensity(double x) const { return quartic_unnorm_logdensity(x, gamma_) - log_norm_; }
  double density(double x) const { return std::exp(logdensity(x)); }
  double cdf(double x) const { return table_->cdf(x); }

  // Exact for gamma = 0: X^4/12 ~ Gamma(1/4), X = ±(12 g)^{1/4}.
  template <class Rng>
  double sample_gamma_representation(Rng& rng) const {
    std::gamma_distribution<double> gamma(0.25, 1.0);
    const double g = gamma(rng);
    const double sign = (rng() >> 63) != 0 ? 1.0 : -1.0;
    return sign * std::pow(12.0 * g, 0.25);
  }

  // Rejection from N(0, sigma^2). With a = (1/sigma^2 - gamma)/2 the ratio
  // target/envelope is exp(-x^4/12 + a x^2), maximal at x^2 = 6a.
  template <class Rng>
  double sample_rejection(Rng& rng) const {
    std::normal_distribution<double> normal(0.0, sigma_);
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const double x = normal(rng);
      const double x2 = x * x;
      const double log_ratio = -x2 * x2 / 12.0 + a_ * x2 - log_bound_;
      if (std::log(uniform_open(rng)) < log_ratio) {
        return x;
      }
    }
    throw std::runtime_error("QuarticLaw: rejection sampler exceeded 10^4 attempts");
  }

  template <class Rng>
  double sample(Rng& rng) const {
    return gamma_ == 0.0 ? sample_gamma_representation(rng) : sample_rejection(rng);
  }

  double envelope_sigma() const { return sigma_; }
  double acceptance_rate() const {
    return std::exp(log_norm_ - log_bound_) / (std::sqrt(2.0 * std::numbers::pi) * sigma_);
  }

 private:
  double log_bound_for(double sigma) const {
    const double a = 0.5 * (1.0 / (sigma * sigma) - gamma_);
    return a > 0.0 ? 3.0 * a * a : 0.0;
  }

  void tune_envelope() {
    // Minimise log M + log sigma over log sigma by golden section.
    auto cost = [this](double ls) { return log_bound_for(std::exp(ls)) + ls; };
    double lo = -6.0;
    double hi = 4.0;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 200; ++it) {
      const double x1 = hi - r * (hi - lo);
      const double x2 = lo + r * (hi - lo);
      if (cost(x1) < cost(x2)) {
        hi = x2;
      } else {
        lo = x1;
      }
    }
    sigma_ = std::exp(0.5 * (lo + hi));
    a_ = 0.5 * (1.0 / (sigma_ * sigma_) - gamma_);
    log_bound_ = log_bound_for(sigma_);
  }

  double gamma_;
  double peak_ = 0.0;
  double window_ = 0.0;
  double log_norm_ = 0.0;
  std::shared_ptr<const TabulatedCdf> table_;
  double sigma_ = 1.0;
  double a_ = 0.0;
  double log_bound_ = 0.0;
};

inline double quartic_logdensity(double x, double gamma) { return QuarticLaw(gamma, 2).logdensity(x); }
inline double quartic_normalisation(double gamma) { return QuarticLaw(gamma, 2).normalisation(); }

enum class LimitKind {
  gaussian_subcritical,
  quartic,
  bernoulli_atom,
  couple_critical,
  couple_supercritical
};

// Limit of the rescaled magnetisation (or of a couple statistic) with its
// cached constants. For couples, coordinate 0 is the Gaussian part and
// coordinate 1 the randomisation part.
class LimitLaw {
 public:
  static LimitLaw gaussian_subcritical(double beta) {
    LimitLaw law(LimitKind::gaussian_subcritical, beta);
    law.sigma2_ = sigma2_subcritical(beta);
    return law;
  }
  static LimitLaw quartic(double gamma) {
    LimitLaw law(LimitKind::quartic, gamma);
    law.quartic_ = std::make_shared<const QuarticLaw>(gamma);
    return law;
  }
  static LimitLaw bernoulli_atom(double beta) {
    LimitLaw law(LimitKind::bernoulli_atom, beta);
    law.t_beta_ = fixed_point_tbeta(beta).t;
    return law;
  }
  static LimitLaw couple_critical(double gamma) {
    LimitLaw law = quartic(gamma);
    law.kind_ = LimitKind::couple_critical;
    law.sigma2_ = 1.0;
    return law;
  }
  static LimitLaw couple_supercritical(double beta) {
    LimitLaw law = bernoulli_atom(beta);
    law.kind_ = LimitKind::couple_supercritical;
    law.sigma2_ = 1.0 - law.t_beta_ * law.t_beta_;
    return law;
  }

  LimitKind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  double sigma2() const { return sigma2_; }
  double t_beta() const { return t_beta_; }
  const QuarticLaw& quartic_law() const {
    if (!quartic_) {
      throw std::logic_error("LimitLaw: no quartic component");
    }
    return *quartic_;
  }

  double cdf(double x) const { return marginal_cdf(kind_ == LimitKind::couple_critical ? 1 : 0, x); }

  double marginal_cdf(int coordinate, double x) const {
    switch (kind_) {
      case LimitKind::gaussian_subcritical:
        return normal_cdf(x, sigma2_);
      case LimitKind::quartic:
        return quartic_->cdf(x);
      case LimitKind::bernoulli_atom:
        return atom_cdf(x);
      case LimitKind::couple_critical:
        return coordinate == 0 ? normal_cdf(x, 1.0) : quartic_->cdf(x);
      case LimitKind::couple_supercritical:
        return coordinate == 0 ? normal_cdf(x, sigma2_) : atom_cdf(x);
    }
    throw std::logic_error("LimitLaw: unknown kind");
  }

 private:
  LimitLaw(LimitKind kind, double parameter) : kind_(kind), parameter_(parameter) {}

  double atom_cdf(double x) const { return x < -t_beta_ ? 0.0 : (x < t_beta_ ? 0.5 : 1.0); }

  LimitKind kind_;
  double parameter_;
  double sigma2_ = 0.0;
  double t_beta_ = 0.0;
  std::shared_ptr<const QuarticLaw> quartic_;
};

}  // namespace curiefield

#endif  // CURIEFIELD_LIMITS_HPP
