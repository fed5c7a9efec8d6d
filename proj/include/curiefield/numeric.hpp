#ifndef CURIEFIELD_NUMERIC_HPP
#define CURIEFIELD_NUMERIC_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace curiefield {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double log_sum_exp(std::span<const double> args) {
  if (args.empty()) {
    return -std::numeric_limits<double>::infinity();
  }
  const double top = *std::max_element(args.begin(), args.end());
  if (!std::isfinite(top)) {
    return top;
  }
  CompensatedSum acc;
  for (double a : args) {
    acc += std::exp(a - top);
  }
  return top + std::log(acc.value());
}

inline double normal_cdf(double x, double variance = 1.0) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0 * variance));
}

inline double normal_pdf(double x, double variance = 1.0) {
  return std::exp(-0.5 * x * x / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

// Logistic map alpha -> e^alpha / (e^alpha + e^-alpha).
inline double logistic(double alpha) { return 1.0 / (1.0 + std::exp(-2.0 * alpha)); }

// Inverse of the logistic map, Argtanh(2p - 1), evaluated without cancellation.
inline double logit_half(double p) { return 0.5 * std::log(p / (1.0 - p)); }

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double last, double previous)
      : std::runtime_error(what + " (last estimate " + std::to_string(last) + ", previous " +
                           std::to_string(previous) + ")"),
        last_estimate(last),
        previous_estimate(previous) {}
  double last_estimate;
  double previous_estimate;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

namespace detail {

struct KronrodRule {
  static constexpr double nodes[8] = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.0};
  static constexpr double kronrod_weights[8] = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  // Gauss weights for nodes[1], nodes[3], nodes[5], nodes[7].
  static constexpr double gauss_weights[4] = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel kronrod_panel(F& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(mid);
  double kronrod = fc * KronrodRule::kronrod_weights[7];
  double gauss = fc * KronrodRule::gauss_weights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * KronrodRule::nodes[i];
    const double pair = f(mid - dx) + f(mid + dx);
    kronrod += KronrodRule::kronrod_weights[i] * pair;
    if (i % 2 == 1) {
      gauss += KronrodRule::gauss_weights[i / 2] * pair;
    }
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

// Fixed 15-point Gauss-Kronrod estimate on [a, b].
template <class F>
double kronrod15(F&& f, double a, double b) {
  return detail::kronrod_panel(f, a, b).value;
}

// Globally adaptive Gauss-Kronrod quadrature. The worst panel is bisected
// until the summed error estimate and the change between the last two
// refinements are both below max(rel_tol * |I|, abs_tol).
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double rel_tol,
                                    double abs_tol = 0.0, std::size_t max_evals = 2'000'000) {
  if (!(rel_tol > 0.0) && !(abs_tol > 0.0)) {
    throw std::invalid_argument("integrate_adaptive: tolerance must be positive");
  }
  std::priority_queue<detail::Panel> panels;
  auto first = detail::kronrod_panel(f, a, b);
  std::size_t evals = 15;
  double total = first.value;
  double total_err = first.error;
  double previous = std::numeric_limits<double>::quiet_NaN();
  panels.push(first);
  while (true) {
    const double tol = std::max(rel_tol * std::abs(total), abs_tol);
    const bool agreed = std::isfinite(previous) && std::abs(total - previous) <= tol;
    if (total_err <= tol && (agreed || total_err <= 0.01 * tol)) {
      break;
    }
    if (evals + 30 > max_evals) {
      throw QuadratureError("adaptive quadrature did not converge", total, previous);
    }
    const auto worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = detail::kronrod_panel(f, worst.a, mid);
    const auto right = detail::kronrod_panel(f, mid, worst.b);
    evals += 30;
    previous = total;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }
  // Re-sum the panels in a fixed order to shed accumulated rounding.
  std::vector<detail::Panel> all;
  all.reserve(panels.size());
  while (!panels.empty()) {
    all.push_back(panels.top());
    panels.pop();
  }
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  CompensatedSum value;
  CompensatedSum err;
  for (const auto& p : all) {
    value += p.value;
    err += p.error;
  }
  return {value.value(), err.value(), evals};
}

// integrate_adaptive started from `pieces` equal panels, so that narrow
// features are seen by the first Kronrod pass.
template <class F>
double integrate_pieces(F&& f, double a, double b, int pieces, double rel_tol,
                        double abs_tol = 0.0) {
  CompensatedSum total;
  for (int k = 0; k < pieces; ++k) {
    const double lo = a + (b - a) * k / pieces;
    const double hi = k + 1 == pieces ? b : a + (b - a) * (k + 1) / pieces;
    total += integrate_adaptive(f, lo, hi, rel_tol, abs_tol / pieces).value;
  }
  return total.value();
}

// Piecewise cdf table on increasing nodes.
//
// With densities supplied the cdf is interpolated by monotone-clamped cubic
// Hermite polynomials; without them it is linear inside each cell, which is
// exactly the law produced by `quantile` on uniform input.
class TabulatedCdf {
 public:
  TabulatedCdf() = default;
  TabulatedCdf(std::vector<double> nodes, std::vector<double> cdf, std::vector<double> density = {})
      : nodes_(std::move(nodes)), cdf_(std::move(cdf)), density_(std::move(density)) {
    if (nodes_.size() < 2 || nodes_.size() != cdf_.size() ||
        (!density_.empty() && density_.size() != nodes_.size())) {
      throw std::invalid_argument("TabulatedCdf: inconsistent table sizes");
    }
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      if (!(nodes_[i] > nodes_[i - 1]) || cdf_[i] < cdf_[i - 1]) {
        throw std::invalid_argument("TabulatedCdf: nodes must increase and cdf must not decrease");
      }
    }
  }

  double cdf(double x) const {
    if (x <= nodes_.front()) {
      return x < nodes_.front() ? 0.0 : cdf_.front();
    }
    if (x >= nodes_.back()) {
      return 1.0;
    }
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
    const double h = nodes_[i + 1] - nodes_[i];
    const double t = (x - nodes_[i]) / h;
    const double lo = cdf_[i];
    const double hi = cdf_[i + 1];
    if (density_.empty()) {
      return lo + t * (hi - lo);
    }
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double value = (2 * t3 - 3 * t2 + 1) * lo + (t3 - 2 * t2 + t) * h * density_[i] +
                         (-2 * t3 + 3 * t2) * hi + (t3 - t2) * h * density_[i + 1];
    return std::clamp(value, lo, hi);
  }

  // Inverse cdf, linear inside the cell containing u.
  double quantile(double u) const {
    if (u <= cdf_.front()) {
      return nodes_.front();
    }
    if (u >= cdf_.back()) {
      return nodes_.back();
    }
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - cdf_.begin()) - 1;
    const double mass = cdf_[i + 1] - cdf_[i];
    const double t = mass > 0.0 ? (u - cdf_[i]) / mass : 0.0;
    return nodes_[i] + t * (nodes_[i + 1] - nodes_[i]);
  }

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> values() const { return cdf_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> cdf_;
  std::vector<double> density_;
};

// Tabulate the cdf of an (unnormalised) density on [lo, hi] with `cells`
// equal cells, each integrated by a 15-point Kronrod rule. Returns the table
// normalised to end at exactly 1 and the total mass through `mass`.
template <class Density>
TabulatedCdf tabulate_cdf(Density&& density, double lo, double hi, std::size_t cells,
                          double* mass = nullptr) {
  std::vector<double> nodes(cells + 1);
  std::vector<double> cdf(cells + 1, 0.0);
  std::vector<double> dens(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) {
    nodes[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cells);
    dens[i] = density(nodes[i]);
  }
  CompensatedSum acc;
  for (std::size_t i = 0; i < cells; ++i) {
    acc += kronrod15(density, nodes[i], nodes[i + 1]);
    cdf[i + 1] = acc.value();
  }
  const double total = acc.value();
  for (std::size_t i = 0; i <= cells; ++i) {
    cdf[i] /= total;
    dens[i] /= total;
  }
  cdf.back() = 1.0;
  if (mass != nullptr) {
    *mass = total;
  }
  return TabulatedCdf(std::move(nodes), std::move(cdf), std::move(dens));
}

}  // namespace curiefield

#endif  // CURIEFIELD_NUMERIC_HPP
