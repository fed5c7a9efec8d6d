#ifndef CURIEFIELD_LAPLACE_HPP
#define CURIEFIELD_LAPLACE_HPP

// Bromwich-contour inversion on the vertical line c + i[-T, T].
//
// All integrands here are real on the real axis, so g(conj s) = conj g(s)
// and (1/2 pi i) ∫ g(s) ds over the symmetric segment equals
// (1/pi) ∫_0^T Re g(c + iy) dy. The trapezoid rule is applied with step h
// and half weights at y = 0 and y = T.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "curiefield/coupling.hpp"
#include "curiefield/numeric.hpp"

namespace curiefield {

using cplx = std::complex<double>;

struct ContourSpec {
  double c = 1.0;
  double height = 1e4;
  double step = 0.01;

  void validate() const {
    if (!(c > 0.0) || !(height > 0.0) || !(step > 0.0) || !std::isfinite(height)) {
      throw std::invalid_argument("ContourSpec: c, height and step must be positive");
    }
    if (step > height / 100.0 * (1.0 + 1e-12)) {
      throw std::invalid_argument("ContourSpec: step must be at most height/100");
    }
  }

  // Index of the last node; the effective height is nodes() * step.
  std::size_t nodes() const { return static_cast<std::size_t>(std::llround(height / step)); }
  cplx node(std::ptrdiff_t j) const { return {c, static_cast<double>(j) * step}; }
};

class ReconstructionGapError : public std::runtime_error {
 public:
  ReconstructionGapError(double value, double lattice)
      : std::runtime_error("reconstruction gap: value " + std::to_string(value) +
                           " is far from lattice point " + std::to_string(lattice) +
                           "; increase the contour height"),
        value(value),
        lattice(lattice) {}
  double value;
  double lattice;
};

// M_Z(s) = E[e^{-sU}] = (1 - e^{-s}) / s, by Taylor series near 0.
inline cplx m_z(cplx s) {
  if (std::abs(s) < 1e-2) {
    cplx term = 1.0;
    cplx sum = 1.0;
    for (int k = 1; k < 8; ++k) {
      term *= -s / static_cast<double>(k + 1);
      sum += term;
    }
    return sum;
  }
  return (1.0 - std::exp(-s)) / s;
}

inline double m_z(double s) { return m_z(cplx{s, 0.0}).real(); }

// (1/2 pi i) ∫ g(s) ds on the truncated contour, for conjugate-symmetric g.
template <class G>
double bromwich(G&& g, const ContourSpec& spec) {
  spec.validate();
  const std::size_t last = spec.nodes();
  CompensatedSum acc;
  acc += 0.5 * g(spec.node(0)).real();
  for (std::size_t j = 1; j < last; ++j) {
    acc += g(spec.node(static_cast<std::ptrdiff_t>(j))).real();
  }
  acc += 0.5 * g(spec.node(static_cast<std::ptrdiff_t>(last))).real();
  return acc.value() * spec.step / std::numbers::pi;
}

namespace detail {

inline constexpr std::size_t kReanchor = 2048;

// (1/2 pi i) ∫ [(Σ_k e^{s x_k} - offset) / s + extra(s)] ds. The phasors
// e^{(c + ijh) x_k} advance by one complex multiply per node and are
// recomputed directly every kReanchor nodes.
template <class Extra>
double contour_exp_sum(std::span<const double> xs, double offset, const ContourSpec& spec,
                       Extra&& extra) {
  spec.validate();
  const std::size_t last = spec.nodes();
  const std::size_t n = xs.size();
  std::vector<double> mod(n), re(n), im(n), step_re(n), step_im(n);
  for (std::size_t k = 0; k < n; ++k) {
    mod[k] = std::exp(spec.c * xs[k]);
    step_re[k] = std::cos(spec.step * xs[k]);
    step_im[k] = std::sin(spec.step * xs[k]);
  }
  CompensatedSum acc;
  for (std::size_t j = 0; j <= last; ++j) {
    if (j % kReanchor == 0) {
      const double y = static_cast<double>(j) * spec.step;
      for (std::size_t k = 0; k < n; ++k) {
        re[k] = mod[k] * std::cos(y * xs[k]);
        im[k] = mod[k] * std::sin(y * xs[k]);
      }
    }
    double sum_re = 0.0;
    double sum_im = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      sum_re += re[k];
      sum_im += im[k];
      const double r = re[k] * step_re[k] - im[k] * step_im[k];
      im[k] = re[k] * step_im[k] + im[k] * step_re[k];
      re[k] = r;
    }
    const cplx s = spec.node(static_cast<std::ptrdiff_t>(j));
    const double value = ((cplx{sum_re - offset, sum_im}) / s + extra(s)).real();
    acc += (j == 0 || j == last) ? 0.5 * value : value;
  }
  return acc.value() * spec.step / std::numbers::pi;
}

inline cplx no_extra(cplx) { return 0.0; }

}  // namespace detail

// 1{x > 0} + 1{x = 0}/2 as 1/2 + (1/2 pi i) ∫ (e^{xs} - 1) ds / s. The
// subtracted term integrates to 1/2 over the whole line, so at x = 0 the
// result is exactly 1/2 for every truncation.
inline double inv_laplace_indicator(double x, const ContourSpec& spec) {
  const double xs[1] = {x};
  return 0.5 + detail::contour_exp_sum(xs, 1.0, spec, detail::no_extra);
}

struct ContourField {
  ContourSpec spec;
  std::vector<cplx> nodes;   // s_j for j = 0..N
  std::vector<cplx> values;  // field at s_j
  int n = 0;
  bool centered = false;

  // Value at node index j in [-N, N].
  cplx value(std::ptrdiff_t j) const {
    const auto idx = static_cast<std::size_t>(j < 0 ? -j : j);
    return j < 0 ? std::conj(values.at(idx)) : values.at(idx);
  }
};

// Z_n(s_j) = Σ_k e^{-s_j U_k}, minus n M_Z(s_j) when centered.
inline ContourField evaluate_field(std::span<const double> uniforms, const ContourSpec& spec,
                                   bool centered) {
  spec.validate();
  if (uniforms.empty()) {
    throw std::invalid_argument("evaluate_field: no uniforms");
  }
  const std::size_t last = spec.nodes();
  ContourField field{spec, {}, {}, static_cast<int>(uniforms.size()), centered};
  field.nodes.resize(last + 1);
  field.values.assign(last + 1, cplx{0.0, 0.0});
  for (std::size_t j = 0; j <= last; ++j) {
    field.nodes[j] = spec.node(static_cast<std::ptrdiff_t>(j));
  }
  for (double u : uniforms) {
    if (!(u > 0.0 && u < 1.0)) {
      throw std::domain_error("evaluate_field: uniforms must lie in (0,1)");
    }
    const double mod = std::exp(-spec.c * u);
    const cplx rot = std::polar(1.0, -spec.step * u);
    cplx cur;
    for (std::size_t j = 0; j <= last; ++j) {
      if (j % detail::kReanchor == 0) {
        cur = std::polar(mod, -static_cast<double>(j) * spec.step * u);
      }
      field.values[j] += cur;
      cur *= rot;
    }
  }
  field.values[0].imag(0.0);
  if (centered) {
    for (std::size_t j = 0; j <= last; ++j) {
      field.values[j] -= static_cast<double>(field.n) * m_z(field.nodes[j]);
    }
  }
  return field;
}

// Nearest point of {-n, -n+2, ..., n}.
inline int round_to_parity(double value, int n) {
  const double k = std::round((value + n) / 2.0);
  return 2 * static_cast<int>(std::clamp(k, 0.0, static_cast<double>(n))) - n;
}

namespace detail {

inline std::vector<double> thresholds(const SpinSample& sample, double v) {
  std::vector<double> xs(sample.uniforms.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    xs[k] = v - sample.uniforms[k];
  }
  return xs;
}

// V, nudged off any uniform it coincides with.
inline double separated_v(const SpinSample& sample) {
  double v = sample.v.v;
  while (std::find(sample.uniforms.begin(), sample.uniforms.end(), v) != sample.uniforms.end()) {
    v = std::nextafter(v, 2.0);
  }
  return v;
}

inline void check_gap(double value, int n) {
  const int lattice = round_to_parity(value, n);
  if (std::abs(value - lattice) > 0.4) {
    throw ReconstructionGapError(value, lattice);
  }
}

}  // namespace detail

// 2 ∫ e^{sV} Z_n(s) d*s/s - n, each indicator in the principal-value form.
inline double reconstruct_magnetisation(const SpinSample& sample, const ContourSpec& spec) {
  const auto xs = detail::thresholds(sample, detail::separated_v(sample));
  const double n = static_cast<double>(xs.size());
  const double value =
      2.0 * (0.5 * n + detail::contour_exp_sum(xs, n, spec, detail::no_extra)) - n;
  detail::check_gap(value, sample.n());
  return value;
}

// 2 ∫ e^{sV} (Z_n(s) - n M_Z(s)) d*s/s + n T, with the plain 1/s kernel.
inline double decomposition_rhs(const SpinSample& sample, const ContourSpec& spec) {
  const double v = detail::separated_v(sample);
  const auto xs = detail::thresholds(sample, v);
  const double n = static_cast<double>(xs.size());
  const double integral = detail::contour_exp_sum(
      xs, 0.0, spec, [&](cplx s) { return -n * std::exp(s * v) * m_z(s) / s; });
  const double value = 2.0 * integral + n * (2.0 * sample.v.v - 1.0);
  detail::check_gap(value, sample.n());
  return value;
}

inline double decomposition_residual(const SpinSample& sample, const ContourSpec& spec) {
  return std::abs(static_cast<double>(magnetisation(sample)) - decomposition_rhs(sample, spec));
}

// 2 ∫ e^{sp} E[e^{-sU}] d*s/s - 1, which equals 2p - 1 on (0,1).
inline double phi_integral(double p, const ContourSpec& spec) {
  return 2.0 * bromwich([&](cplx s) { return std::exp(s * p) * m_z(s) / s; }, spec) - 1.0;
}

// Contour height kappa / min_k |V - U_k|, clamped to [100 step, max_height].
inline ContourSpec adaptive_spec(const SpinSample& sample, double kappa = 1e3, double c = 1.0,
                                 double step = 2.0, double max_height = 1e7) {
  double gap = std::numeric_limits<double>::infinity();
  for (double u : sample.uniforms) {
    gap = std::min(gap, std::abs(sample.v.v - u));
  }
  const double height = std::clamp(kappa / gap, 100.0 * step, max_height);
  return {c, height, step};
}

}  // namespace curiefield

#endif  // CURIEFIELD_LAPLACE_HPP
