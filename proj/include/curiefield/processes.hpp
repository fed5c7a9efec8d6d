#ifndef CURIEFIELD_PROCESSES_HPP
#define CURIEFIELD_PROCESSES_HPP

// Covariance kernels of the limiting Gaussian objects and their pre-limit
// counterparts built from uniforms.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "curiefield/laplace.hpp"
#include "curiefield/rng.hpp"

namespace curiefield {

enum class KernelKind { iid_field, bridge, sheet, supercritical_couple };

// An index point. iid_field: first = s. bridge: first = p. sheet:
// first = t, second = p. supercritical_couple: first = t, second = branch
// (+1 or -1), standing for p = (1 + branch t_beta) / 2.
struct KernelPoint {
  double first = 0.0;
  double second = 0.0;
};

struct CovarianceKernel {
  KernelKind kind = KernelKind::bridge;
  double t_beta = 0.0;

  static CovarianceKernel iid_field() { return {KernelKind::iid_field, 0.0}; }
  static CovarianceKernel bridge() { return {KernelKind::bridge, 0.0}; }
  static CovarianceKernel sheet() { return {KernelKind::sheet, 0.0}; }
  static CovarianceKernel supercritical_couple(double t_beta) {
    if (!(t_beta > 0.0 && t_beta <= 1.0)) {
      throw std::domain_error("supercritical_couple: t_beta must lie in (0,1]");
    }
    return {KernelKind::supercritical_couple, t_beta};
  }
};

// C_Z(s, w) = M_Z(s + w) - M_Z(s) M_Z(w), valid on the whole complex plane.
inline cplx iid_field_covariance(cplx s, cplx w) { return m_z(s + w) - m_z(s) * m_z(w); }

inline double bridge_covariance(double p, double q) {
  if (p < 0.0 || p > 1.0 || q < 0.0 || q > 1.0) {
    throw std::domain_error("bridge kernel: points must lie in [0,1]");
  }
  return std::min(p, q) - p * q;
}

inline double sheet_covariance(double t, double p, double s, double q) {
  if (t < 0.0 || s < 0.0) {
    throw std::domain_error("sheet kernel: times must be nonnegative");
  }
  return std::min(t, s) * bridge_covariance(p, q);
}

inline double kernel_eval(const CovarianceKernel& kernel, KernelPoint a, KernelPoint b) {
  switch (kernel.kind) {
    case KernelKind::iid_field:
      return iid_field_covariance(a.first, b.first).real();
    case KernelKind::bridge:
      return bridge_covariance(a.first, b.first);
    case KernelKind::sheet:
      return sheet_covariance(a.first, a.second, b.first, b.second);
    case KernelKind::supercritical_couple: {
      if (std::abs(a.second) != 1.0 || std::abs(b.second) != 1.0) {
        throw std::domain_error("couple kernel: branch must be +1 or -1");
      }
      const double p = 0.5 * (1.0 + a.second * kernel.t_beta);
      const double q = 0.5 * (1.0 + b.second * kernel.t_beta);
      return 4.0 * sheet_covariance(a.first, p, b.first, q);
    }
  }
  throw std::logic_error("kernel_eval: unknown kernel");
}

inline Eigen::MatrixXd gram_matrix(const CovarianceKernel& kernel,
                                   std::span<const KernelPoint> grid) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd g(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      g(i, j) = g(j, i) = kernel_eval(kernel, grid[static_cast<std::size_t>(i)],
                                      grid[static_cast<std::size_t>(j)]);
    }
  }
  return g;
}

class FactorisationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GaussianFactor {
  Eigen::MatrixXd root;  // root * root^T reproduces the (jittered) Gram matrix
  double jitter = 0.0;
};

// Square root of a positive semidefinite matrix. A pivoted LDL^T is tried
// first, which keeps exactly-degenerate rows (bridge endpoints) at zero. It
// is kept only if it reproduces the matrix to 1e-12 times the scale: on
// numerically low-rank kernels clipping small negative pivots is amplified
// by large entries of L. Otherwise Cholesky with jitter 1e-14, ..., 1e-10
// times the scale.
inline GaussianFactor factorise(const Eigen::MatrixXd& gram) {
  const double scale = std::max(1.0, gram.diagonal().cwiseAbs().maxCoeff());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() == Eigen::Success) {
    const Eigen::VectorXd d = ldlt.vectorD();
    if (d.minCoeff() >= -1e-14 * scale) {
      const Eigen::MatrixXd l = ldlt.matrixL();
      Eigen::MatrixXd root = ldlt.transpositionsP().transpose() *
                             (l * d.cwiseMax(0.0).cwiseSqrt().asDiagonal());
      if ((root * root.transpose() - gram).cwiseAbs().maxCoeff() <= 1e-12 * scale) {
        return {root, 0.0};
      }
    }
  }
  const auto m = gram.rows();
  for (double jitter = 1e-14; jitter <= 1e-10 * (1.0 + 1e-9); jitter *= 10.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(gram + jitter * scale * Eigen::MatrixXd::Identity(m, m));
    if (llt.info() == Eigen::Success) {
      return {llt.matrixL(), jitter * scale};
    }
  }
  throw FactorisationError("factorise: Gram matrix is not positive semidefinite");
}

struct GaussianFieldSample {
  std::vector<KernelPoint> grid;
  std::vector<double> values;
  CovarianceKernel kernel;
};

// Draws L g on a fixed grid; the factorisation is computed once.
class GaussianFieldSampler {
 public:
  GaussianFieldSampler(const CovarianceKernel& kernel, std::vector<KernelPoint> grid)
      : kernel_(kernel), grid_(std::move(grid)), factor_(factorise(gram_matrix(kernel_, grid_))) {}

  template <class Rng>
  GaussianFieldSample draw(Rng& rng) const {
    std::normal_distribution<double> normal;
    Eigen::VectorXd g(static_cast<Eigen::Index>(grid_.size()));
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      g(i) = normal(rng);
    }
    const Eigen::VectorXd x = factor_.root * g;
    return {grid_, std::vector<double>(x.data(), x.data() + x.size()), kernel_};
  }

  const GaussianFactor& factor() const { return factor_; }

 private:
  CovarianceKernel kernel_;
  std::vector<KernelPoint> grid_;
  GaussianFactor factor_;
};

template <class Rng>
GaussianFieldSample sample_field(const CovarianceKernel& kernel, std::vector<KernelPoint> grid,
                                 Rng& rng) {
  return GaussianFieldSampler(kernel, std::move(grid)).draw(rng);
}

// (#{k : U_k < p} - n p) / sqrt(n) for each p of an increasing grid.
inline std::vector<double> bridge_direct(std::span<const double> uniforms,
                                         std::span<const double> p_grid) {
  if (!std::is_sorted(p_grid.begin(), p_grid.end())) {
    throw std::invalid_argument("bridge_direct: grid must be increasing");
  }
  std::vector<long> counts(p_grid.size() + 1, 0);
  for (double u : uniforms) {
    // First grid point strictly above u: u < p holds from there on.
    ++counts[static_cast<std::size_t>(std::upper_bound(p_grid.begin(), p_grid.end(), u) -
                                      p_grid.begin())];
  }
  const double n = static_cast<double>(uniforms.size());
  const double root = std::sqrt(n);
  std::vector<double> out(p_grid.size());
  long below = 0;
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    below += counts[i];
    out[i] = (static_cast<double>(below) - n * p_grid[i]) / root;
  }
  return out;
}

// ∫ e^{sp} (Z_n(s) - n M_Z(s)) / sqrt(n) d*s/s on the contour, for each p.
inline std::vector<double> bridge_via_contour(std::span<const double> uniforms,
                                              const ContourSpec& spec,
                                              std::span<const double> p_grid) {
  const double n = static_cast<double>(uniforms.size());
  std::vector<double> out;
  for (double p : p_grid) {
    if (!(p > 0.0 && p < 1.0)) {
      throw std::domain_error("bridge_via_contour: grid points must lie in (0,1)");
    }
    std::vector<double> xs(uniforms.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
      xs[k] = p - uniforms[k];
    }
    const double integral = detail::contour_exp_sum(
        xs, 0.0, spec, [&](cplx s) { return -n * std::exp(s * p) * m_z(s) / s; });
    out.push_back(integral / std::sqrt(n));
  }
  return out;
}

// One replica of the pre-limit bridge through the contour route.
template <class Rng>
GaussianFieldSample bridge_via_contour(int n, const ContourSpec& spec,
                                       std::span<const double> p_grid, Rng& rng) {
  std::vector<double> u(static_cast<std::size_t>(n));
  for (double& x : u) {
    x = uniform_open(rng);
  }
  GaussianFieldSample out;
  out.kernel = CovarianceKernel::bridge();
  for (double p : p_grid) {
    out.grid.push_back({p, 0.0});
  }
  out.values = bridge_via_contour(u, spec, p_grid);
  return out;
}

// (#{k <= floor(n t) : U_k < p} - floor(n t) p) / sqrt(n) on a t x p grid,
// row-major in t.
inline std::vector<double> sheet_direct(std::span<const double> uniforms,
                                        std::span<const double> t_grid,
                                        std::span<const double> p_grid) {
  const int n = static_cast<int>(uniforms.size());
  const double root = std::sqrt(static_cast<double>(n));
  std::vector<double> out;
  out.reserve(t_grid.size() * p_grid.size());
  std::vector<long> below(p_grid.size(), 0);
  int k = 0;
  for (double t : t_grid) {
    const int len = prefix_length(n, t);
    if (len > n || len < k) {
      throw std::domain_error("sheet_direct: times must be nondecreasing with floor(n t) <= n");
    }
    for (; k < len; ++k) {
      const double u = uniforms[static_cast<std::size_t>(k)];
      for (std::size_t j = 0; j < p_grid.size(); ++j) {
        below[j] += u < p_grid[j];
      }
    }
    for (std::size_t j = 0; j < p_grid.size(); ++j) {
      out.push_back((static_cast<double>(below[j]) - len * p_grid[j]) / root);
    }
  }
  return out;
}

// E[G_k G_l] = 1/(k + l + 1) - 1/((k + 1)(l + 1)) for G_k = U^k - E[U^k].
inline double series_covariance(int k, int l) {
  if (k < 0 || l < 0) {
    throw std::domain_error("series_covariance: indices must be nonnegative");
  }
  return 1.0 / (k + l + 1.0) - 1.0 / ((k + 1.0) * (l + 1.0));
}

// Covariance of Σ_{k<=K} G_k (-s)^k / k! with the same sum at w.
inline cplx series_iid_covariance(cplx s, cplx w, int order) {
  std::vector<cplx> a(static_cast<std::size_t>(order) + 1);
  std::vector<cplx> b(a.size());
  a[0] = b[0] = 1.0;
  for (int k = 1; k <= order; ++k) {
    a[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k) - 1] * (-s) / static_cast<double>(k);
    b[static_cast<std::size_t>(k)] = b[static_cast<std::size_t>(k) - 1] * (-w) / static_cast<double>(k);
  }
  cplx total = 0.0;
  for (int k = 0; k <= order; ++k) {
    for (int l = 0; l <= order; ++l) {
      total += series_covariance(k, l) * a[static_cast<std::size_t>(k)] * b[static_cast<std::size_t>(l)];
    }
  }
  return total;
}

}  // namespace curiefield

#endif  // CURIEFIELD_PROCESSES_HPP
