#ifndef CURIEFIELD_STATS_HPP
#define CURIEFIELD_STATS_HPP

// Goodness-of-fit statistics, moment estimators, deterministic parallel
// replica loops and the experiment report record.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "curiefield/coupling.hpp"
#include "curiefield/numeric.hpp"

namespace curiefield {

struct EmpiricalSample {
  std::vector<double> values;  // ascending
  std::uint64_t seed = 0;
  std::string meta;

  static EmpiricalSample from(std::vector<double> values, std::uint64_t seed = 0,
                              std::string meta = {}) {
    std::sort(values.begin(), values.end());
    return {std::move(values), seed, std::move(meta)};
  }
  std::size_t size() const { return values.size(); }
};

// sup_x |F_N(x) - F(x)| over the sorted sample. Both sides of each jump are
// compared, the left one against F just below x, so tied samples and
// distributions with atoms are handled.
template <class Cdf>
double ks_distance(const EmpiricalSample& sample, Cdf&& cdf) {
  const auto& xs = sample.values;
  if (xs.empty()) {
    throw std::invalid_argument("ks_distance: empty sample");
  }
  const double n = static_cast<double>(xs.size());
  double ks = 0.0;
  std::size_t i = 0;
  while (i < xs.size()) {
    std::size_t j = i;
    while (j < xs.size() && xs[j] == xs[i]) {
      ++j;
    }
    const double below = cdf(std::nextafter(xs[i], -std::numeric_limits<double>::infinity()));
    ks = std::max({ks, std::abs(static_cast<double>(j) / n - cdf(xs[i])),
                   std::abs(static_cast<double>(i) / n - below)});
    i = j;
  }
  return ks;
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(const EmpiricalSample& a, const EmpiricalSample& b) {
  const auto& x = a.values;
  const auto& y = b.values;
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double ks = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) {
      ++i;
    }
    while (j < y.size() && y[j] <= v) {
      ++j;
    }
    ks = std::max(ks, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return ks;
}

inline double tv_distance(const ExactPmf& p, const ExactPmf& q) {
  if (p.n != q.n || p.support != q.support || p.probs.size() != q.probs.size()) {
    throw std::invalid_argument("tv_distance: support mismatch");
  }
  CompensatedSum s;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    s += std::abs(p.probs[i] - q.probs[i]);
  }
  return 0.5 * s.value();
}

inline ExactPmf empirical_pmf(std::span<const int> magnetisations, int n) {
  ExactPmf pmf;
  pmf.n = n;
  std::vector<long> counts(static_cast<std::size_t>(n) + 1, 0);
  for (int m : magnetisations) {
    if (m < -n || m > n || (m + n) % 2 != 0) {
      throw std::invalid_argument("empirical_pmf: value outside the magnetisation lattice");
    }
    ++counts[static_cast<std::size_t>((m + n) / 2)];
  }
  for (int k = 0; k <= n; ++k) {
    pmf.support.push_back(2 * k - n);
    pmf.probs.push_back(static_cast<double>(counts[static_cast<std::size_t>(k)]) /
                        static_cast<double>(magnetisations.size()));
  }
  return pmf;
}

inline double mean(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) {
    s += x;
  }
  return s.value() / static_cast<double>(xs.size());
}

// Unbiased sample covariance.
inline double covariance(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument("covariance: need two equally long samples of size >= 2");
  }
  const double mx = mean(xs);
  const double my = mean(ys);
  CompensatedSum s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s += (xs[i] - mx) * (ys[i] - my);
  }
  return s.value() / static_cast<double>(xs.size() - 1);
}

inline double variance(std::span<const double> xs) { return covariance(xs, xs); }

// Covariance matrix of the columns of a row-per-replica table.
inline std::vector<std::vector<double>> covariance_matrix(
    const std::vector<std::vector<double>>& rows) {
  if (rows.size() < 2) {
    throw std::invalid_argument("covariance_matrix: need at least two rows");
  }
  const std::size_t m = rows.front().size();
  std::vector<std::vector<double>> columns(m, std::vector<double>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      columns[c][r] = rows[r][c];
    }
  }
  std::vector<std::vector<double>> cov(m, std::vector<double>(m));
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      cov[a][b] = cov[b][a] = covariance(columns[a], columns[b]);
    }
  }
  return cov;
}

// Standard error of the mean of i.i.d. draws.
inline double standard_error(std::span<const double> xs) {
  return std::sqrt(variance(xs) / static_cast<double>(xs.size()));
}

// Standard error of a sample variance estimate: sqrt((m4 - s^4) / N).
inline double variance_standard_error(std::span<const double> xs) {
  const double m = mean(xs);
  CompensatedSum m2;
  CompensatedSum m4;
  for (double x : xs) {
    const double d = (x - m) * (x - m);
    m2 += d;
    m4 += d * d;
  }
  const double n = static_cast<double>(xs.size());
  const double s2 = m2.value() / n;
  return std::sqrt(std::max(0.0, m4.value() / n - s2 * s2) / n);
}

// Standard error of a product-moment estimate E[XY] from paired draws.
inline double cross_moment_standard_error(std::span<const double> xs, std::span<const double> ys) {
  std::vector<double> prod(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    prod[i] = xs[i] * ys[i];
  }
  return standard_error(prod);
}

inline double quantile_of_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  return i + 1 < sorted.size() ? sorted[i] + frac * (sorted[i + 1] - sorted[i]) : sorted[i];
}

// Standard error of the mean of a correlated series from non-overlapping
// batch means.
inline double batch_means_standard_error(std::span<const double> xs, std::size_t batches = 50) {
  if (xs.size() < 2 * batches) {
    throw std::invalid_argument("batch_means_standard_error: series too short");
  }
  const std::size_t len = xs.size() / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    means[b] = mean(xs.subspan(b * len, len));
  }
  return standard_error(means);
}

// max over the 3x3 grid of marginal quartiles of |F_XY - F_X F_Y|.
inline double independence_check(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 4) {
    throw std::invalid_argument("independence_check: too few pairs");
  }
  std::vector<double> xs(pairs.size());
  std::vector<double> ys(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    xs[i] = pairs[i].first;
    ys[i] = pairs[i].second;
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double n = static_cast<double>(pairs.size());
  double stat = 0.0;
  for (double qx : {0.25, 0.5, 0.75}) {
    const double x = quantile_of_sorted(xs, qx);
    const double fx =
        static_cast<double>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) / n;
    for (double qy : {0.25, 0.5, 0.75}) {
      const double y = quantile_of_sorted(ys, qy);
      const double fy =
          static_cast<double>(std::upper_bound(ys.begin(), ys.end(), y) - ys.begin()) / n;
      long joint = 0;
      for (const auto& [a, b] : pairs) {
        joint += a <= x && b <= y;
      }
      stat = std::max(stat, std::abs(static_cast<double>(joint) / n - fx * fy));
    }
  }
  return stat;
}

// Scale of independence_check on independent pairs: 3 / sqrt(N).
inline double independence_bound(std::size_t pairs) {
  return 3.0 / std::sqrt(static_cast<double>(pairs));
}

// Runs body(i) for i in [0, count) on `workers` threads. Work is split in
// contiguous blocks; body must write only to slot i, so results do not
// depend on the worker count.
template <class Body>
void parallel_for(std::size_t count, int workers, Body&& body) {
  workers = std::max(1, workers);
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) {
      body(i);
    }
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t w = static_cast<std::size_t>(workers);
  for (std::size_t id = 0; id < w; ++id) {
    const std::size_t lo = count * id / w;
    const std::size_t hi = count * (id + 1) / w;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) {
        body(i);
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// Columns bin_left, bin_right, count, density over [min, max] of the sample.
inline Table histogram_table(std::span<const double> xs, std::size_t bins = 60) {
  Table t{{"bin_left", "bin_right", "count", "density"}, {}};
  if (xs.empty()) {
    return t;
  }
  const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
  const double lo = *lo_it;
  const double hi = *hi_it > lo ? *hi_it : lo + 1.0;
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<double> counts(bins, 0.0);
  for (double x : xs) {
    const auto b = std::min(bins - 1, static_cast<std::size_t>((x - lo) / width));
    counts[b] += 1.0;
  }
  for (std::size_t b = 0; b < bins; ++b) {
    t.rows.push_back({lo + static_cast<double>(b) * width, lo + static_cast<double>(b + 1) * width,
                      counts[b], counts[b] / (static_cast<double>(xs.size()) * width)});
  }
  return t;
}

// Columns x, empirical, limit at evenly spaced order statistics.
template <class Cdf>
Table cdf_table(const EmpiricalSample& sample, Cdf&& cdf, std::size_t points = 200) {
  Table t{{"x", "empirical", "limit"}, {}};
  const auto& v = sample.values;
  if (v.empty()) {
    return t;
  }
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < points; ++i) {
    const auto idx = std::min(v.size() - 1, (v.size() * (2 * i + 1)) / (2 * points));
    const double x = v[idx];
    const auto rank = std::upper_bound(v.begin(), v.end(), x) - v.begin();
    t.rows.push_back({x, static_cast<double>(rank) / n, cdf(x)});
  }
  return t;
}

enum class Relation { at_most, at_least, within, holds };

inline const char* relation_name(Relation r) {
  switch (r) {
    case Relation::at_most:
      return "<=";
    case Relation::at_least:
      return ">=";
    case Relation::within:
      return "|.|<=";
    case Relation::holds:
      return "holds";
  }
  return "?";
}

struct Verdict {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  Relation relation = Relation::at_most;
  bool pass = false;
};

inline Verdict make_verdict(std::string name, double value, Relation relation, double threshold) {
  bool pass = false;
  switch (relation) {
    case Relation::at_most:
      pass = value <= threshold;
      break;
    case Relation::at_least:
      pass = value >= threshold;
      break;
    case Relation::within:
      pass = std::abs(value) <= threshold;
      break;
    case Relation::holds:
      pass = value != 0.0;
      break;
  }
  return {std::move(name), value, threshold, relation, pass};
}

struct ExperimentReport {
  std::string name;
  std::string anchor;
  std::map<std::string, std::string> params;
  std::map<std::string, double> sample_sizes;
  std::map<std::string, double> statistics;
  std::map<std::string, std::vector<std::vector<double>>> matrices;
  std::map<std::string, Table> tables;  // plot data written as CSV
  std::vector<Verdict> verdicts;
  std::vector<std::uint64_t> seeds;
  double wall_clock_seconds = 0.0;
  int workers = 1;

  void add(Verdict v) {
    statistics[v.name] = v.value;
    statistics[v.name + ".threshold"] = v.threshold;
    verdicts.push_back(std::move(v));
  }

  bool passed() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
  }
};

struct SweepOutcome {
  std::vector<double> values;
  int inversions = 0;           // steps where the statistic went up
  bool strictly_decreasing = false;
  bool monotone = false;        // at most one inversion
  bool final_ok = false;
  bool pass = false;
};

// Weak monotone decrease (one inversion allowed) plus the final threshold.
inline SweepOutcome assess_sweep(std::vector<double> values, double final_threshold) {
  SweepOutcome out;
  out.values = std::move(values);
  for (std::size_t i = 1; i < out.values.size(); ++i) {
    out.inversions += out.values[i] >= out.values[i - 1];
  }
  out.strictly_decreasing = out.inversions == 0;
  out.monotone = out.inversions <= 1;
  out.final_ok = !out.values.empty() && out.values.back() <= final_threshold;
  out.pass = out.monotone && out.final_ok;
  return out;
}

}  // namespace curiefield

#endif  // CURIEFIELD_STATS_HPP
