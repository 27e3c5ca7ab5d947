#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "mallows/error.hpp"

namespace mallows::stats {

inline double median(std::vector<double> values) {
  require(!values.empty(), Errc::invalid_argument, "median of empty sequence");
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

inline double mean(std::span<const double> values) {
  require(!values.empty(), Errc::invalid_argument, "mean of empty sequence");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
inline double stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

struct RobustEstimate {
  double estimate = 0.0;
  double se = 0.0;
};

/// Median across block values with a MAD-based standard error for the median:
/// se = (pi/2)^{1/2} * 1.4826 * MAD / sqrt(k).
inline RobustEstimate median_of_blocks(std::span<const double> blocks) {
  require(!blocks.empty(), Errc::invalid_argument, "no blocks");
  std::vector<double> v(blocks.begin(), blocks.end());
  const double med = median(v);
  for (auto& x : v) x = std::abs(x - med);
  const double mad = median(v);
  const double k = static_cast<double>(blocks.size());
  return {med, 1.2533141373155003 * 1.4826 * mad / std::sqrt(k)};
}

/// Two-sided one-sample KS statistic sup |F_n - F| against a continuous CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  require(!sample.empty(), Errc::invalid_argument, "empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Two-sample KS statistic sup |F_a - F_b|; ties handled by advancing both sides.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), Errc::invalid_argument, "empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == t) ++i;
    while (j < b.size() && b[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// P(K > lambda) for the Kolmogorov distribution.
inline double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Critical value of the KS statistic at significance `level` for effective
/// sample size `n_eff` (n for one sample, n*m/(n+m) for two), using the
/// Stephens finite-sample correction lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.
inline double ks_critical_value(double level, double n_eff) {
  require(level > 0.0 && level < 1.0, Errc::invalid_argument, "level must lie in (0,1)");
  require(n_eff > 0.0, Errc::invalid_argument, "n_eff must be positive");
  double lo = 0.2, hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_survival(mid) > level ? lo : hi) = mid;
  }
  const double root = std::sqrt(n_eff);
  return 0.5 * (lo + hi) / (root + 0.12 + 0.11 / root);
}

inline double ks_two_sample_critical_value(double level, std::size_t n, std::size_t m) {
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return ks_critical_value(level, nn * mm / (nn + mm));
}

}  // namespace mallows::stats
