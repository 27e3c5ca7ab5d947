#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mallows/coupling.hpp"
#include "mallows/error.hpp"
#include "mallows/stable_law.hpp"

namespace mallows {

/// Growth exponent of the corrected truncation threshold b * n^delta.
inline double delta(double alpha) {
  validate_alpha(alpha);
  return (2.0 - alpha) / (2.0 * alpha);
}

inline double corrected_threshold(double alpha, std::size_t n, double b) {
  return b * std::pow(static_cast<double>(n), delta(alpha));
}

namespace detail {

inline void require_positive_b(double b) {
  require(b > 0.0 && std::isfinite(b), Errc::invalid_argument, "b must be positive, got " + std::to_string(b));
}

inline double realized_tail_mean(const PairSample& pairs, double threshold) {
  require(pairs.size() >= 1, Errc::invalid_argument, "empty pair sample");
  const double alpha = pairs.alpha();
  double sum = 0.0;
  for (const auto& p : pairs.pairs) {
    const double g = std::abs(p.gap());
    if (g > threshold) sum += std::pow(g, alpha);
  }
  return sum / static_cast<double>(pairs.size());
}

inline bool identically_distributed(const PairModel& model) {
  if (const auto* a = std::get_if<AdditiveNoise>(&model)) return a->index_exponent == 0.0;
  if (const auto* c = std::get_if<CustomGaps>(&model)) return c->laws.size() == 1;
  return true;
}

}  // namespace detail

/// (1/n) sum_i E{|G_i|^alpha 1(|G_i| > threshold)} from the model's exact gap laws.
inline double exact_tail_mean(const PairModel& model, double alpha, std::size_t n, double threshold) {
  validate_alpha(alpha);
  require(n >= 1, Errc::invalid_argument, "n must be at least 1");
  require(has_exact_gaps(model), Errc::invalid_argument, "model has no closed-form gap law");
  if (detail::identically_distributed(model)) return *gap_tail_moment(model, 1, alpha, threshold);
  double sum = 0.0;
  for (std::size_t i = 1; i <= n; ++i) sum += *gap_tail_moment(model, i, alpha, threshold);
  return sum / static_cast<double>(n);
}

/// Realized corrected sum: (1/n) sum |x_i - y_i|^alpha 1(|x_i - y_i| > b n^delta).
inline double lindeberg_sum_corrected(const PairSample& pairs, double b) {
  detail::require_positive_b(b);
  return detail::realized_tail_mean(pairs, corrected_threshold(pairs.alpha(), pairs.size(), b));
}

/// Exact corrected sum for n pairs of `model`.
inline double lindeberg_sum_corrected(const PairModel& model, double alpha, std::size_t n, double b) {
  detail::require_positive_b(b);
  return exact_tail_mean(model, alpha, n, corrected_threshold(alpha, n, b));
}

/// Original fixed-threshold sum (1/n) sum |x_i - y_i|^alpha 1(|x_i - y_i| > b).
inline double lindeberg_sum_original(const PairSample& pairs, double b) {
  detail::require_positive_b(b);
  return detail::realized_tail_mean(pairs, b);
}

inline double lindeberg_sum_original(const PairModel& model, double alpha, std::size_t n, double b) {
  detail::require_positive_b(b);
  return exact_tail_mean(model, alpha, n, b);
}

struct TruncationSplit {
  std::vector<double> u;
  std::vector<double> v;
  double threshold = 0.0;
};

/// u_i = g_i 1(|g_i| <= b n^delta), v_i = g_i 1(|g_i| > b n^delta).
inline TruncationSplit truncation_split(const PairSample& pairs, double b) {
  detail::require_positive_b(b);
  require(pairs.size() >= 1, Errc::invalid_argument, "empty pair sample");
  TruncationSplit split{std::vector<double>(pairs.size(), 0.0), std::vector<double>(pairs.size(), 0.0),
                        corrected_threshold(pairs.alpha(), pairs.size(), b)};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double g = pairs.pairs[i].gap();
    (std::abs(g) > split.threshold ? split.v[i] : split.u[i]) = g;
  }
  return split;
}

struct LindebergRow {
  double b = 0.0;
  double corrected = 0.0;  // L2: threshold b n^delta
  double original = 0.0;   // L1: threshold b
};

struct LindebergReport {
  std::size_t n = 0;
  double alpha = 0.0;
  std::vector<LindebergRow> rows;
};

inline LindebergReport lindeberg_report(const PairSample& pairs, std::span<const double> b_grid) {
  require(!b_grid.empty(), Errc::empty_grid, "b grid is empty");
  LindebergReport report{pairs.size(), pairs.alpha(), {}};
  for (double b : b_grid) {
    report.rows.push_back({b, lindeberg_sum_corrected(pairs, b), lindeberg_sum_original(pairs, b)});
  }
  return report;
}

inline LindebergReport lindeberg_report(const PairModel& model, double alpha, std::size_t n,
                                        std::span<const double> b_grid) {
  require(!b_grid.empty(), Errc::empty_grid, "b grid is empty");
  LindebergReport report{n, alpha, {}};
  for (double b : b_grid) {
    report.rows.push_back(
        {b, lindeberg_sum_corrected(model, alpha, n, b), lindeberg_sum_original(model, alpha, n, b)});
  }
  return report;
}

/// Per-b supremum of both sums over an n-ladder of reports sharing one b grid.
inline std::vector<LindebergRow> sup_over_ladder(std::span<const LindebergReport> reports) {
  require(!reports.empty(), Errc::empty_grid, "no reports");
  std::vector<LindebergRow> sup = reports.front().rows;
  for (const auto& r : reports.subspan(1)) {
    require(r.rows.size() == sup.size(), Errc::size_mismatch, "reports use different b grids");
    for (std::size_t k = 0; k < sup.size(); ++k) {
      sup[k].corrected = std::max(sup[k].corrected, r.rows[k].corrected);
      sup[k].original = std::max(sup[k].original, r.rows[k].original);
    }
  }
  return sup;
}

}  // namespace mallows
