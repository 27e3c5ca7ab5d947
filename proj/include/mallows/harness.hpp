#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "mallows/coupling.hpp"
#include "mallows/error.hpp"
#include "mallows/lindeberg.hpp"
#include "mallows/random.hpp"
#include "mallows/stable_law.hpp"
#include "mallows/stats.hpp"
#include "mallows/transport.hpp"

namespace mallows {

enum class AlphaCase { sub, one, super };

inline AlphaCase alpha_case(double alpha) {
  validate_alpha(alpha);
  if (is_unit_alpha(alpha)) return AlphaCase::one;
  return alpha < 1.0 ? AlphaCase::sub : AlphaCase::super;
}

inline const char* to_string(AlphaCase c) {
  switch (c) {
    case AlphaCase::sub: return "sub";
    case AlphaCase::one: return "one";
    case AlphaCase::super: return "super";
  }
  return "?";
}

enum class LindebergMode { automatic, exact, monte_carlo };
enum class ReferenceMode { coupled, independent };

/// n^{-1/alpha} sum X_i - c_n is compared against Y. With the coupled
/// reference, Y is realized as n^{-1/alpha} sum Y_i - s(n) from the same
/// replicate (equal in law to Y); the independent reference draws Y directly.
struct ExperimentConfig {
  PairModel model = AdditiveNoise{};
  StableParams stable{};
  std::vector<std::size_t> n_ladder{100, 1000, 10000};
  std::vector<double> b_grid{0.25, 0.5, 1.0, 2.0};
  double b = 1.0;  // super case row threshold
  std::vector<double> bn_grid;  // sub/one case candidates, decreasing
  std::size_t replicates = 5;   // median-of-means blocks
  std::size_t samples_per_distance = 1000;
  std::size_t prepass_replicates = 64;
  LindebergMode lindeberg_mode = LindebergMode::automatic;
  ReferenceMode reference = ReferenceMode::coupled;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  double alpha() const noexcept { return stable.alpha; }
};

inline std::vector<double> default_bn_grid() {
  std::vector<double> grid;
  for (int k = 3; k >= -24; --k) grid.push_back(std::ldexp(1.0, k));
  return grid;
}

inline const std::vector<double>& bn_grid_of(const ExperimentConfig& config) {
  static const std::vector<double> fallback = default_bn_grid();
  return config.bn_grid.empty() ? fallback : config.bn_grid;
}

inline void validate(const ExperimentConfig& config) {
  validate(config.stable);
  validate(config.model);
  require(!config.n_ladder.empty(), Errc::config, "n_ladder is empty");
  for (std::size_t k = 0; k < config.n_ladder.size(); ++k) {
    require(config.n_ladder[k] >= 1, Errc::config, "n_ladder entries must be positive");
    if (k > 0) require(config.n_ladder[k - 1] < config.n_ladder[k], Errc::config, "n_ladder must be strictly increasing");
  }
  for (double b : config.b_grid) require(b > 0.0 && std::isfinite(b), Errc::config, "b_grid entries must be positive");
  require(config.b > 0.0 && std::isfinite(config.b), Errc::config, "b must be positive");
  const auto& bn = bn_grid_of(config);
  for (std::size_t k = 0; k < bn.size(); ++k) {
    require(bn[k] > 0.0, Errc::config, "bn_grid entries must be positive");
    if (k > 0) require(bn[k] < bn[k - 1], Errc::config, "bn_grid must be strictly decreasing");
  }
  require(config.replicates >= 1, Errc::config, "replicates must be at least 1");
  require(config.samples_per_distance >= 1, Errc::config, "samples_per_distance must be at least 1");
  require(config.prepass_replicates >= 2, Errc::config, "prepass_replicates must be at least 2");
}

namespace detail {

enum SeedTag : std::uint64_t { kPrepass = 1, kReplicate = 2, kNoiseFloor = 3, kAnchors = 4, kVbe = 5 };

/// Runs body(k) for k in [0, count) on up to `threads` workers. Results must
/// be written by index, which keeps the outcome independent of scheduling.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(count, threads == 0 ? hw : threads));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t k = w; k < count; k += workers) body(k);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

inline double inv_root_n(double alpha, std::size_t n) {
  return std::pow(static_cast<double>(n), -1.0 / alpha);
}

}  // namespace detail

/// Distributional summaries of the gaps G_i = X_i - Y_i for a fixed n,
/// exact from closed-form gap laws or Monte Carlo over `replicates`
/// realizations of all n pairs.
class GapStatistics {
 public:
  GapStatistics(const PairModel& model, const StableParams& params, std::size_t n, LindebergMode mode,
                std::size_t replicates, std::uint64_t seed)
      : model_(&model), alpha_(params.alpha), n_(n) {
    require(n >= 1, Errc::invalid_argument, "n must be at least 1");
    const bool closed_form = has_exact_gaps(model);
    if (mode == LindebergMode::exact) {
      require(closed_form, Errc::invalid_argument, "exact mode requested but the model has no closed-form gap law");
    }
    exact_ = closed_form && mode != LindebergMode::monte_carlo;
    if (!exact_) {
      require(replicates >= 2, Errc::invalid_argument, "need at least two Monte Carlo replicates");
      gaps_.resize(replicates);
      for (std::size_t r = 0; r < replicates; ++r) {
        gaps_[r] = generate(model, params, n, derive_seed(seed, r)).gaps();
      }
    }
  }

  bool exact() const noexcept { return exact_; }
  std::size_t n() const noexcept { return n_; }

  /// (1/n) sum_i E{|G_i|^alpha 1(|G_i| > threshold)}.
  double tail_mean(double threshold) const {
    if (exact_) return exact_tail_mean(*model_, alpha_, n_, threshold);
    std::vector<double> per(gaps_.size());
    for (std::size_t r = 0; r < gaps_.size(); ++r) {
      double s = 0.0;
      for (double g : gaps_[r]) {
        if (std::abs(g) > threshold) s += std::pow(std::abs(g), alpha_);
      }
      per[r] = s / static_cast<double>(n_);
    }
    return stats::mean(per);
  }

  /// sum_i E{G_i 1(|G_i| <= threshold)} with its Monte Carlo standard error.
  stats::RobustEstimate truncated_mean_sum(double threshold) const {
    if (exact_) return {exact_sum(1, threshold), 0.0};
    const auto per = truncated_sums(threshold);
    return {stats::mean(per), stats::stddev(per) / std::sqrt(static_cast<double>(per.size()))};
  }

  /// sum_i Var U_i with U_i = G_i 1(|G_i| <= threshold).
  double truncated_variance_sum(double threshold) const {
    if (exact_) {
      double total = 0.0;
      for (std::size_t i = 1; i <= (identical() ? 1 : n_); ++i) {
        const double m1 = *gap_truncated_moment(*model_, i, 1, threshold);
        const double m2 = *gap_truncated_moment(*model_, i, 2, threshold);
        total += std::max(0.0, m2 - m1 * m1);
      }
      return identical() ? total * static_cast<double>(n_) : total;
    }
    // Independence across i: Var(sum U_i) = sum Var U_i.
    const auto per = truncated_sums(threshold);
    const double sd = stats::stddev(per);
    return sd * sd;
  }

 private:
  bool identical() const { return detail::identically_distributed(*model_); }

  double exact_sum(int k, double threshold) const {
    if (identical()) return static_cast<double>(n_) * *gap_truncated_moment(*model_, 1, k, threshold);
    double total = 0.0;
    for (std::size_t i = 1; i <= n_; ++i) total += *gap_truncated_moment(*model_, i, k, threshold);
    return total;
  }

  std::vector<double> truncated_sums(double threshold) const {
    std::vector<double> per(gaps_.size());
    for (std::size_t r = 0; r < gaps_.size(); ++r) {
      double s = 0.0;
      for (double g : gaps_[r]) {
        if (std::abs(g) <= threshold) s += g;
      }
      per[r] = s;
    }
    return per;
  }

  const PairModel* model_;
  double alpha_;
  std::size_t n_;
  bool exact_ = false;
  std::vector<std::vector<double>> gaps_;
};

struct CenteringSpec {
  AlphaCase alpha_case = AlphaCase::super;
  double c_n = 0.0;
  double mean_term = 0.0;     // super: n^{-1/a} sum E X_i - E Y; sub/one: truncated-mean term
  double stable_shift = 0.0;  // 0 in the super case
  double mean_term_se = 0.0;  // nonzero only for Monte Carlo truncated means
};

/// c_n from gap statistics already computed for this n.
inline CenteringSpec centering(const PairModel& model, const StableParams& params, std::size_t n,
                               std::optional<double> b_n, const GapStatistics& gap_stats) {
  validate(params);
  require(n >= 1, Errc::invalid_argument, "n must be at least 1");
  CenteringSpec spec;
  spec.alpha_case = alpha_case(params.alpha);
  const double scale = detail::inv_root_n(params.alpha, n);
  if (spec.alpha_case == AlphaCase::super) {
    double sum = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      const auto m = mean_x(model, params, i);
      if (!m) fail(Errc::mean_unavailable, "E X_" + std::to_string(i) + " is not available for this model");
      sum += *m;
    }
    spec.mean_term = scale * sum - params.mu;
    spec.stable_shift = 0.0;
  } else {
    if (!b_n || !(*b_n > 0.0)) fail(Errc::missing_bn, "alpha <= 1 needs a positive b_n");
    const auto truncated = gap_stats.truncated_mean_sum(corrected_threshold(params.alpha, n, *b_n));
    spec.mean_term = scale * truncated.estimate;
    spec.mean_term_se = scale * truncated.se;
    spec.stable_shift = sum_shift(params, static_cast<double>(n));
  }
  spec.c_n = spec.mean_term + spec.stable_shift;
  return spec;
}

/// c_n, building the gap statistics (exact when possible, otherwise a
/// Monte Carlo pre-pass of `prepass` realizations keyed by `seed`).
inline CenteringSpec centering(const PairModel& model, const StableParams& params, std::size_t n,
                               std::optional<double> b_n, std::size_t prepass = 64, std::uint64_t seed = 0) {
  validate(model);
  const GapStatistics gap_stats(model, params, n, LindebergMode::automatic, prepass, seed);
  return centering(model, params, n, b_n, gap_stats);
}

struct BnChoice {
  double b_n = 0.0;
  double lindeberg = 0.0;
  bool qualified = false;  // false: no grid value balanced, largest returned
};

/// Smallest grid value b with L_n(b) <= b^alpha.
inline BnChoice select_bn(const GapStatistics& gap_stats, double alpha, std::span<const double> grid) {
  require(!grid.empty(), Errc::empty_grid, "b_n grid is empty");
  validate_alpha(alpha);
  std::optional<BnChoice> best;
  for (double b : grid) {
    require(b > 0.0, Errc::invalid_argument, "grid values must be positive");
    const double l = gap_stats.tail_mean(corrected_threshold(alpha, gap_stats.n(), b));
    if (l <= std::pow(b, alpha) && (!best || b < best->b_n)) best = BnChoice{b, l, true};
  }
  if (best) return *best;
  const double largest = *std::max_element(grid.begin(), grid.end());
  return {largest, gap_stats.tail_mean(corrected_threshold(alpha, gap_stats.n(), largest)), false};
}

inline BnChoice select_bn(const PairModel& model, const StableParams& params, std::size_t n,
                          std::span<const double> grid, std::size_t prepass = 64, std::uint64_t seed = 0) {
  require(params.alpha <= 1.0 || is_unit_alpha(params.alpha), Errc::invalid_argument,
          "b_n selection applies to alpha <= 1");
  validate(model);
  const GapStatistics gap_stats(model, params, n, LindebergMode::automatic, prepass, seed);
  return select_bn(gap_stats, params.alpha, grid);
}

struct ConvergenceRow {
  std::size_t n = 0;
  double b_used = 0.0;
  double c_n = 0.0;
  double d_cost_hat = 0.0;
  double lindeberg = 0.0;
  double bound_rhs = 0.0;
  std::size_t replicates = 0;
  double se = 0.0;
};

/// Right-hand side of the final inequality: 2^{a-1} b^a + 2^{2a} L for
/// 1 < a < 2 and b^a + L for a <= 1.
inline double bound_rhs(AlphaCase c, double alpha, double b, double lindeberg) {
  if (c == AlphaCase::super) {
    return std::pow(2.0, alpha - 1.0) * std::pow(b, alpha) + std::pow(2.0, 2.0 * alpha) * lindeberg;
  }
  return std::pow(b, alpha) + lindeberg;
}

namespace detail {

struct Realizations {
  std::vector<double> centered;   // S_n - c_n
  std::vector<double> reference;  // Y
};

inline Realizations realize(const ExperimentConfig& config, std::size_t n, double c_n) {
  const std::size_t total = config.replicates * config.samples_per_distance;
  const double alpha = config.alpha();
  const double scale = inv_root_n(alpha, n);
  const double shift = sum_shift(config.stable, static_cast<double>(n));
  Realizations out{std::vector<double>(total), std::vector<double>(total)};
  parallel_for(total, config.threads, [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_seed(config.seed, kReplicate, n, r);
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      const Pair p = pair_at(config.model, config.stable, i, rep_seed);
      sx += p.x;
      sy += p.y;
    }
    out.centered[r] = scale * sx - c_n;
    out.reference[r] = scale * sy - shift;
  });
  if (config.reference == ReferenceMode::independent) {
    out.reference = sample(config.stable, total, derive_seed(config.seed, kReplicate, n, total));
  }
  for (std::size_t r = 0; r < total; ++r) {
    require(std::isfinite(out.centered[r]) && std::isfinite(out.reference[r]), Errc::numeric,
            "non-finite realization of S_n - c_n");
  }
  return out;
}

inline stats::RobustEstimate blocked_cost(std::span<const double> a, std::span<const double> b, double alpha,
                                          std::size_t blocks, std::size_t block_size) {
  std::vector<double> costs(blocks);
  for (std::size_t k = 0; k < blocks; ++k) {
    const auto lo = static_cast<std::ptrdiff_t>(k * block_size);
    const auto hi = lo + static_cast<std::ptrdiff_t>(block_size);
    const EmpiricalDistribution xs(std::vector<double>(a.begin() + lo, a.begin() + hi));
    const EmpiricalDistribution ys(std::vector<double>(b.begin() + lo, b.begin() + hi));
    costs[k] = mallows_empirical(xs, ys, alpha).cost;
  }
  return stats::median_of_blocks(costs);
}

}  // namespace detail

/// Convergence row at n with a given b (super) or b_n (sub/one).
inline ConvergenceRow estimate_distance_at(const ExperimentConfig& config, std::size_t n, double b,
                                           const GapStatistics& gap_stats) {
  require(config.replicates >= 5, Errc::config, "median-of-means needs at least 5 blocks");
  const double alpha = config.alpha();
  const AlphaCase c = alpha_case(alpha);
  const CenteringSpec spec = centering(config.model, config.stable, n, b, gap_stats);
  const auto data = detail::realize(config, n, spec.c_n);
  const auto cost = detail::blocked_cost(data.centered, data.reference, alpha, config.replicates,
                                         config.samples_per_distance);
  ConvergenceRow row;
  row.n = n;
  row.b_used = b;
  row.c_n = spec.c_n;
  row.d_cost_hat = cost.estimate;
  row.se = cost.se;
  row.lindeberg = gap_stats.tail_mean(corrected_threshold(alpha, n, b));
  row.bound_rhs = bound_rhs(c, alpha, b, row.lindeberg);
  row.replicates = config.replicates;
  return row;
}

inline GapStatistics gap_statistics(const ExperimentConfig& config, std::size_t n) {
  return GapStatistics(config.model, config.stable, n, config.lindeberg_mode, config.prepass_replicates,
                       derive_seed(config.seed, detail::kPrepass, n));
}

inline ConvergenceRow estimate_distance_at(const ExperimentConfig& config, std::size_t n, double b) {
  validate(config);
  return estimate_distance_at(config, n, b, gap_statistics(config, n));
}

/// Convergence row at n: b = config.b for 1 < alpha < 2, b_n from
/// select_bn over the configured grid otherwise.
inline ConvergenceRow estimate_distance(const ExperimentConfig& config, std::size_t n) {
  validate(config);
  const auto gap_stats = gap_statistics(config, n);
  double b = config.b;
  if (alpha_case(config.alpha()) != AlphaCase::super) {
    b = select_bn(gap_stats, config.alpha(), bn_grid_of(config)).b_n;
  }
  return estimate_distance_at(config, n, b, gap_stats);
}

inline std::vector<ConvergenceRow> run_experiment(const ExperimentConfig& config) {
  validate(config);
  std::vector<ConvergenceRow> rows;
  for (std::size_t n : config.n_ladder) rows.push_back(estimate_distance(config, n));
  return rows;
}

/// Plug-in cost between two independent direct samples of Y at the
/// configured sample size, aggregated like d_cost_hat.
inline stats::RobustEstimate noise_floor(const ExperimentConfig& config) {
  validate(config);
  const std::size_t total = config.replicates * config.samples_per_distance;
  const auto a = sample(config.stable, total, derive_seed(config.seed, detail::kNoiseFloor, 0));
  const auto b = sample(config.stable, total, derive_seed(config.seed, detail::kNoiseFloor, 1));
  return detail::blocked_cost(a, b, config.alpha(), config.replicates, config.samples_per_distance);
}

struct BoundReport {
  AlphaCase alpha_case = AlphaCase::super;
  std::size_t n = 0;
  double b = 0.0;
  double lhs = 0.0;  // d_cost_hat
  double se = 0.0;
  double rhs = 0.0;  // bound as displayed for this alpha case
  double rhs_with_constants = 0.0;  // 2^{a-1} b^a + 2^{2a} L regardless of case
  double margin = 0.0;
  double tolerance = 0.0;  // 3 se
  bool passed = false;
  double lindeberg = 0.0;

  // Variance anchor: sum Var U_i <= n (b n^delta)^2, so (sum Var U_i)^{a/2} <= b^a n.
  double variance_sum = 0.0;
  double lyapunov_bound = 0.0;
  double variance_cap = 0.0;
  double u_moment = 0.0;  // MC E|sum (U_i - E U_i)|^a

  // Moment anchor: E|sum (V_i - E V_i)|^a <= 2^{a+1} sum E|V_i|^a.
  double v_moment = 0.0;
  double v_moment_se = 0.0;
  double vbe_rhs = 0.0;
};

/// Compares lhs against the final inequality at (n, b) and evaluates both
/// intermediate anchors. For alpha <= 1, b plays the role of b_n.
inline BoundReport bound_check(const ExperimentConfig& config, std::size_t n, double b,
                               std::optional<ConvergenceRow> precomputed = std::nullopt) {
  validate(config);
  require(b > 0.0, Errc::invalid_argument, "b must be positive");
  const double alpha = config.alpha();
  const auto gap_stats = gap_statistics(config, n);
  ConvergenceRow row;
  if (precomputed && (alpha_case(alpha) == AlphaCase::super || precomputed->b_used == b)) {
    row = *precomputed;
  } else {
    row = estimate_distance_at(config, n, b, gap_stats);
  }

  BoundReport rep;
  rep.alpha_case = alpha_case(alpha);
  rep.n = n;
  rep.b = b;
  rep.lhs = row.d_cost_hat;
  rep.se = row.se;
  const double threshold = corrected_threshold(alpha, n, b);
  rep.lindeberg = gap_stats.tail_mean(threshold);
  rep.rhs = bound_rhs(rep.alpha_case, alpha, b, rep.lindeberg);
  rep.rhs_with_constants = bound_rhs(AlphaCase::super, alpha, b, rep.lindeberg);
  rep.tolerance = 3.0 * rep.se;
  rep.margin = rep.rhs - rep.lhs;
  rep.passed = rep.lhs <= rep.rhs + rep.tolerance;

  rep.variance_sum = gap_stats.truncated_variance_sum(threshold);
  rep.lyapunov_bound = std::pow(rep.variance_sum, alpha / 2.0);
  rep.variance_cap = std::pow(b, alpha) * static_cast<double>(n);

  // Anchors by Monte Carlo on dedicated realizations of all n gaps.
  const std::size_t k = config.prepass_replicates;
  std::vector<double> su(k), sv(k), av(k);
  detail::parallel_for(k, config.threads, [&](std::size_t r) {
    const auto gaps = generate(config.model, config.stable, n, derive_seed(config.seed, detail::kAnchors, n, r)).gaps();
    double u = 0.0, v = 0.0, a = 0.0;
    for (double g : gaps) {
      if (std::abs(g) > threshold) {
        v += g;
        a += std::pow(std::abs(g), alpha);
      } else {
        u += g;
      }
    }
    su[r] = u;
    sv[r] = v;
    av[r] = a;
  });
  const double mu_u = stats::mean(su);
  const double mu_v = stats::mean(sv);
  std::vector<double> cu(k), cv(k);
  for (std::size_t r = 0; r < k; ++r) {
    cu[r] = std::pow(std::abs(su[r] - mu_u), alpha);
    cv[r] = std::pow(std::abs(sv[r] - mu_v), alpha);
  }
  rep.u_moment = stats::mean(cu);
  rep.v_moment = stats::mean(cv);
  rep.v_moment_se = stats::stddev(cv) / std::sqrt(static_cast<double>(k));
  rep.vbe_rhs = std::pow(2.0, alpha + 1.0) * stats::mean(av);
  return rep;
}

struct VbeReport {
  double lhs = 0.0;  // MC E|sum (V_i - E V_i)|^a
  double se = 0.0;
  double rhs = 0.0;  // 2^{a+1} sum MC E|V_i|^a
  bool passed = false;
};

/// Moment inequality for the above-threshold parts V_i at threshold b n^delta,
/// both sides estimated from the same `realizations` draws of the n pairs.
inline VbeReport von_bahr_esseen_check(const PairModel& model, const StableParams& params, std::size_t n, double b,
                                       std::size_t realizations, std::uint64_t seed) {
  validate(params);
  validate(model);
  require(realizations >= 2, Errc::invalid_argument, "need at least two realizations");
  const double alpha = params.alpha;
  const double threshold = corrected_threshold(alpha, n, b);
  std::vector<std::vector<double>> v(realizations);
  for (std::size_t r = 0; r < realizations; ++r) {
    auto gaps = generate(model, params, n, derive_seed(seed, detail::kVbe, r)).gaps();
    for (auto& g : gaps) {
      if (std::abs(g) <= threshold) g = 0.0;
    }
    v[r] = std::move(gaps);
  }
  std::vector<double> mean_v(n, 0.0);
  double abs_sum = 0.0;
  for (const auto& row : v) {
    for (std::size_t i = 0; i < n; ++i) {
      mean_v[i] += row[i];
      abs_sum += std::pow(std::abs(row[i]), alpha);
    }
  }
  const double kk = static_cast<double>(realizations);
  for (auto& m : mean_v) m /= kk;
  std::vector<double> lhs(realizations);
  for (std::size_t r = 0; r < realizations; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[r][i] - mean_v[i];
    lhs[r] = std::pow(std::abs(s), alpha);
  }
  VbeReport rep;
  rep.lhs = stats::mean(lhs);
  rep.se = stats::stddev(lhs) / std::sqrt(kk);
  rep.rhs = std::pow(2.0, alpha + 1.0) * abs_sum / kk;
  rep.passed = rep.lhs <= rep.rhs + 3.0 * rep.se;
  return rep;
}

}  // namespace mallows
