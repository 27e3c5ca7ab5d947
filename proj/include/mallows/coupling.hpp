#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mallows/error.hpp"
#include "mallows/noise.hpp"
#include "mallows/random.hpp"
#include "mallows/stable_law.hpp"
#include "mallows/transport.hpp"

namespace mallows {

/// X_i = Y_i + i^{index_exponent} * e_i with e_i drawn from `noise`
/// independently of Y_i (i is 1-based).
struct AdditiveNoise {
  NoiseLaw noise = PointMass{};
  double index_exponent = 0.0;
};

/// X_i = scale * Y_i + shift with scale >= 0: the comonotone coupling of Y
/// with the law whose quantile function is scale * F_Y^{-1} + shift.
struct Comonotone {
  double scale = 1.0;
  double shift = 0.0;
};

/// X_i = Y_i + G_i with G_i drawn from laws[i - 1]; the last law repeats
/// for indices past the end of the table.
struct CustomGaps {
  std::vector<DiscreteLaw> laws;

  const DiscreteLaw& law(std::size_t i) const { return laws[std::min(i, laws.size()) - 1]; }
};

using PairModel = std::variant<AdditiveNoise, Comonotone, CustomGaps>;

inline void validate(const PairModel& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AdditiveNoise>) {
          validate(m.noise);
          require(std::isfinite(m.index_exponent), Errc::invalid_argument, "index exponent must be finite");
        } else if constexpr (std::is_same_v<T, Comonotone>) {
          require(m.scale >= 0.0 && std::isfinite(m.scale), Errc::invalid_argument,
                  "comonotone scale must be nonnegative");
          require(std::isfinite(m.shift), Errc::invalid_argument, "comonotone shift must be finite");
        } else {
          require(!m.laws.empty(), Errc::invalid_law, "custom model needs at least one gap law");
        }
      },
      model);
}

struct Pair {
  double x = 0.0;
  double y = 0.0;

  double gap() const noexcept { return x - y; }
};

/// Realized pairs (X_1, Y_1), ..., (X_n, Y_n) with Y_i ~ y_params.
struct PairSample {
  std::vector<Pair> pairs;
  StableParams y_params;

  double alpha() const noexcept { return y_params.alpha; }
  std::size_t size() const noexcept { return pairs.size(); }

  std::vector<double> gaps() const {
    std::vector<double> g(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) g[i] = pairs[i].gap();
    return g;
  }
  std::vector<double> xs() const {
    std::vector<double> v(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) v[i] = pairs[i].x;
    return v;
  }
  std::vector<double> ys() const {
    std::vector<double> v(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) v[i] = pairs[i].y;
    return v;
  }
};

/// Draws pair i (1-based) from its own substream; params assumed validated.
template <class Generator>
Pair draw_pair(const PairModel& model, const StableParams& params, std::size_t i, Generator& rng) {
  const double y = draw(params, rng);
  const double x = std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AdditiveNoise>) {
          const double e = draw(m.noise, rng);
          return m.index_exponent == 0.0 ? y + e : y + std::pow(static_cast<double>(i), m.index_exponent) * e;
        } else if constexpr (std::is_same_v<T, Comonotone>) {
          return m.scale * y + m.shift;
        } else {
          return y + draw(m.law(i), rng);
        }
      },
      model);
  return {x, y};
}

inline Pair pair_at(const PairModel& model, const StableParams& params, std::size_t i, std::uint64_t seed) {
  Rng rng(derive_seed(seed, i));
  return draw_pair(model, params, i, rng);
}

/// n independent pairs, pair i drawn from substream derive_seed(seed, i).
inline PairSample generate(const PairModel& model, const StableParams& params, std::size_t n, std::uint64_t seed) {
  validate(params);
  validate(model);
  require(n >= 1, Errc::invalid_argument, "n must be at least 1");
  PairSample out{std::vector<Pair>(n), params};
  for (std::size_t i = 1; i <= n; ++i) out.pairs[i - 1] = pair_at(model, params, i, seed);
  return out;
}

/// Quantile function u -> F_X^{-1}(u) on (0,1).
struct QuantileFunction {
  std::function<double(double)> at;
};

/// x = g(F_Y^{-1}(u)) for a nondecreasing g.
struct TransformOfY {
  std::function<double(double)> g;
};

using XQuantile = std::variant<QuantileFunction, TransformOfY>;

/// Comonotone pairs on the midpoint grid u_k = (k - 1/2)/m. F_Y^{-1} is the
/// empirical quantile of m stable draws, whose k-th order statistic is the
/// value at u_k; both coordinates come out sorted.
inline PairSample comonotone_pairs(const XQuantile& qf_x, const StableParams& params_y, std::size_t m,
                                   std::uint64_t seed) {
  validate(params_y);
  require(m >= 1, Errc::invalid_argument, "grid size must be at least 1");
  const EmpiricalDistribution qy(sample(params_y, m, seed));
  PairSample out{std::vector<Pair>(m), params_y};
  for (std::size_t k = 0; k < m; ++k) {
    const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(m);
    const double y = qy[k];
    const double x = std::visit(
        [&](const auto& q) -> double {
          if constexpr (std::is_same_v<std::decay_t<decltype(q)>, QuantileFunction>) {
            return q.at(u);
          } else {
            return q.g(y);
          }
        },
        qf_x);
    require(std::isfinite(x), Errc::invalid_argument, "quantile function returned a non-finite value");
    if (k > 0 && x < out.pairs[k - 1].x) {
      fail(Errc::not_monotone, "decreases between u = " + std::to_string(u - 1.0 / static_cast<double>(m)) +
                                   " and u = " + std::to_string(u));
    }
    out.pairs[k] = {x, y};
  }
  return out;
}

// Exact per-index gap moments. nullopt means the model has no closed form
// for that quantity (stable noise, comonotone with scale != 1).

inline std::optional<NoiseLaw> gap_law(const PairModel& model, std::size_t i) {
  return std::visit(
      [i](const auto& m) -> std::optional<NoiseLaw> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AdditiveNoise>) {
          if (m.index_exponent != 0.0) return std::nullopt;
          return m.noise;
        } else if constexpr (std::is_same_v<T, Comonotone>) {
          if (m.scale != 1.0) return std::nullopt;
          return PointMass{m.shift};
        } else {
          return m.law(i);
        }
      },
      model);
}

namespace detail {

inline double index_scale(const PairModel& model, std::size_t i) {
  if (const auto* a = std::get_if<AdditiveNoise>(&model); a && a->index_exponent != 0.0) {
    return std::pow(static_cast<double>(i), a->index_exponent);
  }
  return 1.0;
}

inline std::optional<NoiseLaw> base_gap_law(const PairModel& model, std::size_t i) {
  if (const auto* a = std::get_if<AdditiveNoise>(&model)) return a->noise;
  return gap_law(model, i);
}

}  // namespace detail

/// E{|G_i|^p 1(|G_i| > t)}.
inline std::optional<double> gap_tail_moment(const PairModel& model, std::size_t i, double p, double t) {
  const auto law = detail::base_gap_law(model, i);
  if (!law) return std::nullopt;
  const double s = detail::index_scale(model, i);
  const auto base = tail_abs_moment(*law, p, t / s);
  if (!base) return std::nullopt;
  return std::pow(s, p) * *base;
}

/// E{G_i^k 1(|G_i| <= t)}, k in {1, 2}.
inline std::optional<double> gap_truncated_moment(const PairModel& model, std::size_t i, int k, double t) {
  const auto law = detail::base_gap_law(model, i);
  if (!law) return std::nullopt;
  const double s = detail::index_scale(model, i);
  const auto base = truncated_moment(*law, k, t / s);
  if (!base) return std::nullopt;
  return std::pow(s, k) * *base;
}

/// E X_i, when available.
inline std::optional<double> mean_x(const PairModel& model, const StableParams& params, std::size_t i) {
  const bool finite_mean = params.alpha > 1.0 && !is_unit_alpha(params.alpha);
  return std::visit(
      [&](const auto& m) -> std::optional<double> {
        using T = std::decay_t<decltype(m)>;
        if (!finite_mean) return std::nullopt;
        if constexpr (std::is_same_v<T, AdditiveNoise>) {
          const auto e = mean(m.noise);
          if (!e) return std::nullopt;
          return params.mu + detail::index_scale(model, i) * *e;
        } else if constexpr (std::is_same_v<T, Comonotone>) {
          return m.scale * params.mu + m.shift;
        } else {
          return params.mu + m.law(i).mean();
        }
      },
      model);
}

inline bool has_exact_gaps(const PairModel& model) {
  return detail::base_gap_law(model, 1).has_value() &&
         gap_tail_moment(model, 1, 1.0, 0.0).has_value();
}

}  // namespace mallows
