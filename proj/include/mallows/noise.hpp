#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <variant>

#include "mallows/error.hpp"
#include "mallows/random.hpp"
#include "mallows/stable_law.hpp"
#include "mallows/transport.hpp"

namespace mallows {

struct PointMass {
  double value = 0.0;
};

struct UniformNoise {
  double lo = -1.0;
  double hi = 1.0;
};

/// |e| is Pareto(scale, tail_index); the sign is + with probability p_positive.
/// E|e|^p is finite exactly when p < tail_index.
struct TwoSidedPareto {
  double scale = 1.0;
  double tail_index = 3.0;
  double p_positive = 0.5;
};

/// Law of a coupling gap X - Y. All but the stable case have closed-form
/// truncated moments.
using NoiseLaw = std::variant<PointMass, UniformNoise, TwoSidedPareto, DiscreteLaw, StableParams>;

inline void validate(const NoiseLaw& law) {
  std::visit(
      [](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          require(std::isfinite(l.value), Errc::invalid_law, "point mass must be finite");
        } else if constexpr (std::is_same_v<T, UniformNoise>) {
          require(std::isfinite(l.lo) && std::isfinite(l.hi) && l.lo < l.hi, Errc::invalid_law,
                  "uniform noise needs finite lo < hi");
        } else if constexpr (std::is_same_v<T, TwoSidedPareto>) {
          require(l.scale > 0.0 && std::isfinite(l.scale), Errc::invalid_law, "pareto scale must be positive");
          require(l.tail_index > 0.0 && std::isfinite(l.tail_index), Errc::invalid_law,
                  "pareto tail index must be positive");
          require(l.p_positive >= 0.0 && l.p_positive <= 1.0, Errc::invalid_law,
                  "pareto p_positive must lie in [0,1]");
        } else if constexpr (std::is_same_v<T, StableParams>) {
          validate(l);
        }
      },
      law);
}

template <class Generator>
double draw(const DiscreteLaw& law, Generator& rng) {
  const double u = rng.uniform_open();
  double acc = 0.0;
  for (const auto& a : law.atoms()) {
    acc += a.probability;
    if (u < acc) return a.location;
  }
  return law.atoms().back().location;
}

template <class Generator>
double draw(const NoiseLaw& law, Generator& rng) {
  return std::visit(
      [&rng](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          return l.value;
        } else if constexpr (std::is_same_v<T, UniformNoise>) {
          return rng.uniform(l.lo, l.hi);
        } else if constexpr (std::is_same_v<T, TwoSidedPareto>) {
          const double magnitude = l.scale * std::pow(rng.uniform_open(), -1.0 / l.tail_index);
          return rng.uniform_open() < l.p_positive ? magnitude : -magnitude;
        } else {
          return draw(l, rng);
        }
      },
      law);
}

inline std::optional<double> mean(const NoiseLaw& law) {
  return std::visit(
      [](const auto& l) -> std::optional<double> {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          return l.value;
        } else if constexpr (std::is_same_v<T, UniformNoise>) {
          return 0.5 * (l.lo + l.hi);
        } else if constexpr (std::is_same_v<T, TwoSidedPareto>) {
          if (l.tail_index <= 1.0) return std::nullopt;
          return (2.0 * l.p_positive - 1.0) * l.tail_index * l.scale / (l.tail_index - 1.0);
        } else if constexpr (std::is_same_v<T, DiscreteLaw>) {
          return l.mean();
        } else {
          if (l.alpha <= 1.0 || is_unit_alpha(l.alpha)) return std::nullopt;
          return l.mu;
        }
      },
      law);
}

namespace detail {

// Integral of |x|^p over [a, b], a <= b.
inline double abs_power_integral(double a, double b, double p) {
  auto antiderivative = [p](double x) { return std::copysign(std::pow(std::abs(x), p + 1.0), x) / (p + 1.0); };
  return antiderivative(b) - antiderivative(a);
}

}  // namespace detail

/// E{|e|^p 1(|e| > t)} for t >= 0; +inf when the moment diverges; nullopt
/// when no closed form is available.
inline std::optional<double> tail_abs_moment(const NoiseLaw& law, double p, double t) {
  return std::visit(
      [p, t](const auto& l) -> std::optional<double> {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          return std::abs(l.value) > t ? std::pow(std::abs(l.value), p) : 0.0;
        } else if constexpr (std::is_same_v<T, UniformNoise>) {
          double total = 0.0;
          if (l.lo < -t) total += detail::abs_power_integral(l.lo, std::min(l.hi, -t), p);
          if (l.hi > t) total += detail::abs_power_integral(std::max(l.lo, t), l.hi, p);
          return total / (l.hi - l.lo);
        } else if constexpr (std::is_same_v<T, TwoSidedPareto>) {
          if (l.tail_index <= p) return std::numeric_limits<double>::infinity();
          const double from = std::max(t, l.scale);
          return l.tail_index * std::pow(l.scale, l.tail_index) * std::pow(from, p - l.tail_index) /
                 (l.tail_index - p);
        } else if constexpr (std::is_same_v<T, DiscreteLaw>) {
          double total = 0.0;
          for (const auto& a : l.atoms()) {
            if (std::abs(a.location) > t) total += a.probability * std::pow(std::abs(a.location), p);
          }
          return total;
        } else {
          return std::nullopt;
        }
      },
      law);
}

/// E{e^k 1(|e| <= t)} for k in {1, 2}.
inline std::optional<double> truncated_moment(const NoiseLaw& law, int k, double t) {
  require(k == 1 || k == 2, Errc::invalid_argument, "truncated moment order must be 1 or 2");
  return std::visit(
      [k, t](const auto& l) -> std::optional<double> {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          return std::abs(l.value) <= t ? std::pow(l.value, k) : 0.0;
        } else if constexpr (std::is_same_v<T, UniformNoise>) {
          const double a = std::max(l.lo, -t);
          const double b = std::min(l.hi, t);
          if (a >= b) return 0.0;
          const double kk = static_cast<double>(k);
          return (std::pow(b, kk + 1.0) - std::pow(a, kk + 1.0)) / ((kk + 1.0) * (l.hi - l.lo));
        } else if constexpr (std::is_same_v<T, TwoSidedPareto>) {
          if (t <= l.scale) return 0.0;
          const double kk = static_cast<double>(k);
          const double c = l.tail_index * std::pow(l.scale, l.tail_index);
          const double magnitude =
              kk == l.tail_index
                  ? c * std::log(t / l.scale)
                  : c * (std::pow(t, kk - l.tail_index) - std::pow(l.scale, kk - l.tail_index)) / (kk - l.tail_index);
          return k == 1 ? (2.0 * l.p_positive - 1.0) * magnitude : magnitude;
        } else if constexpr (std::is_same_v<T, DiscreteLaw>) {
          double total = 0.0;
          for (const auto& a : l.atoms()) {
            if (std::abs(a.location) <= t) total += a.probability * std::pow(a.location, k);
          }
          return total;
        } else {
          return std::nullopt;
        }
      },
      law);
}

}  // namespace mallows
