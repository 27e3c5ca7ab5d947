#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "mallows/error.hpp"
#include "mallows/random.hpp"

namespace mallows {

/// Parameters of S_alpha(sigma, beta, mu) in the Samorodnitsky-Taqqu
/// parameterization: index, scale, skewness and shift. With this convention
/// the mean is mu whenever alpha > 1.
struct StableParams {
  double alpha = 1.5;
  double sigma = 1.0;
  double beta = 0.0;
  double mu = 0.0;

  friend bool operator==(const StableParams&, const StableParams&) = default;
};

/// Indices within this distance of 1 take the alpha = 1 branch everywhere.
inline constexpr double kUnitAlphaTolerance = 1e-9;

inline bool is_unit_alpha(double alpha) noexcept {
  return std::abs(alpha - 1.0) < kUnitAlphaTolerance;
}

inline void validate_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) {
    fail(Errc::alpha_out_of_range, "alpha = " + std::to_string(alpha) + ", need 0 < alpha < 2");
  }
}

inline const StableParams& validate(const StableParams& params) {
  validate_alpha(params.alpha);
  if (!(params.sigma >= 0.0) || !std::isfinite(params.sigma)) {
    fail(Errc::sigma_negative, "sigma = " + std::to_string(params.sigma));
  }
  if (!(params.beta >= -1.0 && params.beta <= 1.0)) {
    fail(Errc::beta_out_of_range, "beta = " + std::to_string(params.beta));
  }
  if (!std::isfinite(params.mu)) fail(Errc::invalid_argument, "mu must be finite");
  return params;
}

namespace detail {

// Chambers-Mallows-Stuck with V ~ U(-pi/2, pi/2), W ~ Exp(1).
inline double cms_standard(double alpha, double beta, double v, double w) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (is_unit_alpha(alpha)) {
    const double skew = half_pi + beta * v;
    return (skew * std::tan(v) - beta * std::log(half_pi * w * std::cos(v) / skew)) / half_pi;
  }
  const double t = beta * std::tan(half_pi * alpha);
  const double b = std::atan(t) / alpha;
  const double s = std::pow(1.0 + t * t, 1.0 / (2.0 * alpha));
  const double av = alpha * (v + b);
  return s * std::sin(av) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos(v - av) / w, (1.0 - alpha) / alpha);
}

}  // namespace detail

/// One draw of S_alpha(sigma, beta, mu). Params are assumed validated.
template <class Generator>
double draw(const StableParams& p, Generator& rng) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  double v = 0.0;
  double w = 0.0;
  // CMS is singular at the ends of the V range; resample on the measure-zero
  // event that the transform overflows.
  for (;;) {
    v = rng.uniform(-half_pi, half_pi);
    w = rng.exponential();
    const double z = detail::cms_standard(p.alpha, p.beta, v, w);
    if (std::isfinite(z)) {
      if (is_unit_alpha(p.alpha)) {
        const double log_sigma = p.sigma > 0.0 ? std::log(p.sigma) : 0.0;
        return p.sigma * z + p.beta * p.sigma * log_sigma / half_pi + p.mu;
      }
      return p.sigma * z + p.mu;
    }
  }
}

/// `count` i.i.d. draws, a pure function of (params, count, seed).
inline std::vector<double> sample(const StableParams& params, std::size_t count, std::uint64_t seed) {
  validate(params);
  require(count >= 1, Errc::invalid_argument, "count must be at least 1");
  Rng rng(seed);
  std::vector<double> out(count);
  for (auto& x : out) x = draw(params, rng);
  return out;
}

/// Shift s(n) with n^{-1/alpha} (Y_1 + ... + Y_n) equal in law to Y + s(n).
/// Accepts real n >= 1; the closed form is analytic in n.
inline double sum_shift(const StableParams& params, double n) {
  validate(params);
  require(n >= 1.0, Errc::invalid_argument, "n must be at least 1");
  const double nn = n;
  if (is_unit_alpha(params.alpha)) {
    return 2.0 / std::numbers::pi * params.sigma * params.beta * std::log(nn);
  }
  return params.mu * std::expm1((1.0 - 1.0 / params.alpha) * std::log(nn));
}

}  // namespace mallows
