#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mallows/error.hpp"
#include "mallows/stable_law.hpp"

namespace mallows {

/// A sample standing in for its distribution; stored sorted ascending.
class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(std::vector<double> values) : values_(std::move(values)) {
    require(!values_.empty(), Errc::invalid_argument, "empirical distribution needs at least one value");
    for (double v : values_) require(std::isfinite(v), Errc::invalid_argument, "non-finite sample value");
    std::sort(values_.begin(), values_.end());
  }

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Left-continuous inverse of the empirical CDF, u in (0, 1].
  double quantile(double u) const {
    require(u > 0.0 && u <= 1.0, Errc::invalid_argument, "quantile level must lie in (0,1]");
    const double m = static_cast<double>(values_.size());
    auto k = static_cast<std::size_t>(std::ceil(u * m));
    k = std::clamp<std::size_t>(k, 1, values_.size());
    return values_[k - 1];
  }

 private:
  std::vector<double> values_;
};

struct Atom {
  double location = 0.0;
  double probability = 0.0;
};

/// Finite law with strictly increasing locations and positive masses summing to 1.
class DiscreteLaw {
 public:
  static constexpr double kMassTolerance = 1e-12;

  explicit DiscreteLaw(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    require(!atoms_.empty(), Errc::invalid_law, "law needs at least one atom");
    double total = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const auto& a = atoms_[i];
      require(std::isfinite(a.location), Errc::invalid_law, "non-finite location");
      require(a.probability > 0.0, Errc::invalid_law, "atom probabilities must be positive");
      if (i > 0) {
        require(atoms_[i - 1].location < a.location, Errc::invalid_law,
                "locations must be strictly increasing");
      }
      total += a.probability;
    }
    require(std::abs(total - 1.0) <= kMassTolerance, Errc::invalid_law,
            "probabilities sum to " + std::to_string(total));
  }

  static DiscreteLaw point_mass(double location) { return DiscreteLaw({{location, 1.0}}); }

  /// Equal weights on the given locations; repeated locations accumulate mass.
  static DiscreteLaw uniform(std::vector<double> locations) {
    require(!locations.empty(), Errc::invalid_law, "law needs at least one atom");
    std::sort(locations.begin(), locations.end());
    const double w = 1.0 / static_cast<double>(locations.size());
    std::vector<Atom> atoms;
    std::size_t run = 0;
    for (std::size_t i = 0; i < locations.size(); ++i) {
      ++run;
      if (i + 1 == locations.size() || locations[i + 1] != locations[i]) {
        atoms.push_back({locations[i], static_cast<double>(run) * w});
        run = 0;
      }
    }
    return DiscreteLaw(normalized(std::move(atoms)));
  }

  static DiscreteLaw from(const EmpiricalDistribution& sample) {
    return uniform({sample.values().begin(), sample.values().end()});
  }

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }

  double mean() const {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.location * a.probability;
    return m;
  }

  friend bool operator==(const DiscreteLaw& a, const DiscreteLaw& b) {
    return std::equal(a.atoms_.begin(), a.atoms_.end(), b.atoms_.begin(), b.atoms_.end(),
                      [](const Atom& x, const Atom& y) {
                        return x.location == y.location && x.probability == y.probability;
                      });
  }

 private:
  static std::vector<Atom> normalized(std::vector<Atom> atoms) {
    double total = 0.0;
    for (const auto& a : atoms) total += a.probability;
    for (auto& a : atoms) a.probability /= total;
    return atoms;
  }

  std::vector<Atom> atoms_;
};

/// cost = d_alpha^alpha (the optimal E|X - Y|^alpha), root = cost^{1/alpha}.
struct DistanceEstimate {
  double alpha = 1.0;
  double cost = 0.0;
  double root = 0.0;

  static DistanceEstimate from_cost(double alpha, double cost) {
    require(std::isfinite(cost), Errc::numeric, "transport cost is not finite");
    cost = std::max(cost, 0.0);
    return {alpha, cost, std::pow(cost, 1.0 / alpha)};
  }
};

/// Plug-in cost between two equal-size samples: the sorted (comonotone) pairing.
inline DistanceEstimate mallows_empirical(const EmpiricalDistribution& xs, const EmpiricalDistribution& ys,
                                          double alpha) {
  validate_alpha(alpha);
  if (xs.size() != ys.size()) {
    fail(Errc::size_mismatch,
         "samples have " + std::to_string(xs.size()) + " and " + std::to_string(ys.size()) + " values");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) sum += std::pow(std::abs(xs[i] - ys[i]), alpha);
  return DistanceEstimate::from_cost(alpha, sum / static_cast<double>(xs.size()));
}

/// Exact cost of the quantile coupling: integral over u in (0,1) of
/// |F_p^{-1}(u) - F_q^{-1}(u)|^alpha, evaluated on the merged mass partition.
inline DistanceEstimate mallows_discrete(const DiscreteLaw& p, const DiscreteLaw& q, double alpha) {
  validate_alpha(alpha);
  const auto pa = p.atoms();
  const auto qa = q.atoms();
  std::vector<double> cp(pa.size()), cq(qa.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) cp[i] = (acc += pa[i].probability);
  acc = 0.0;
  for (std::size_t j = 0; j < qa.size(); ++j) cq[j] = (acc += qa[j].probability);
  cp.back() = 1.0;
  cq.back() = 1.0;

  double cost = 0.0;
  double prev = 0.0;
  std::size_t i = 0, j = 0;
  while (i < pa.size() && j < qa.size()) {
    const double next = std::min(cp[i], cq[j]);
    const double width = next - prev;
    if (width > 0.0) cost += width * std::pow(std::abs(pa[i].location - qa[j].location), alpha);
    prev = next;
    if (cp[i] == next) ++i;
    if (cq[j] == next) ++j;
  }
  return DistanceEstimate::from_cost(alpha, cost);
}

namespace detail {

/// min c^T x subject to A x = b, x >= 0, with b >= 0. Two-phase tableau
/// simplex using Bland's rule, so it terminates on degenerate problems.
/// Returns the optimal objective; the feasible region must be nonempty.
inline double simplex_minimize(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                               const std::vector<double>& c) {
  constexpr double eps = 1e-12;
  const std::size_t rows = a.size();
  const std::size_t vars = c.size();
  const std::size_t cols = vars + rows;  // structural + artificial
  std::vector<std::vector<double>> t(rows, std::vector<double>(cols + 1, 0.0));
  std::vector<std::size_t> basis(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < vars; ++k) t[r][k] = a[r][k];
    t[r][vars + r] = 1.0;
    t[r][cols] = b[r];
    basis[r] = vars + r;
  }

  auto pivot = [&](std::size_t pr, std::size_t pc) {
    const double inv = 1.0 / t[pr][pc];
    for (auto& v : t[pr]) v *= inv;
    for (std::size_t r = 0; r < t.size(); ++r) {
      if (r == pr) continue;
      const double f = t[r][pc];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k <= cols; ++k) t[r][k] -= f * t[pr][k];
    }
    basis[pr] = pc;
  };

  // Runs the simplex on objective `cost` over columns [0, allowed).
  auto optimize = [&](const std::vector<double>& cost, std::size_t allowed) {
    for (std::size_t iter = 0; iter < 100000; ++iter) {
      std::size_t enter = allowed;
      for (std::size_t k = 0; k < allowed && enter == allowed; ++k) {
        double reduced = cost[k];
        for (std::size_t r = 0; r < t.size(); ++r) reduced -= cost[basis[r]] * t[r][k];
        if (reduced < -eps) enter = k;
      }
      if (enter == allowed) return;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < t.size(); ++r) {
        if (t[r][enter] > eps) best = std::min(best, t[r][cols] / t[r][enter]);
      }
      std::size_t leave = t.size();
      for (std::size_t r = 0; r < t.size(); ++r) {
        if (t[r][enter] > eps && t[r][cols] / t[r][enter] <= best + eps &&
            (leave == t.size() || basis[r] < basis[leave])) {
          leave = r;
        }
      }
      require(leave != t.size(), Errc::numeric, "transport LP unbounded");
      pivot(leave, enter);
    }
    fail(Errc::numeric, "simplex iteration limit reached");
  };

  std::vector<double> phase1(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) phase1[vars + r] = 1.0;
  optimize(phase1, cols);

  // Drive artificials out of the basis; rows that cannot pivot are redundant.
  for (std::size_t r = 0; r < t.size();) {
    if (basis[r] < vars) {
      ++r;
      continue;
    }
    require(std::abs(t[r][cols]) <= 1e-9, Errc::numeric, "transport LP infeasible");
    std::size_t k = 0;
    while (k < vars && std::abs(t[r][k]) <= eps) ++k;
    if (k < vars) {
      pivot(r, k);
      ++r;
    } else {
      t.erase(t.begin() + static_cast<std::ptrdiff_t>(r));
      basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(r));
    }
  }

  std::vector<double> phase2(cols, 0.0);
  std::copy(c.begin(), c.end(), phase2.begin());
  optimize(phase2, vars);

  double objective = 0.0;
  for (std::size_t r = 0; r < t.size(); ++r) objective += phase2[basis[r]] * t[r][cols];
  return objective;
}

}  // namespace detail

inline constexpr std::size_t kOracleMaxAtoms = 8;

/// Optimal transport cost over all couplings of p and q, by exact LP.
/// Independent of the quantile construction in mallows_discrete.
inline DistanceEstimate transport_oracle(const DiscreteLaw& p, const DiscreteLaw& q, double alpha) {
  validate_alpha(alpha);
  if (p.size() > kOracleMaxAtoms || q.size() > kOracleMaxAtoms) {
    fail(Errc::instance_too_large, "oracle accepts at most " + std::to_string(kOracleMaxAtoms) + " atoms per law");
  }
  const std::size_t m = p.size();
  const std::size_t n = q.size();
  std::vector<std::vector<double>> a(m + n, std::vector<double>(m * n, 0.0));
  std::vector<double> b(m + n), c(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    b[i] = p.atoms()[i].probability;
    for (std::size_t j = 0; j < n; ++j) {
      a[i][i * n + j] = 1.0;
      a[m + j][i * n + j] = 1.0;
      c[i * n + j] = std::pow(std::abs(p.atoms()[i].location - q.atoms()[j].location), alpha);
    }
  }
  for (std::size_t j = 0; j < n; ++j) b[m + j] = q.atoms()[j].probability;
  return DistanceEstimate::from_cost(alpha, detail::simplex_minimize(a, b, c));
}

}  // namespace mallows

namespace mallows {

/// Random law with 1..max_atoms atoms on distinct locations in [-5, 5].
template <class Generator>
DiscreteLaw random_discrete_law(Generator& rng, std::size_t max_atoms) {
  require(max_atoms >= 1, Errc::invalid_argument, "max_atoms must be positive");
  const std::size_t k = 1 + static_cast<std::size_t>(rng() % max_atoms);
  std::vector<double> locations;
  while (locations.size() < k) {
    const double x = rng.uniform(-5.0, 5.0);
    if (std::find(locations.begin(), locations.end(), x) == locations.end()) locations.push_back(x);
  }
  std::sort(locations.begin(), locations.end());
  std::vector<Atom> atoms(k);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    atoms[i] = {locations[i], rng.uniform(0.05, 1.0)};
    total += atoms[i].probability;
  }
  for (auto& a : atoms) a.probability /= total;
  return DiscreteLaw(std::move(atoms));
}

}  // namespace mallows
