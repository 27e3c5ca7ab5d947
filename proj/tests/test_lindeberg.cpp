#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mallows/coupling.hpp"
#include "mallows/lindeberg.hpp"

using namespace mallows;
using Catch::Approx;

namespace {

const StableParams kUnit{1.0, 1.0, 0.0, 0.0};
const PairModel kGapThree = CustomGaps{{DiscreteLaw::point_mass(3.0)}};

PairSample from_gaps(const std::vector<double>& gaps, double alpha) {
  PairSample s{{}, {alpha, 1.0, 0.0, 0.0}};
  for (double g : gaps) s.pairs.push_back({g, 0.0});
  return s;
}

}  // namespace

TEST_CASE("delta closed forms", "[lindeberg][delta]") {
  CHECK(delta(1.0) == 0.5);
  CHECK(delta(4.0 / 3.0) == Approx(0.25).margin(1e-15));
  CHECK(delta(1.5) == Approx(1.0 / 6.0).margin(1e-15));
  CHECK_THROWS_AS(delta(2.0), Error);
  CHECK_THROWS_AS(delta(0.0), Error);
}

TEST_CASE("gap three, exact mode", "[lindeberg][exact]") {
  CHECK(lindeberg_sum_corrected(kGapThree, 1.0, 4, 1.0) == Approx(3.0).margin(1e-12));
  CHECK(lindeberg_sum_corrected(kGapThree, 1.0, 4, 2.0) == 0.0);
  CHECK(lindeberg_sum_original(kGapThree, 1.0, 4, 1.0) == Approx(3.0).margin(1e-12));
  CHECK(lindeberg_sum_original(kGapThree, 1.0, 4, 2.0) == Approx(3.0).margin(1e-12));
  CHECK(lindeberg_sum_original(kGapThree, 1.0, 4, 4.0) == 0.0);
}

TEST_CASE("gap three, realized pairs agree with exact mode", "[lindeberg][mc]") {
  const auto s = generate(kGapThree, kUnit, 4, 1);
  for (double b : {1.0, 2.0, 4.0}) {
    CHECK(lindeberg_sum_corrected(s, b) == Approx(lindeberg_sum_corrected(kGapThree, 1.0, 4, b)).margin(1e-12));
    CHECK(lindeberg_sum_original(s, b) == Approx(lindeberg_sum_original(kGapThree, 1.0, 4, b)).margin(1e-12));
  }
}

TEST_CASE("bounded gaps above the threshold vanish", "[lindeberg]") {
  const auto s = generate(AdditiveNoise{UniformNoise{-1.0, 1.0}}, StableParams{1.5}, 1000, 2);
  CHECK(lindeberg_sum_corrected(s, 1.01) == 0.0);
  CHECK(lindeberg_sum_original(s, 1.01) == 0.0);
  CHECK(lindeberg_sum_original(AdditiveNoise{UniformNoise{-1.0, 1.0}}, 1.5, 10, 1.0) == 0.0);
}

TEST_CASE("nonpositive b is rejected", "[lindeberg]") {
  const auto s = from_gaps({1.0}, 1.0);
  CHECK_THROWS_AS(lindeberg_sum_corrected(s, 0.0), Error);
  CHECK_THROWS_AS(lindeberg_sum_original(s, -1.0), Error);
  CHECK_THROWS_AS(truncation_split(s, 0.0), Error);
  CHECK_THROWS_AS(lindeberg_sum_corrected(kGapThree, 1.0, 4, 0.0), Error);
}

TEST_CASE("dominance and monotonicity on random instances", "[lindeberg][property]") {
  const std::vector<double> grid{0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const double alpha = 0.3 + 1.6 * static_cast<double>(seed) / 20.0;
    const auto s = generate(AdditiveNoise{TwoSidedPareto{0.5, 1.5 + 0.1 * seed, 0.4}}, StableParams{alpha}, 200 + seed, seed);
    const auto r = lindeberg_report(s, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      REQUIRE(r.rows[k].corrected >= 0.0);
      REQUIRE(r.rows[k].original >= r.rows[k].corrected);
      if (k > 0) {
        REQUIRE(r.rows[k].corrected <= r.rows[k - 1].corrected);
        REQUIRE(r.rows[k].original <= r.rows[k - 1].original);
      }
    }
  }
}

TEST_CASE("corrected sum is nonincreasing in n for identically distributed gaps", "[lindeberg][exact][property]") {
  const PairModel m = AdditiveNoise{TwoSidedPareto{1.0, 2.2, 0.5}};
  for (double alpha : {0.8, 1.0, 1.5}) {
    double previous = INFINITY;
    for (std::size_t n : {1u, 10u, 100u, 1000u, 10000u}) {
      const double l = lindeberg_sum_corrected(m, alpha, n, 0.5);
      REQUIRE(l <= previous);
      previous = l;
    }
  }
}

TEST_CASE("exact mode handles index-dependent tables", "[lindeberg][exact]") {
  const PairModel m = CustomGaps{{DiscreteLaw::point_mass(5.0), DiscreteLaw::point_mass(1.0)}};
  // n = 4, alpha = 1, b = 1: threshold 2, only G_1 = 5 exceeds it.
  CHECK(lindeberg_sum_corrected(m, 1.0, 4, 1.0) == Approx(5.0 / 4.0).margin(1e-12));
}

TEST_CASE("truncation split examples", "[lindeberg][split]") {
  // alpha = 1 and n = 2: b = sqrt(2) puts the threshold at 2.
  auto s = from_gaps({1.0, 5.0}, 1.0);
  const auto split = truncation_split(s, std::sqrt(2.0));
  CHECK(split.threshold == Approx(2.0).margin(1e-15));
  CHECK(split.u == std::vector<double>{1.0, 0.0});
  CHECK(split.v == std::vector<double>{0.0, 5.0});
  const auto small = truncation_split(from_gaps({0.1, -0.2, 0.3}, 1.0), 1.0);
  for (double v : small.v) CHECK(v == 0.0);
}

TEST_CASE("truncation split invariants", "[lindeberg][split][property]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const double alpha = 0.4 + 0.08 * static_cast<double>(seed);
    const auto s = generate(AdditiveNoise{TwoSidedPareto{0.3, 1.8, 0.6}}, StableParams{alpha}, 500, seed);
    const double b = 0.1 + 0.2 * static_cast<double>(seed);
    const auto split = truncation_split(s, b);
    const auto gaps = s.gaps();
    double v_cost = 0.0;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      REQUIRE(split.u[i] + split.v[i] == gaps[i]);
      REQUIRE(std::abs(split.u[i]) <= split.threshold);
      REQUIRE((split.u[i] == 0.0 || split.v[i] == 0.0));
      if (split.v[i] != 0.0) REQUIRE(std::abs(split.v[i]) > split.threshold);
      v_cost += std::pow(std::abs(split.v[i]), alpha);
    }
    CHECK(v_cost / static_cast<double>(gaps.size()) == Approx(lindeberg_sum_corrected(s, b)).epsilon(1e-12));
  }
}

TEST_CASE("reports and the sup over the ladder", "[lindeberg][report]") {
  const std::vector<double> grid{1.0, 2.0};
  std::vector<LindebergReport> reports;
  for (std::size_t n : {4u, 16u}) reports.push_back(lindeberg_report(kGapThree, 1.0, n, grid));
  // n = 16: threshold 4b, so L2 = 0 at both b; n = 4 gives (3, 0).
  CHECK(reports[0].rows[0].corrected == Approx(3.0));
  CHECK(reports[1].rows[0].corrected == 0.0);
  const auto sup = sup_over_ladder(reports);
  REQUIRE(sup.size() == 2);
  CHECK(sup[0].corrected == Approx(3.0));
  CHECK(sup[1].corrected == 0.0);
  CHECK(sup[1].original == Approx(3.0));
}
