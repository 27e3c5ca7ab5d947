#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "mallows/harness.hpp"

using namespace mallows;
using Catch::Approx;

namespace {

const PairModel kZero = AdditiveNoise{PointMass{0.0}};
const PairModel kUniform = AdditiveNoise{UniformNoise{-1.0, 1.0}};
const PairModel kGapThree = CustomGaps{{DiscreteLaw::point_mass(3.0)}};

ExperimentConfig small_config(PairModel model, double alpha) {
  ExperimentConfig c;
  c.model = std::move(model);
  c.stable = {alpha, 1.0, 0.0, 0.0};
  c.n_ladder = {10, 100, 1000};
  c.replicates = 5;
  c.samples_per_distance = 500;
  c.prepass_replicates = 32;
  c.seed = 2718;
  return c;
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::numeric;
}

}  // namespace

TEST_CASE("alpha cases", "[harness]") {
  CHECK(alpha_case(0.5) == AlphaCase::sub);
  CHECK(alpha_case(1.0) == AlphaCase::one);
  CHECK(alpha_case(1.0 + 1e-12) == AlphaCase::one);
  CHECK(alpha_case(1.5) == AlphaCase::super);
}

TEST_CASE("super-case centering with unit means", "[harness][centering]") {
  const PairModel m = CustomGaps{{DiscreteLaw::point_mass(1.0)}};
  for (std::size_t n : {1u, 8u, 1000u}) {
    const auto spec = centering(m, {1.5, 1.0, 0.0, 0.0}, n, std::nullopt);
    CHECK(spec.alpha_case == AlphaCase::super);
    CHECK(spec.stable_shift == 0.0);
    CHECK(spec.c_n == Approx(std::cbrt(static_cast<double>(n))).epsilon(1e-12));
  }
}

TEST_CASE("super-case centering matches the closed form for index-dependent tables", "[harness][centering]") {
  const PairModel m = CustomGaps{{DiscreteLaw({{-1.0, 0.5}, {3.0, 0.5}}), DiscreteLaw::point_mass(2.0)}};
  const StableParams p{1.25, 2.0, 0.5, 0.7};
  const std::size_t n = 50;
  // E X_1 = mu + 1, E X_i = mu + 2 for i >= 2.
  const double expected = std::pow(50.0, -1.0 / 1.25) * (n * p.mu + 1.0 + 2.0 * (n - 1)) - p.mu;
  CHECK(centering(m, p, n, std::nullopt).c_n == Approx(expected).margin(1e-12));
}

TEST_CASE("unit-case centering vanishes for symmetric bounded gaps", "[harness][centering]") {
  const auto spec = centering(kUniform, {1.0, 1.0, 0.0, 0.0}, 100, 0.5);
  CHECK(spec.alpha_case == AlphaCase::one);
  CHECK(spec.c_n == 0.0);
}

TEST_CASE("unit-case centering carries the log shift", "[harness][centering]") {
  const auto spec = centering(kZero, {1.0, 2.0, 0.5, 0.0}, 100, 0.5);
  CHECK(spec.stable_shift == Approx(2.0 / std::numbers::pi * 2.0 * 0.5 * std::log(100.0)).epsilon(1e-14));
  CHECK(spec.c_n == spec.stable_shift);
}

TEST_CASE("sub-case centering arithmetic", "[harness][centering]") {
  const auto spec = centering(kZero, {0.5, 1.0, 0.0, 1.0}, 4, 1.0);
  CHECK(spec.alpha_case == AlphaCase::sub);
  CHECK(spec.c_n == Approx(-0.75).margin(1e-12));
  CHECK(spec.mean_term == 0.0);
}

TEST_CASE("sampled centering records a standard error", "[harness][centering]") {
  const PairModel m = AdditiveNoise{StableParams{1.8, 0.2, 0.0, 0.1}};
  const auto spec = centering(m, {0.8, 1.0, 0.0, 0.0}, 50, 0.5, 64, 9);
  CHECK(spec.mean_term_se > 0.0);
  CHECK(std::isfinite(spec.c_n));
}

TEST_CASE("centering errors", "[harness][centering]") {
  CHECK(code_of([] { centering(AdditiveNoise{TwoSidedPareto{1.0, 0.9}}, {1.5}, 10, std::nullopt); }) ==
        Errc::mean_unavailable);
  CHECK(code_of([] { centering(kZero, {0.8}, 10, std::nullopt); }) == Errc::missing_bn);
  CHECK(code_of([] { centering(kZero, {1.0}, 10, -1.0); }) == Errc::missing_bn);
}

TEST_CASE("select_bn examples", "[harness][bn]") {
  const StableParams unit{1.0, 1.0, 0.0, 0.0};
  const std::vector<double> grid{2.0, 1.0, 0.5};
  const auto three = select_bn(kGapThree, unit, 4, grid);
  CHECK(three.b_n == 2.0);
  CHECK(three.qualified);
  CHECK(select_bn(kZero, unit, 4, grid).b_n == 0.5);
  const auto none = select_bn(kGapThree, unit, 4, std::vector<double>{0.5, 0.25});
  CHECK_FALSE(none.qualified);
  CHECK(none.b_n == 0.5);
  CHECK(code_of([&] { select_bn(kZero, unit, 4, std::vector<double>{}); }) == Errc::empty_grid);
  CHECK_THROWS_AS(select_bn(kZero, StableParams{1.5}, 4, grid), Error);
}

TEST_CASE("select_bn reaches the grid minimum once thresholds clear bounded gaps", "[harness][bn]") {
  const auto grid = default_bn_grid();
  const StableParams p{0.8, 1.0, 0.0, 0.0};
  const std::size_t n = 1'000'000'000;
  REQUIRE(corrected_threshold(0.8, n, grid.back()) < 1.0);
  // Gaps bounded by 1: pick n so that n^delta * min(grid) > 1.
  const double need = std::pow(1.0 / grid.back(), 1.0 / delta(0.8));
  CHECK(select_bn(kUniform, p, static_cast<std::size_t>(need * 1.01), grid).b_n == grid.back());
}

TEST_CASE("select_bn is nonincreasing along the ladder for bounded gaps", "[harness][bn][property]") {
  const auto grid = default_bn_grid();
  for (double alpha : {0.5, 0.8, 1.0}) {
    double previous = INFINITY;
    for (std::size_t n : {10u, 100u, 1000u, 10000u, 100000u}) {
      const double b = select_bn(kUniform, {alpha, 1.0, 0.0, 0.0}, n, grid).b_n;
      REQUIRE(b <= previous);
      previous = b;
    }
  }
}

TEST_CASE("zero-gap model: the coupled estimate is exactly zero", "[harness][distance]") {
  auto c = small_config(kZero, 1.5);
  const auto row = estimate_distance(c, 100);
  CHECK(row.d_cost_hat == Approx(0.0).margin(1e-20));
  CHECK(row.d_cost_hat <= noise_floor(c).estimate);
  CHECK(row.lindeberg == 0.0);
  CHECK(row.bound_rhs == Approx(std::pow(2.0, 0.5)).epsilon(1e-14));
}

TEST_CASE("zero-gap model, independent reference, sits at the noise floor", "[harness][distance]") {
  auto c = small_config(kZero, 1.5);
  c.reference = ReferenceMode::independent;
  c.samples_per_distance = 2000;
  const auto row = estimate_distance(c, 20);
  const auto floor = noise_floor(c);
  CHECK(row.d_cost_hat <= floor.estimate + 3.0 * std::max(floor.se, row.se));
}

TEST_CASE("uniform noise: estimates decrease along a small ladder", "[harness][distance]") {
  const auto rows = run_experiment(small_config(kUniform, 1.5));
  REQUIRE(rows.size() == 3);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CAPTURE(k, rows[k - 1].d_cost_hat, rows[k].d_cost_hat);
    CHECK(rows[k].d_cost_hat < rows[k - 1].d_cost_hat);
  }
  for (const auto& r : rows) {
    CHECK(r.replicates == 5);
    CHECK(r.se >= 0.0);
    CHECK(r.b_used == 1.0);
  }
}

TEST_CASE("gap three with alpha 1.5 converges", "[harness][distance]") {
  const auto rows = run_experiment(small_config(kGapThree, 1.5));
  // c_n absorbs the constant gap, leaving only rounding.
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].d_cost_hat <= 1e-20);
    if (k > 0) CHECK(rows[k].d_cost_hat <= rows[k - 1].d_cost_hat + 1e-20);
  }
  // Threshold b n^{1/6} passes 3 only beyond n = 729.
  CHECK(rows[0].lindeberg > 0.0);
  CHECK(rows[2].lindeberg == 0.0);
}

TEST_CASE("sub-case rows use the selected b_n", "[harness][distance]") {
  auto c = small_config(CustomGaps{{DiscreteLaw({{-0.5, 0.5}, {0.5, 0.5}})}}, 0.8);
  c.stable.beta = 0.5;
  const auto rows = run_experiment(c);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].bound_rhs == Approx(std::pow(rows[k].b_used, 0.8) + rows[k].lindeberg));
    if (k > 0) CHECK(rows[k].b_used <= rows[k - 1].b_used);
  }
}

TEST_CASE("estimate_distance requires five blocks", "[harness][distance]") {
  auto c = small_config(kZero, 1.5);
  c.replicates = 4;
  CHECK(code_of([&] { estimate_distance(c, 10); }) == Errc::config);
}

TEST_CASE("bound_check on the zero-gap model", "[harness][bound]") {
  const auto c = small_config(kZero, 1.5);
  const auto rep = bound_check(c, 100, 0.5);
  CHECK(rep.rhs == Approx(std::pow(2.0, 0.5) * std::pow(0.5, 1.5)).epsilon(1e-14));
  CHECK(rep.margin == Approx(rep.rhs).margin(1e-15));
  CHECK(rep.passed);
}

TEST_CASE("bound_check anchors hold for bounded and heavy-tailed gaps", "[harness][bound][property]") {
  for (const PairModel& m : {kUniform, PairModel{AdditiveNoise{TwoSidedPareto{0.5, 2.5, 0.3}}}}) {
    for (double b : {0.25, 1.0}) {
      auto c = small_config(m, 1.5);
      c.prepass_replicates = 400;
      const auto rep = bound_check(c, 100, b);
      CAPTURE(b, rep.lhs, rep.rhs, rep.se);
      CHECK(rep.passed);
      CHECK(rep.lyapunov_bound <= rep.variance_cap);
      CHECK(rep.variance_sum <= 100.0 * std::pow(corrected_threshold(1.5, 100, b), 2.0));
      CHECK(rep.v_moment <= rep.vbe_rhs + 3.0 * rep.v_moment_se);
      CHECK(rep.rhs_with_constants == rep.rhs);
    }
  }
}

TEST_CASE("bound_check in the unit case logs both variants", "[harness][bound]") {
  const auto rep = bound_check(small_config(kGapThree, 1.0), 4, 1.0);
  CHECK(rep.alpha_case == AlphaCase::one);
  CHECK(rep.rhs == Approx(1.0 + 3.0));
  CHECK(rep.rhs_with_constants == Approx(1.0 + 4.0 * 3.0));
}

TEST_CASE("von Bahr-Esseen anchor on heavy-tailed gaps", "[harness][vbe]") {
  for (double alpha : {1.2, 1.5, 1.8}) {
    const PairModel m = AdditiveNoise{TwoSidedPareto{1.0, alpha + 0.5, 0.7}};
    const auto rep = von_bahr_esseen_check(m, {alpha, 1.0, 0.0, 0.0}, 40, 0.3, 1000, 5);
    CAPTURE(alpha, rep.lhs, rep.rhs);
    CHECK(rep.passed);
    CHECK(rep.rhs > 0.0);
  }
}

TEST_CASE("limit surrogate over the top of the ladder", "[harness][bound]") {
  auto c = small_config(kUniform, 1.5);
  c.b = 0.25;
  const auto rows = run_experiment(c);
  double worst = 0.0, se = 0.0;
  for (std::size_t k = rows.size() / 2; k < rows.size(); ++k) {
    if (rows[k].d_cost_hat > worst) {
      worst = rows[k].d_cost_hat;
      se = rows[k].se;
    }
  }
  CHECK(worst <= std::pow(2.0, 0.5) * std::pow(0.25, 1.5) + 3.0 * se);
}

TEST_CASE("results do not depend on the thread count", "[harness][determinism]") {
  auto c = small_config(AdditiveNoise{TwoSidedPareto{0.5, 2.0, 0.4}}, 1.3);
  c.n_ladder = {10, 200};
  const auto one = run_experiment(c);
  c.threads = 3;
  const auto three = run_experiment(c);
  REQUIRE(one.size() == three.size());
  for (std::size_t k = 0; k < one.size(); ++k) {
    CHECK(one[k].d_cost_hat == three[k].d_cost_hat);
    CHECK(one[k].c_n == three[k].c_n);
    CHECK(one[k].se == three[k].se);
  }
  c.threads = 1;
  c.seed += 1;
  CHECK(run_experiment(c)[1].d_cost_hat != one[1].d_cost_hat);
}

TEST_CASE("config validation", "[harness][config]") {
  auto c = small_config(kZero, 1.5);
  c.n_ladder = {10, 10};
  CHECK(code_of([&] { validate(c); }) == Errc::config);
  c = small_config(kZero, 1.5);
  c.bn_grid = {0.5, 1.0};
  CHECK(code_of([&] { validate(c); }) == Errc::config);
}
