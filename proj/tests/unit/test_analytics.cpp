#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "laborsim/analytics.hpp"
#include "laborsim/errors.hpp"
#include "laborsim/random.hpp"

using namespace laborsim;
using namespace laborsim::analytics;

namespace {

// Strictly increasing rates kept away from the denominators' zeros.
CumulativeSeries random_series(RandomStream& rng, int stages) {
  CumulativeSeries s;
  s.alpha0 = 0.1 + 2.9 * rng.uniform01();
  const double cap = 0.98 * std::min(1.0, s.alpha0);
  double c = 0.0;
  for (int n = 0; n < stages; ++n) {
    c += (cap - c) * (0.05 + 0.5 * rng.uniform01());
    s.cum_employment.push_back(c);
  }
  return s;
}

}  // namespace

TEST_CASE("labor_shortage examples") {
  CHECK(labor_shortage(0.4, 1.0) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(labor_shortage(0.4, 2.0) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(labor_shortage(1.0, 0.3) == 1.0);
  CHECK(labor_shortage(1.0, 7.0) == 1.0);
  CHECK_THROWS_AS(labor_shortage(0.4, 0.0), DomainError);
  CHECK_THROWS_AS(labor_shortage(0.4, -1.0), DomainError);
  CHECK(unemployment_rate(labor_shortage(0.37, 1.6), 1.6) == doctest::Approx(0.37).epsilon(1e-15));
}

TEST_CASE("stagewise_from_cumulative examples") {
  const CumulativeSeries s{"2012", 1.28, {0.6, 0.8}};
  const auto r = stagewise_from_cumulative(s);
  REQUIRE(r.stages.size() == 2);
  CHECK(r.stages[0].alpha_stage == 1.28);
  CHECK(r.stages[0].u_stage == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(r.stages[0].omega_stage == doctest::Approx(0.68 / 1.28).epsilon(1e-15));
  CHECK(r.stages[1].alpha_stage == doctest::Approx(1.7).epsilon(1e-14));
  CHECK(r.stages[1].u_stage == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.stages[1].omega_stage == doctest::Approx(0.48 / 0.68).epsilon(1e-14));
  CHECK(r.stages[1].omega_stage == doctest::Approx(0.705882).epsilon(1e-6));
  CHECK(std::abs(r.stages[1].identity_residual()) <= 1e-12);
  CHECK(r.truncation == Truncation::none);

  const auto stalled = stagewise_from_cumulative({"x", 1.5, {0.3, 0.3}});
  CHECK(stalled.stages[1].u_stage == 1.0);
  CHECK(stalled.stages[1].omega_stage == 1.0);

  const auto marginal = stagewise_from_cumulative({"m", 1.0, {0.2, 0.5, 0.55, 0.9}});
  for (const auto& t : marginal.stages) {
    CHECK(t.alpha_stage == 1.0);
    CHECK(t.u_stage == t.omega_stage);
  }
}

TEST_CASE("stagewise_from_cumulative truncation and rejection") {
  const auto sat = stagewise_from_cumulative({"s", 2.0, {0.7, 1.0, 1.0}});
  CHECK(sat.stages.size() == 2);
  CHECK(sat.truncation == Truncation::saturated);
  CHECK(sat.truncated_at == 2u);

  const auto dry = stagewise_from_cumulative({"d", 0.5, {0.3, 0.5, 0.5}});
  CHECK(dry.stages.size() == 2);
  CHECK(dry.truncation == Truncation::vacancies_exhausted);

  CHECK_THROWS_AS(stagewise_from_cumulative({"b", 0.5, {0.3, 0.6}}), ValidationError);
  CHECK_THROWS_AS(stagewise_from_cumulative({"b", 1.5, {0.3, 0.2}}), ValidationError);
  CHECK_THROWS_AS(stagewise_from_cumulative({"b", 0.0, {0.3}}), ValidationError);
  CHECK_THROWS_AS(stagewise_from_cumulative({"b", 1.5, {1.2}}), ValidationError);
}

TEST_CASE("cumulative_from_stagewise examples") {
  const std::vector<double> u(4, 0.4);
  const auto c = cumulative_from_stagewise(u);
  const std::vector<double> expected{0.6, 0.84, 0.936, 0.9744};
  for (int n = 0; n < 4; ++n) CHECK(c[n] == doctest::Approx(expected[n]).epsilon(1e-14));
  const std::vector<double> zero_first{0.0, 0.3, 0.9};
  CHECK(cumulative_from_stagewise(zero_first) == std::vector<double>{1.0, 1.0, 1.0});
  const std::vector<double> ones(3, 1.0);
  CHECK(cumulative_from_stagewise(ones) == std::vector<double>{0.0, 0.0, 0.0});
  const std::vector<double> bad{0.5, 1.2};
  CHECK_THROWS_AS(cumulative_from_stagewise(bad), DomainError);
}

TEST_CASE("learning_curve examples") {
  auto eps = learning_curve({"a", 2.0, {0.6, 0.84}});
  CHECK(eps[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(eps[1] == doctest::Approx(0.16).epsilon(1e-14));
  eps = learning_curve({"b", 0.5, {0.3, 0.42}});
  CHECK(eps[0] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(eps[1] == doctest::Approx(0.08).epsilon(1e-13));
  CHECK(eps[1] == doctest::Approx(0.5 * 0.4 * 0.4).epsilon(1e-13));
  eps = learning_curve({"c", 0.7, {0.5, 0.7}});
  CHECK(eps[1] == 0.0);
  CHECK_THROWS_AS(learning_curve({"d", 1.0, {0.5, 0.4}}), ValidationError);
}

TEST_CASE("scale-invariant solutions") {
  CHECK(invariant_omega_alpha(0.5, 0.4, 0) == 0.5);
  CHECK(invariant_omega_alpha(0.5, 0.4, 1) == doctest::Approx(0.2 / 0.7).epsilon(1e-15));
  CHECK(invariant_omega_alpha(0.9, 0.4, 30) < 1e-10);
  for (int n = 0; n < 20; ++n) {
    CHECK(invariant_omega_alpha(0.5, 0.4, n + 1) < invariant_omega_alpha(0.5, 0.4, n));
    CHECK(invariant_u_alpha(2.0, 0.4, n + 1) > invariant_u_alpha(2.0, 0.4, n));
  }
  CHECK_THROWS_AS(invariant_omega_alpha(1.0, 0.4, 1), DomainError);
  CHECK_THROWS_AS(invariant_omega_alpha(1.5, 0.4, 1), DomainError);

  CHECK(invariant_u_alpha(2.0, 0.4, 0) == 2.0);
  CHECK(invariant_u_alpha(2.0, 0.4, 2) == doctest::Approx(7.25).epsilon(1e-14));
  CHECK_THROWS_AS(invariant_u_alpha(1.0, 0.4, 1), DomainError);
  CHECK_THROWS_AS(invariant_u_alpha(0.5, 0.4, 1), DomainError);
}

TEST_CASE("constant stage-wise rates give exponential learning curves") {
  // alpha < 1 with constant Omega: (1-U)_n = alpha (1 - Omega^(n+1)).
  CumulativeSeries buyer{"b", 0.5, {}};
  // Beyond ~10 stages alpha - (1-U)_n cancels to a few ulps and Omega(n) loses digits.
  for (int n = 0; n <= 10; ++n) buyer.cum_employment.push_back(0.5 * (1.0 - std::pow(0.4, n + 1)));
  const auto sw = stagewise_from_cumulative(buyer);
  for (const auto& t : sw.stages) CHECK(std::abs(t.omega_stage - 0.4) <= 1e-9);
  for (std::size_t n = 0; n < sw.stages.size(); ++n) {
    CHECK(std::abs(sw.stages[n].alpha_stage - invariant_omega_alpha(0.5, 0.4, static_cast<int>(n))) <=
          1e-9);
  }

  // alpha > 1 with constant U: alpha(n) matches the closed form.
  const std::vector<double> u(12, 0.4);
  const CumulativeSeries seller{"s", 2.0, cumulative_from_stagewise(u)};
  const auto sw2 = stagewise_from_cumulative(seller);
  for (std::size_t n = 0; n < sw2.stages.size(); ++n) {
    CHECK(std::abs(sw2.stages[n].alpha_stage - invariant_u_alpha(2.0, 0.4, static_cast<int>(n))) <=
          1e-9 * invariant_u_alpha(2.0, 0.4, static_cast<int>(n)));
  }
}

TEST_CASE("asymptotic limits") {
  auto l = asymptotic_limits(0.5);
  CHECK(l.regime == MarketRegime::perfect_unemployment);
  CHECK(l.alpha_stage == Limit::of(0.0));
  CHECK(l.u_stage == Limit::of(1.0));
  CHECK(l.omega_stage == Limit::of(0.0));
  CHECK(l.cumulative_shortage == 0.0);

  l = asymptotic_limits(2.0);
  CHECK(l.regime == MarketRegime::perfect_labor_shortage);
  CHECK(l.alpha_stage.kind == Limit::Kind::diverges);
  CHECK(l.u_stage == Limit::of(0.0));
  CHECK(l.omega_stage == Limit::of(1.0));
  CHECK(l.cumulative_shortage == 0.5);

  l = asymptotic_limits(1.0);
  CHECK(l.regime == MarketRegime::marginal);
  CHECK(l.alpha_stage == Limit::of(1.0));
  CHECK(l.u_stage.kind == Limit::Kind::marginal);
  CHECK(l.omega_stage.kind == Limit::Kind::marginal);

  CHECK_THROWS_AS(asymptotic_limits(0.0), DomainError);
  CHECK_THROWS_AS(asymptotic_limits(-2.0), DomainError);
}

TEST_CASE("uv_trajectory") {
  const std::vector<CumulativeSeries> years{
      {"2001", 1.0, {0.5, 0.7, 0.8}},
      {"1999", 1.4, {0.6, 0.85}},
      {"2000", 0.99, {0.55}},
  };
  const auto cum = uv_trajectory(years, 0, PointKind::cumulative);
  REQUIRE(cum.points.size() == 3);
  CHECK(cum.points[0].year_label == "1999");
  CHECK(cum.points[2].year_label == "2001");
  for (const auto& p : cum.points) {
    const auto& s = *std::find_if(years.begin(), years.end(),
                                  [&](const auto& y) { return y.year_label == p.year_label; });
    CHECK(p.u == 1.0 - s.cum_employment[0]);
    CHECK(p.omega == labor_shortage(p.u, s.alpha0));
  }

  const auto sw = uv_trajectory(years, 1, PointKind::stagewise);
  CHECK(sw.points.size() == 2);
  REQUIRE(sw.skipped.size() == 1);
  CHECK(sw.skipped[0].year_label == "2000");
  CHECK(sw.points[1].u == sw.points[1].omega);

  const std::vector<CumulativeSeries> twins{{"a", 1.2, {0.5}}, {"a", 1.2, {0.5}}};
  const auto t = uv_trajectory(twins, 0, PointKind::stagewise);
  REQUIRE(t.points.size() == 2);
  CHECK(t.points[0].u == t.points[1].u);
  CHECK(t.points[0].omega == t.points[1].omega);
}

TEST_CASE("stage_alpha_gap examples") {
  const CumulativeSeries marginal{"m", 1.0, {0.3, 0.6, 0.8}};
  for (int n = 1; n <= 3; ++n) CHECK(stage_alpha_gap(marginal, n) == 0.0);
  CHECK(stage_alpha_gap({"s", 1.28, {0.3, 0.6, 0.8}}, 2) > 0.0);
  CHECK(stage_alpha_gap({"b", 0.9, {0.3, 0.6, 0.8}}, 2) < 0.0);
  CHECK(stage_alpha_gap({"z", 1.5, {0.3, 0.3, 0.8}}, 2) == 0.0);
  CHECK_THROWS_AS(stage_alpha_gap(marginal, 0), DomainError);
  CHECK_THROWS_AS(stage_alpha_gap(marginal, 4), DomainError);
}

TEST_CASE("random series: identity, roundtrip, bounds, sign law, product form") {
  RandomStream rng(2718);
  for (int trial = 0; trial < 500; ++trial) {
    const auto s = random_series(rng, 1 + static_cast<int>(rng.below(12)));
    const auto r = stagewise_from_cumulative(s);
    REQUIRE(r.stages.size() == s.cum_employment.size());
    std::vector<double> u;
    for (std::size_t n = 0; n < r.stages.size(); ++n) {
      const auto& t = r.stages[n];
      CHECK(std::abs(t.identity_residual()) <= 1e-12);
      CHECK(t.u_stage >= 0.0);
      CHECK(t.u_stage <= 1.0);
      CHECK(t.omega_stage >= 0.0);
      CHECK(t.omega_stage <= 1.0);
      u.push_back(t.u_stage);
      CHECK(std::abs(stage_alpha_from_products(s.alpha0, u, n) - t.alpha_stage) <=
                1e-12 * std::max(1.0, t.alpha_stage));
      if (n >= 1) {
        const double gap = t.alpha_stage - r.stages[n - 1].alpha_stage;
        const double sign = s.alpha0 > 1.0 ? 1.0 : (s.alpha0 < 1.0 ? -1.0 : 0.0);
        CHECK(gap * sign > 0.0);
        CHECK(std::abs(stage_alpha_gap(s, static_cast<int>(n)) - gap) <= 1e-12 * std::max(1.0, std::abs(gap)));
      }
    }
    const auto back = cumulative_from_stagewise(u);
    for (std::size_t n = 0; n < back.size(); ++n) {
      CHECK(std::abs(back[n] - s.cum_employment[n]) <= 1e-12);
    }
    const auto eps = learning_curve(s);
    for (std::size_t n = 0; n < eps.size(); ++n) {
      CHECK(eps[n] >= 0.0);
      if (n > 0) CHECK(eps[n] <= eps[n - 1]);
    }
  }
}
