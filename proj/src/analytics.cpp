#include "laborsim/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "laborsim/errors.hpp"

namespace laborsim::analytics {

namespace {

std::string describe(const CumulativeSeries& s) {
  return s.year_label.empty() ? std::string("series") : "series '" + s.year_label + "'";
}

double rate_before(const CumulativeSeries& s, int n) {
  return n < 0 ? 0.0 : s.cum_employment.at(static_cast<std::size_t>(n));
}

}  // namespace

void validate_series(const CumulativeSeries& series) {
  if (!(series.alpha0 > 0.0) || !std::isfinite(series.alpha0)) {
    throw ValidationError(describe(series) + ": alpha0 must be positive");
  }
  double previous = 0.0;
  for (std::size_t n = 0; n < series.cum_employment.size(); ++n) {
    const double c = series.cum_employment[n];
    const std::string where = describe(series) + ", stage " + std::to_string(n) + ": ";
    if (!(c >= 0.0 && c <= 1.0)) throw ValidationError(where + "rate outside [0, 1]");
    if (c < previous) throw ValidationError(where + "cumulative rate decreased");
    if (series.alpha0 < 1.0 && c > series.alpha0) {
      throw ValidationError(where + "cumulative rate exceeds alpha0 < 1");
    }
    previous = c;
  }
}

double labor_shortage(double u, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  return (alpha - (1.0 - u)) / alpha;
}

double unemployment_rate(double omega, double alpha) {
  return alpha * omega + 1.0 - alpha;
}

StagewiseResult stagewise_from_cumulative(const CumulativeSeries& series) {
  validate_series(series);
  const double alpha = series.alpha0;
  StagewiseResult out;
  double prev = 0.0;
  for (std::size_t n = 0; n < series.cum_employment.size(); ++n) {
    const double c = series.cum_employment[n];
    if (prev == 1.0) {
      out.truncation = Truncation::saturated;
      out.truncated_at = n;
      break;
    }
    if (prev == alpha) {
      out.truncation = Truncation::vacancies_exhausted;
      out.truncated_at = n;
      break;
    }
    StageTriple t;
    if (n == 0) {
      t.alpha_stage = alpha;
      t.u_stage = 1.0 - c;
      t.omega_stage = (alpha - c) / alpha;
    } else {
      t.alpha_stage = (alpha - prev) / (1.0 - prev);
      t.u_stage = (1.0 - c) / (1.0 - prev);
      t.omega_stage = (alpha - c) / (alpha - prev);
    }
    out.stages.push_back(t);
    prev = c;
  }
  return out;
}

std::vector<double> cumulative_from_stagewise(std::span<const double> u_stages) {
  std::vector<double> out;
  out.reserve(u_stages.size());
  double product = 1.0;
  for (double u : u_stages) {
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("stage-wise rate outside [0, 1]");
    product *= u;
    out.push_back(1.0 - product);
  }
  return out;
}

double stage_alpha_from_products(double alpha, std::span<const double> u_stages, std::size_t n) {
  if (n == 0) return alpha;
  if (n > u_stages.size()) throw DomainError("not enough stage-wise rates for stage n");
  double product = 1.0;
  for (std::size_t k = 0; k < n; ++k) product *= u_stages[k];
  if (product == 0.0) throw DomainError("market saturated before stage n");
  return (alpha - 1.0 + product) / product;
}

std::vector<double> learning_curve(const CumulativeSeries& series) {
  validate_series(series);
  const double target = series.alpha0 >= 1.0 ? 1.0 : series.alpha0;
  std::vector<double> eps;
  eps.reserve(series.cum_employment.size());
  for (double c : series.cum_employment) eps.push_back(target - c);
  return eps;
}

double invariant_omega_alpha(double alpha, double omega, int n) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("an n-independent Omega requires 0 < alpha < 1");
  }
  if (!(omega > 0.0 && omega < 1.0)) throw DomainError("Omega must lie in (0, 1)");
  if (n < 0) throw DomainError("stage must be non-negative");
  const double on = std::pow(omega, n);
  return alpha * on / (1.0 - alpha * (1.0 - on));
}

double invariant_u_alpha(double alpha, double u, int n) {
  if (!(alpha > 1.0)) throw DomainError("an n-independent U requires alpha > 1");
  if (!(u > 0.0 && u < 1.0)) throw DomainError("U must lie in (0, 1)");
  if (n < 0) throw DomainError("stage must be non-negative");
  const double un = std::pow(u, n);
  return (alpha - 1.0 + un) / un;
}

AsymptoticLimits asymptotic_limits(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be positive");
  AsymptoticLimits lim;
  if (alpha < 1.0) {
    lim.regime = MarketRegime::perfect_unemployment;
    lim.alpha_stage = Limit::of(0.0);
    lim.u_stage = Limit::of(1.0);
    lim.omega_stage = Limit::of(0.0);
    lim.cumulative_shortage = 0.0;
  } else if (alpha > 1.0) {
    lim.regime = MarketRegime::perfect_labor_shortage;
    lim.alpha_stage = Limit::diverging();
    lim.u_stage = Limit::of(0.0);
    lim.omega_stage = Limit::of(1.0);
    lim.cumulative_shortage = (alpha - 1.0) / alpha;
  } else {
    // alpha(n) is pinned at 1; U(n) = Omega(n) but their limit depends on the matching.
    lim.regime = MarketRegime::marginal;
    lim.alpha_stage = Limit::of(1.0);
    lim.u_stage = Limit::undetermined();
    lim.omega_stage = Limit::undetermined();
    lim.cumulative_shortage = 0.0;
  }
  return lim;
}

const char* to_string(MarketRegime regime) {
  switch (regime) {
    case MarketRegime::perfect_unemployment:
      return "perfect unemployment state";
    case MarketRegime::marginal:
      return "marginal";
    case MarketRegime::perfect_labor_shortage:
      return "perfect labor shortage state";
  }
  return "unknown";
}

Trajectory uv_trajectory(std::span<const CumulativeSeries> years, int stage, PointKind kind) {
  if (stage < 0) throw DomainError("stage must be non-negative");
  std::vector<const CumulativeSeries*> ordered;
  ordered.reserve(years.size());
  for (const auto& s : years) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->year_label < b->year_label; });

  const auto n = static_cast<std::size_t>(stage);
  Trajectory out;
  for (const auto* s : ordered) {
    validate_series(*s);
    if (n >= s->cum_employment.size()) {
      out.skipped.push_back({s->year_label, "no data for stage " + std::to_string(stage)});
      continue;
    }
    if (kind == PointKind::cumulative) {
      const double u = 1.0 - s->cum_employment[n];
      out.points.push_back({s->year_label, stage, labor_shortage(u, s->alpha0), u});
      continue;
    }
    const auto sw = stagewise_from_cumulative(*s);
    if (n >= sw.stages.size()) {
      out.skipped.push_back({s->year_label, "stage-wise quantities undefined at stage " +
                                                std::to_string(stage) + " (market emptied)"});
      continue;
    }
    out.points.push_back({s->year_label, stage, sw.stages[n].omega_stage, sw.stages[n].u_stage});
  }
  return out;
}

double stage_alpha_gap(const CumulativeSeries& series, int n) {
  validate_series(series);
  if (n < 1) throw DomainError("the alpha gap is defined for n >= 1");
  if (static_cast<std::size_t>(n) > series.cum_employment.size()) {
    throw DomainError("series too short for stage " + std::to_string(n));
  }
  const double c1 = rate_before(series, n - 1);
  const double c2 = rate_before(series, n - 2);
  const double denom = (1.0 - c1) * (1.0 - c2);
  if (denom == 0.0) throw DomainError("market saturated before stage " + std::to_string(n));
  return (series.alpha0 - 1.0) * (c1 - c2) / denom;
}

}  // namespace laborsim::analytics
