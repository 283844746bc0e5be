#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace laborsim::analytics {

/// One year of published statistics: October job-offer ratio and the
/// cumulative employment rates (1-U)_0, (1-U)_1, ...
struct CumulativeSeries {
  std::string year_label;
  double alpha0 = 1.0;
  std::vector<double> cum_employment;

  bool operator==(const CumulativeSeries&) const = default;
};

/// Throws ValidationError unless alpha0 > 0 and the rates are in [0, 1],
/// non-decreasing, and (for alpha0 < 1) bounded by alpha0.
void validate_series(const CumulativeSeries& series);

struct StageTriple {
  double alpha_stage = 0.0;
  double u_stage = 0.0;
  double omega_stage = 0.0;

  /// U - (alpha * Omega + 1 - alpha); zero up to rounding.
  double identity_residual() const { return u_stage - (alpha_stage * omega_stage + 1.0 - alpha_stage); }
};

enum class Truncation {
  none,
  saturated,            // (1-U)_{n-1} = 1: no students left
  vacancies_exhausted,  // (1-U)_{n-1} = alpha: no positions left
};

struct StagewiseResult {
  std::vector<StageTriple> stages;
  Truncation truncation = Truncation::none;
  // Stage index at which the quantities stop being defined.
  std::optional<std::size_t> truncated_at;
};

/// Omega = (alpha - (1 - U)) / alpha.
double labor_shortage(double u, double alpha);

/// U = alpha * Omega + 1 - alpha.
double unemployment_rate(double omega, double alpha);

/// Stage-wise (alpha, U, Omega) from the cumulative rates, with (1-U)_{-1} = 0:
///   alpha(n) = (alpha - c_{n-1}) / (1 - c_{n-1})
///   U(n)     = (1 - c_n) / (1 - c_{n-1})
///   Omega(n) = (alpha - c_n) / (alpha - c_{n-1})
/// Stops with a truncation marker once a denominator vanishes.
StagewiseResult stagewise_from_cumulative(const CumulativeSeries& series);

/// (1-U)_n = 1 - prod_{k<=n} U(k).
std::vector<double> cumulative_from_stagewise(std::span<const double> u_stages);

/// alpha(n) = (alpha - 1 + P) / P with P = prod_{k<n} U(k); the product form of
/// the stage-wise job-offer ratio.
double stage_alpha_from_products(double alpha, std::span<const double> u_stages, std::size_t n);

/// epsilon_n = 1 - (1-U)_n for alpha >= 1, alpha - (1-U)_n otherwise.
std::vector<double> learning_curve(const CumulativeSeries& series);

/// alpha(n) under an n-independent Omega; requires 0 < alpha < 1, 0 < Omega < 1.
double invariant_omega_alpha(double alpha, double omega, int n);

/// alpha(n) under an n-independent U; requires alpha > 1, 0 < U < 1.
double invariant_u_alpha(double alpha, double u, int n);

/// A limit that is either a number, divergent, or undetermined at alpha = 1.
struct Limit {
  enum class Kind { finite, diverges, marginal };
  Kind kind = Kind::finite;
  double value = 0.0;

  static Limit of(double v) { return {Kind::finite, v}; }
  static Limit diverging() { return {Kind::diverges, 0.0}; }
  static Limit undetermined() { return {Kind::marginal, 0.0}; }
  bool operator==(const Limit&) const = default;
};

enum class MarketRegime {
  perfect_unemployment,    // alpha < 1
  marginal,                // alpha == 1
  perfect_labor_shortage,  // alpha > 1
};

struct AsymptoticLimits {
  MarketRegime regime = MarketRegime::marginal;
  Limit alpha_stage;
  Limit u_stage;
  Limit omega_stage;
  double cumulative_shortage = 0.0;  // lim Omega_n
};

AsymptoticLimits asymptotic_limits(double alpha);

const char* to_string(MarketRegime regime);

enum class PointKind { cumulative, stagewise };

struct UvPoint {
  std::string year_label;
  int stage = 0;
  double omega = 0.0;
  double u = 0.0;
};

struct SkippedYear {
  std::string year_label;
  std::string reason;
};

struct Trajectory {
  std::vector<UvPoint> points;
  std::vector<SkippedYear> skipped;
};

/// One (Omega, U) point per year at stage n, ordered by year label.
/// Cumulative points use (Omega_n, 1 - (1-U)_n), stage-wise points
/// (Omega(n), U(n)). Years too short for stage n are skipped with a note.
Trajectory uv_trajectory(std::span<const CumulativeSeries> years, int stage, PointKind kind);

/// alpha(n) - alpha(n-1) in closed form; its sign is the sign of alpha - 1
/// whenever the cumulative series grew at n-1.
double stage_alpha_gap(const CumulativeSeries& series, int n);

}  // namespace laborsim::analytics
