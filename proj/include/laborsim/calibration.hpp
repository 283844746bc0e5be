#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "laborsim/market_core.hpp"

namespace laborsim {

struct UEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::vector<double> replicate_values;  // time-averaged U per replicate, in replicate order
};

struct EstimateOptions {
  int replicates = 16;
  int horizon = 100;
  std::optional<std::size_t> burn_in;  // defaults to horizon / 10
  unsigned threads = 0;                // 0: hardware concurrency
};

/// Monte Carlo estimate of the annual order parameter U(gamma). Replicate r
/// runs with the seed RandomStream::derive_seed(config.seed, r), so repeated
/// calls with different gamma share their random streams.
UEstimate estimate_u(double gamma, const MarketConfig& config, const EstimateOptions& options);

struct CalibrationSearch {
  double gamma_max = 20.0;
  double tolerance = 0.05;  // stop once the gamma bracket is narrower than this
  int max_iterations = 40;
  EstimateOptions estimate;
  // Also stop when an estimate lies within two standard errors of the target.
  bool stop_within_noise = true;
};

struct CalibrationStep {
  double gamma = 0.0;
  double u = 0.0;
  double standard_error = 0.0;
  double bracket_low = 0.0;   // bracket in force when gamma was evaluated
  double bracket_high = 0.0;

  bool operator==(const CalibrationStep&) const = default;
};

enum class Termination { boundary, bracket_width, within_noise, max_iterations };

const char* to_string(Termination t);

struct CalibrationResult {
  double gamma_hat = 0.0;
  double bracket_low = 0.0;
  double bracket_high = 0.0;
  double target_u = 0.0;
  double achieved_u = 0.0;
  double achieved_standard_error = 0.0;
  int replicates = 0;
  int horizon = 0;
  int iterations = 0;
  Termination termination = Termination::bracket_width;
  std::vector<CalibrationStep> trace;

  bool operator==(const CalibrationResult&) const = default;
};

/// Solves U(gamma) = target_u for gamma in [0, gamma_max] by bisection on
/// Monte Carlo estimates, with beta and every other parameter held fixed.
/// Throws BracketingError when the target lies outside [U(0), U(gamma_max)]
/// beyond the noise band, and CalibrationDiagnosticError when the estimates
/// decrease in gamma by more than three standard errors.
CalibrationResult calibrate_gamma(double target_u, const MarketConfig& config,
                                  const CalibrationSearch& search);

}  // namespace laborsim
