#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "laborsim/market_core.hpp"
#include "laborsim/random.hpp"

namespace laborsim {

/// One job-hunting stage n of a year.
struct StageRecord {
  int stage = 0;
  double alpha_stage = 0.0;     // V(n) / N(n) before the stage
  double u_stage = 0.0;         // unmatched fraction of the students entering stage n
  double omega_stage = 0.0;     // (U + alpha - 1) / alpha
  double cum_employment = 0.0;  // matched so far over the original N
  double error = 0.0;           // learning-curve value
  long remaining_students = 0;  // N(n+1)
  long remaining_vacancies = 0; // V(n+1)

  bool operator==(const StageRecord&) const = default;
};

struct StageRun {
  std::vector<StageRecord> records;
  std::vector<StepSummary> steps;  // raw market output, parallel to records
  MarketState final_state;
};

/// Successive size-reducing stages within one year. Matched students leave,
/// quotas shrink by the filled seats and closed companies drop out of the
/// choice set; gamma, beta and the letter budget never change. Stops early
/// once no students or no vacancies remain.
StageRun run_stage_pipeline(const MarketConfig& config, int n_max, RandomStream& rng,
                            const std::optional<std::vector<std::vector<int>>>& initial_history =
                                std::nullopt);

std::vector<StageRecord> run_stages(const MarketConfig& config, int n_max, RandomStream& rng);

/// Annual order parameter: one full-size market step per year, with the
/// application counts carried over as market history.
struct AnnualTrace {
  std::vector<double> u_values;  // U_t for t = 0..T-1
  std::size_t burn_in = 0;
  double average = 0.0;          // mean of U_t over t >= burn_in

  std::size_t horizon() const { return u_values.size(); }
};

/// Burn-in defaults to T/10.
AnnualTrace run_annual(const MarketConfig& config, int horizon, RandomStream& rng,
                       std::optional<std::size_t> burn_in = std::nullopt);

}  // namespace laborsim
