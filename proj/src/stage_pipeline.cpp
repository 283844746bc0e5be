#include "laborsim/stage_pipeline.hpp"

#include <numeric>

#include "laborsim/errors.hpp"

namespace laborsim {

namespace {

long sum_of(const std::vector<int>& values) {
  return std::accumulate(values.begin(), values.end(), 0L);
}

}  // namespace

StageRun run_stage_pipeline(const MarketConfig& config, int n_max, RandomStream& rng,
                            const std::optional<std::vector<std::vector<int>>>& initial_history) {
  if (n_max < 1) throw ConfigError("stage count must be at least 1");
  MarketState state = MarketState::cold_start(config);
  if (initial_history) {
    if (initial_history->size() != state.application_history.size()) {
      throw ConfigError("initial history depth does not match history_depth");
    }
    for (const auto& counts : *initial_history) {
      if (counts.size() != state.quotas.size()) {
        throw ConfigError("initial history must have one count per company");
      }
    }
    state.application_history = *initial_history;
  }
  state.exclude_closed_companies = true;

  const long n_total = config.n_students;
  const double alpha0 = static_cast<double>(sum_of(state.quotas)) / static_cast<double>(n_total);
  long students = n_total;
  long vacancies = sum_of(state.quotas);
  long matched_total = 0;

  StageRun run;
  for (int n = 0; n < n_max; ++n) {
    if (students == 0 || vacancies == 0) break;
    state.active_students = static_cast<int>(students);
    auto step = market_step(state, config, rng);
    const auto& summary = step.summary;

    StageRecord rec;
    rec.stage = n;
    rec.alpha_stage = static_cast<double>(vacancies) / static_cast<double>(students);
    rec.u_stage = 1.0 - static_cast<double>(summary.matched) / static_cast<double>(students);
    rec.omega_stage = (rec.u_stage + rec.alpha_stage - 1.0) / rec.alpha_stage;
    matched_total += summary.matched;
    rec.cum_employment = static_cast<double>(matched_total) / static_cast<double>(n_total);
    rec.error = alpha0 >= 1.0 ? 1.0 - rec.cum_employment : alpha0 - rec.cum_employment;

    students -= summary.matched;
    vacancies -= summary.total_filled();
    rec.remaining_students = students;
    rec.remaining_vacancies = vacancies;

    state = std::move(step.next);
    for (std::size_t k = 0; k < state.quotas.size(); ++k) state.quotas[k] -= summary.filled[k];

    run.records.push_back(rec);
    run.steps.push_back(summary);
  }
  state.active_students = static_cast<int>(students);
  run.final_state = std::move(state);
  return run;
}

std::vector<StageRecord> run_stages(const MarketConfig& config, int n_max, RandomStream& rng) {
  return run_stage_pipeline(config, n_max, rng).records;
}

AnnualTrace run_annual(const MarketConfig& config, int horizon, RandomStream& rng,
                       std::optional<std::size_t> burn_in) {
  if (horizon < 1) throw ConfigError("horizon must be at least 1");
  AnnualTrace trace;
  trace.burn_in = burn_in.value_or(static_cast<std::size_t>(horizon) / 10);
  if (trace.burn_in >= static_cast<std::size_t>(horizon)) {
    throw ConfigError("burn-in must be shorter than the horizon");
  }
  trace.u_values.reserve(static_cast<std::size_t>(horizon));

  MarketState state = MarketState::cold_start(config);
  const auto full_quotas = state.quotas;
  const auto n = static_cast<double>(config.n_students);
  for (int t = 0; t < horizon; ++t) {
    // New cohort each year; only the application history survives.
    state.quotas = full_quotas;
    state.active_students = config.n_students;
    auto step = market_step(state, config, rng);
    trace.u_values.push_back(1.0 - static_cast<double>(step.summary.matched) / n);
    state = std::move(step.next);
  }

  double sum = 0.0;
  for (std::size_t t = trace.burn_in; t < trace.u_values.size(); ++t) sum += trace.u_values[t];
  trace.average = sum / static_cast<double>(trace.u_values.size() - trace.burn_in);
  return trace;
}

}  // namespace laborsim
