#include "laborsim/market_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>

#include "laborsim/errors.hpp"

namespace laborsim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Rejection draws tried against the full distribution before falling back to
// an exact scan over the companies a student has not picked yet.
constexpr int kRejectionAttempts = 4;

// Below this the linear weights lose precision and the scan is redone in log space.
constexpr double kTinyWeight = 1e-280;

long sum_of(std::span<const int> values) {
  return std::accumulate(values.begin(), values.end(), 0L);
}

}  // namespace

void MarketConfig::validate() const {
  if (n_students < 1) throw ConfigError("n_students must be at least 1");
  if (n_companies < 1) throw ConfigError("n_companies must be at least 1");
  if (letters_per_student < 1) throw ConfigError("letters_per_student must be at least 1");
  if (letters_per_student > n_companies) {
    throw ConfigError("letters_per_student (" + std::to_string(letters_per_student) +
                      ") exceeds n_companies (" + std::to_string(n_companies) + ")");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be finite and >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be finite and >= 0");
  if (history_depth < 1) throw ConfigError("history_depth must be at least 1");
  if (!history_weights.empty()) {
    if (static_cast<int>(history_weights.size()) != history_depth) {
      throw ConfigError("history_weights must have history_depth entries");
    }
    for (double w : history_weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("history weights must be >= 0");
    }
  }
  if (quotas.empty()) {
    if (!(job_offer_ratio > 0.0) || !std::isfinite(job_offer_ratio)) {
      throw ConfigError("job_offer_ratio must be positive");
    }
    const auto derived = uniform_quotas(n_students, n_companies, job_offer_ratio);
    const double slack = std::abs(static_cast<double>(sum_of(derived)) -
                                  job_offer_ratio * static_cast<double>(n_students));
    if (slack >= n_companies) throw ConfigError("quota rounding slack exceeds K");
  } else {
    if (static_cast<int>(quotas.size()) != n_companies) {
      throw ConfigError("quotas must have n_companies entries");
    }
    for (int q : quotas) {
      if (q < 0) throw ConfigError("quotas must be non-negative");
    }
  }
}

std::vector<int> MarketConfig::resolved_quotas() const {
  return quotas.empty() ? uniform_quotas(n_students, n_companies, job_offer_ratio) : quotas;
}

std::vector<double> MarketConfig::resolved_history_weights() const {
  if (!history_weights.empty()) return history_weights;
  std::vector<double> weights(static_cast<std::size_t>(std::max(history_depth, 1)), 0.0);
  weights.front() = beta;
  return weights;
}

long MarketConfig::total_vacancy() const {
  return sum_of(resolved_quotas());
}

double MarketConfig::alpha() const {
  return static_cast<double>(total_vacancy()) / static_cast<double>(n_students);
}

std::vector<int> uniform_quotas(int n_students, int n_companies, double alpha) {
  if (n_students < 1 || n_companies < 1) throw ConfigError("market size must be positive");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be positive");
  const long target = std::lround(alpha * static_cast<double>(n_students));
  const long base = target / n_companies;
  if (base == 0) return std::vector<int>(static_cast<std::size_t>(n_companies), 1);
  std::vector<int> q(static_cast<std::size_t>(n_companies), static_cast<int>(base));
  const long remainder = target - base * n_companies;
  for (long k = 0; k < remainder; ++k) ++q[static_cast<std::size_t>(k)];
  return q;
}

MarketState MarketState::cold_start(const MarketConfig& config) {
  config.validate();
  MarketState state;
  state.quotas = config.resolved_quotas();
  state.application_history.assign(static_cast<std::size_t>(config.history_depth), state.quotas);
  state.active_students = config.n_students;
  state.filled.assign(state.quotas.size(), 0);
  state.offers.assign(state.quotas.size(), 0);
  state.student_matched.assign(static_cast<std::size_t>(config.n_students), 0);
  return state;
}

long StepSummary::total_offers() const { return sum_of(offers); }
long StepSummary::total_filled() const { return sum_of(filled); }

double ranking_factor(int k, int n_companies) {
  if (n_companies < 1 || k < 1 || k > n_companies) {
    throw DomainError("company index " + std::to_string(k) + " outside 1.." +
                      std::to_string(n_companies));
  }
  return 1.0 + static_cast<double>(k) / static_cast<double>(n_companies);
}

double local_mismatch(int quota, int applications, long total_vacancy,
                      MismatchNormalization mode) {
  const double gap = std::abs(static_cast<double>(quota) - static_cast<double>(applications));
  if (mode == MismatchNormalization::raw) return gap;
  if (total_vacancy <= 0) throw DomainError("total vacancy must be positive for normalization");
  return gap / static_cast<double>(total_vacancy);
}

double energy(int k, int n_companies, double gamma, std::span<const double> weights,
              std::span<const double> mismatch_history) {
  if (weights.size() != mismatch_history.size()) {
    throw DomainError("history weights and mismatch history differ in length");
  }
  double e = -gamma * std::log(ranking_factor(k, n_companies));
  for (std::size_t l = 0; l < weights.size(); ++l) e += weights[l] * mismatch_history[l];
  return e;
}

double energy(int k, int n_companies, double gamma, double beta,
              std::span<const double> mismatch_history) {
  double e = -gamma * std::log(ranking_factor(k, n_companies));
  if (!mismatch_history.empty()) e += beta * mismatch_history.front();
  return e;
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> p(scores.size(), 0.0);
  double top = kNegInf;
  for (double s : scores) top = std::max(top, s);
  if (top == kNegInf) return p;
  double total = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    p[k] = scores[k] == kNegInf ? 0.0 : std::exp(scores[k] - top);
    total += p[k];
  }
  for (double& x : p) x /= total;
  return p;
}

std::vector<double> attraction_scores(const MarketState& state, const MarketConfig& config) {
  const int n_companies = static_cast<int>(state.quotas.size());
  const auto weights = config.resolved_history_weights();
  if (state.application_history.size() < weights.size()) {
    throw ConfigError("market state holds less history than history_depth");
  }
  const long vacancy = sum_of(state.quotas);
  std::vector<double> scores(state.quotas.size());
  std::vector<double> mismatch(weights.size());
  for (int idx = 0; idx < n_companies; ++idx) {
    const auto k = static_cast<std::size_t>(idx);
    if (state.exclude_closed_companies && state.quotas[k] <= 0) {
      scores[k] = kNegInf;
      continue;
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
      // Terms with zero weight never need the (possibly undefined) normalized gap.
      mismatch[l] = weights[l] == 0.0
                        ? 0.0
                        : local_mismatch(state.quotas[k], state.application_history[l][k], vacancy,
                                         config.mismatch_normalization);
    }
    scores[k] = -energy(idx + 1, n_companies, config.gamma, weights, mismatch);
  }
  return scores;
}

std::vector<double> aggregation_probabilities(const MarketState& state,
                                              const MarketConfig& config) {
  return softmax(attraction_scores(state, config));
}

ApplicationMatrix sample_applications(std::span<const double> probabilities, int students,
                                      int letters, RandomStream& rng) {
  std::vector<double> scores(probabilities.size());
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    scores[k] = probabilities[k] > 0.0 ? std::log(probabilities[k]) : kNegInf;
  }
  return sample_applications_from_scores(scores, students, letters, rng);
}

ApplicationMatrix sample_applications_from_scores(std::span<const double> scores, int students,
                                                  int letters, RandomStream& rng) {
  const int n_companies = static_cast<int>(scores.size());
  if (letters < 1) throw ConfigError("letters per student must be at least 1");
  if (letters > n_companies) {
    throw ConfigError("letters per student (" + std::to_string(letters) +
                      ") exceeds the number of companies (" + std::to_string(n_companies) + ")");
  }
  if (students < 0) throw ConfigError("student count must be non-negative");

  double top = kNegInf;
  int eligible = 0;
  for (double s : scores) {
    if (s != kNegInf) {
      ++eligible;
      top = std::max(top, s);
    }
  }

  ApplicationMatrix out;
  out.students = students;
  out.letters = std::min(letters, eligible);
  out.counts.assign(scores.size(), 0);
  out.choices.reserve(static_cast<std::size_t>(students) * out.letters);
  if (out.letters == 0) return out;

  std::vector<double> weight(scores.size(), 0.0);
  std::vector<double> cumulative(scores.size(), 0.0);
  double running = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (scores[k] != kNegInf) weight[k] = std::exp(scores[k] - top);
    running += weight[k];
    cumulative[k] = running;
  }
  const double total = running;

  std::vector<char> picked(scores.size(), 0);
  std::vector<double> rescaled(scores.size(), 0.0);

  // Exact draw from the companies this student has not picked yet.
  auto draw_remaining = [&]() -> int {
    double remaining = 0.0;
    double largest = 0.0;
    int last = -1;
    for (int k = 0; k < n_companies; ++k) {
      if (picked[k] || scores[k] == kNegInf) continue;
      remaining += weight[k];
      largest = std::max(largest, weight[k]);
      last = k;
    }
    const double* w = weight.data();
    if (largest < kTinyWeight) {
      double local_top = kNegInf;
      for (int k = 0; k < n_companies; ++k) {
        if (!picked[k] && scores[k] != kNegInf) local_top = std::max(local_top, scores[k]);
      }
      remaining = 0.0;
      for (int k = 0; k < n_companies; ++k) {
        rescaled[k] = (!picked[k] && scores[k] != kNegInf) ? std::exp(scores[k] - local_top) : 0.0;
        remaining += rescaled[k];
      }
      w = rescaled.data();
    }
    double u = rng.uniform01() * remaining;
    for (int k = 0; k < n_companies; ++k) {
      if (picked[k] || scores[k] == kNegInf) continue;
      u -= w[k];
      if (u < 0.0) return k;
    }
    return last;
  };

  for (int i = 0; i < students; ++i) {
    const std::size_t row_begin = out.choices.size();
    for (int j = 0; j < out.letters; ++j) {
      int choice = -1;
      for (int attempt = 0; attempt < kRejectionAttempts; ++attempt) {
        const double u = rng.uniform01() * total;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) continue;
        const auto k = static_cast<int>(it - cumulative.begin());
        if (!picked[k]) {
          choice = k;
          break;
        }
      }
      if (choice < 0) choice = draw_remaining();
      picked[choice] = 1;
      out.choices.push_back(choice);
      ++out.counts[choice];
    }
    for (std::size_t p = row_begin; p < out.choices.size(); ++p) picked[out.choices[p]] = 0;
  }
  return out;
}

SelectionResult resolve_selection(const ApplicationMatrix& applications,
                                  std::span<const int> quotas, RandomStream& rng) {
  const std::size_t n_companies = quotas.size();
  if (applications.counts.size() != n_companies) {
    throw ConfigError("application counts and quotas differ in length");
  }
  SelectionResult result;
  result.accepted.assign(applications.choices.size(), 0);
  result.offers.assign(n_companies, 0);
  result.student_matched.assign(static_cast<std::size_t>(applications.students), 0);

  // Letter positions grouped by company, in student order.
  std::vector<std::size_t> start(n_companies + 1, 0);
  for (std::size_t k = 0; k < n_companies; ++k) {
    start[k + 1] = start[k] + static_cast<std::size_t>(applications.counts[k]);
  }
  std::vector<std::size_t> slots(applications.choices.size());
  std::vector<std::size_t> fill(start.begin(), start.end() - 1);
  for (std::size_t pos = 0; pos < applications.choices.size(); ++pos) {
    slots[fill[static_cast<std::size_t>(applications.choices[pos])]++] = pos;
  }

  for (std::size_t k = 0; k < n_companies; ++k) {
    if (quotas[k] < 0) throw ConfigError("quotas must be non-negative");
    const std::size_t begin = start[k];
    const std::size_t count = start[k + 1] - begin;
    const auto quota = static_cast<std::size_t>(quotas[k]);
    std::size_t take = count;
    if (count > quota) {
      // Partial Fisher-Yates: the first `quota` slots become a uniform sample.
      for (std::size_t j = 0; j < quota; ++j) {
        const std::size_t r = j + static_cast<std::size_t>(rng.below(count - j));
        std::swap(slots[begin + j], slots[begin + r]);
      }
      take = quota;
    }
    for (std::size_t j = 0; j < take; ++j) result.accepted[slots[begin + j]] = 1;
    result.offers[k] = static_cast<int>(take);
  }

  for (int i = 0; i < applications.students; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) * applications.letters;
    for (int j = 0; j < applications.letters; ++j) {
      if (result.accepted[row + j]) {
        result.student_matched[static_cast<std::size_t>(i)] = 1;
        ++result.matched_students;
        break;
      }
    }
  }
  return result;
}

std::vector<int> commit_offers(const ApplicationMatrix& applications,
                               const SelectionResult& selection, std::span<const double> scores) {
  std::vector<int> hires(applications.counts.size(), 0);
  for (int i = 0; i < applications.students; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) * applications.letters;
    int best = -1;
    for (int j = 0; j < applications.letters; ++j) {
      if (!selection.accepted[row + j]) continue;
      const int k = applications.choices[row + j];
      if (best < 0 || scores[k] > scores[best] || (scores[k] == scores[best] && k > best)) {
        best = k;
      }
    }
    if (best >= 0) ++hires[static_cast<std::size_t>(best)];
  }
  return hires;
}

StepResult market_step(const MarketState& state, const MarketConfig& config, RandomStream& rng) {
  const auto scores = attraction_scores(state, config);
  const int letters = std::min(config.letters_per_student, static_cast<int>(scores.size()));
  auto applications =
      sample_applications_from_scores(scores, state.active_students, letters, rng);
  auto selection = resolve_selection(applications, state.quotas, rng);

  StepResult out;
  auto& summary = out.summary;
  summary.students = state.active_students;
  summary.matched = selection.matched_students;
  summary.quotas = state.quotas;
  summary.applications = applications.counts;
  summary.offers = selection.offers;
  summary.hires = commit_offers(applications, selection, scores);
  summary.filled = config.seat_accounting == SeatAccounting::release_declined ? summary.hires
                                                                                : summary.offers;

  auto& next = out.next;
  next.quotas = state.quotas;
  next.application_history.reserve(state.application_history.size());
  next.application_history.push_back(applications.counts);
  for (std::size_t l = 0; l + 1 < state.application_history.size(); ++l) {
    next.application_history.push_back(state.application_history[l]);
  }
  next.active_students = state.active_students;
  next.filled = summary.filled;
  next.offers = summary.offers;
  next.student_matched = std::move(selection.student_matched);
  next.exclude_closed_companies = state.exclude_closed_companies;
  return out;
}

}  // namespace laborsim
