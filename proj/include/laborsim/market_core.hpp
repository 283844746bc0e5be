#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "laborsim/random.hpp"

namespace laborsim {

/// How the application gap |v*_k - v_k| enters the attraction of a company.
enum class MismatchNormalization {
  raw,               // |v*_k - v_k(t-1)|, the form used by the aggregation probability
  by_total_vacancy,  // |v*_k - v_k(t-1)| / V
};

/// What happens to the extra offers held by a student accepted by several companies.
enum class SeatAccounting {
  release_declined,    // student keeps one offer, the other seats stay open
  consume_all_offers,  // every offer consumes a seat
};

struct MarketConfig {
  int n_students = 2000;
  int n_companies = 100;
  double job_offer_ratio = 1.0;
  // Per-company quotas v*_k. Empty means uniform quotas derived from job_offer_ratio.
  std::vector<int> quotas;
  double gamma = 1.0;
  double beta = 1.0;
  int letters_per_student = 10;
  MismatchNormalization mismatch_normalization = MismatchNormalization::raw;
  SeatAccounting seat_accounting = SeatAccounting::release_declined;
  std::uint64_t seed = 0;
  int history_depth = 1;
  // Market-history weights for h_k(t-1) ... h_k(t-depth). Empty means (beta, 0, ..., 0).
  std::vector<double> history_weights;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  std::vector<int> resolved_quotas() const;
  std::vector<double> resolved_history_weights() const;
  long total_vacancy() const;
  /// Realized job-offer ratio V / N.
  double alpha() const;
};

/// Uniform quotas floor(round(alpha*N)/K), with the remainder given to the
/// lowest-index companies so that the quotas sum to round(alpha*N). Every
/// quota is at least one.
std::vector<int> uniform_quotas(int n_students, int n_companies, double alpha);

struct MarketState {
  std::vector<int> quotas;  // v*_k, possibly reduced by earlier stages
  // application_history[l][k] = v_k(t-1-l); size is the history depth.
  std::vector<std::vector<int>> application_history;
  int active_students = 0;
  std::vector<int> filled;  // m_k for the last step
  std::vector<int> offers;  // acceptances issued by k in the last step
  std::vector<char> student_matched;
  // Companies whose quota is exhausted drop out of the choice set.
  bool exclude_closed_companies = false;

  const std::vector<int>& prev_applications() const { return application_history.front(); }

  /// Full market with zero initial mismatch: v_k(-1) = v*_k.
  static MarketState cold_start(const MarketConfig& config);
};

/// Rows of distinct company indices (0-based), one row per student.
struct ApplicationMatrix {
  int students = 0;
  int letters = 0;
  std::vector<int> choices;  // students * letters
  std::vector<int> counts;   // v_k

  std::span<const int> row(int student) const {
    return {choices.data() + static_cast<std::size_t>(student) * letters,
            static_cast<std::size_t>(letters)};
  }
};

struct SelectionResult {
  std::vector<char> accepted;  // parallel to ApplicationMatrix::choices
  std::vector<int> offers;     // per company, sum_i s_ik
  std::vector<char> student_matched;
  int matched_students = 0;
};

struct StepSummary {
  int students = 0;
  int matched = 0;
  std::vector<int> quotas;        // v*_k in force during the step
  std::vector<int> applications;  // v_k(t)
  std::vector<int> offers;        // sum_i s_ik(t)
  std::vector<int> hires;         // one seat per matched student
  std::vector<int> filled;        // m_k under the configured seat accounting

  long total_offers() const;
  long total_filled() const;
};

struct StepResult {
  MarketState next;
  StepSummary summary;
};

/// Ranking factor 1 + k/K for the 1-based company index k.
double ranking_factor(int k, int n_companies);

double local_mismatch(int quota, int applications, long total_vacancy, MismatchNormalization mode);

/// -gamma log(1 + k/K) + sum_l weights[l] * mismatch_history[l].
double energy(int k, int n_companies, double gamma, std::span<const double> weights,
              std::span<const double> mismatch_history);

/// Energy with the history vector (beta, 0, ..., 0).
double energy(int k, int n_companies, double gamma, double beta,
              std::span<const double> mismatch_history);

/// Max-shifted softmax. Entries equal to -inf get probability zero.
std::vector<double> softmax(std::span<const double> scores);

/// -E_k for every company, or -inf for companies outside the choice set.
std::vector<double> attraction_scores(const MarketState& state, const MarketConfig& config);

/// P_k(t) = softmax(-E_1, ..., -E_K).
std::vector<double> aggregation_probabilities(const MarketState& state, const MarketConfig& config);

/// Each student draws `letters` distinct companies by sequential weighted
/// sampling without replacement. Companies with zero probability are never
/// drawn; when fewer than `letters` remain eligible the row is truncated.
ApplicationMatrix sample_applications(std::span<const double> probabilities, int students,
                                      int letters, RandomStream& rng);

/// Same draw, with attraction given in log space so that weights far below the
/// leader keep their relative proportions.
ApplicationMatrix sample_applications_from_scores(std::span<const double> scores, int students,
                                                  int letters, RandomStream& rng);

/// Company-side random selection: applicants to an undersubscribed company are
/// all accepted, otherwise exactly quota of them are drawn uniformly.
SelectionResult resolve_selection(const ApplicationMatrix& applications,
                                  std::span<const int> quotas, RandomStream& rng);

/// Seats taken when each matched student keeps the single offer with the
/// highest score (ties go to the higher-ranked company).
std::vector<int> commit_offers(const ApplicationMatrix& applications,
                               const SelectionResult& selection, std::span<const double> scores);

/// One step: aggregation probabilities, application letters, selection.
/// The returned state carries this step's application counts as history.
StepResult market_step(const MarketState& state, const MarketConfig& config, RandomStream& rng);

}  // namespace laborsim
