#include "laborsim/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "laborsim/errors.hpp"
#include "laborsim/random.hpp"
#include "laborsim/stage_pipeline.hpp"

namespace laborsim {

namespace {

double run_replicate(const MarketConfig& config, const EstimateOptions& options, int r) {
  RandomStream rng(RandomStream::derive_seed(config.seed, static_cast<std::uint64_t>(r)));
  return run_annual(config, options.horizon, rng, options.burn_in).average;
}

bool within_noise(double u, double se, double target) {
  return std::abs(u - target) <= 2.0 * se;
}

std::string format_interval(double lo, double hi) {
  std::ostringstream os;
  os.precision(6);
  os << '[' << lo << ", " << hi << ']';
  return os.str();
}

}  // namespace

const char* to_string(Termination t) {
  switch (t) {
    case Termination::boundary:
      return "boundary";
    case Termination::bracket_width:
      return "bracket_width";
    case Termination::within_noise:
      return "within_noise";
    case Termination::max_iterations:
      return "max_iterations";
  }
  return "unknown";
}

UEstimate estimate_u(double gamma, const MarketConfig& config, const EstimateOptions& options) {
  if (options.replicates < 1) throw ConfigError("replicates must be at least 1");
  MarketConfig cfg = config;
  cfg.gamma = gamma;
  cfg.validate();

  const auto count = static_cast<std::size_t>(options.replicates);
  UEstimate est;
  est.replicate_values.assign(count, 0.0);

  unsigned workers = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(count));
  if (workers == 1) {
    for (std::size_t r = 0; r < count; ++r) {
      est.replicate_values[r] = run_replicate(cfg, options, static_cast<int>(r));
    }
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t r = w; r < count; r += workers) {
            est.replicate_values[r] = run_replicate(cfg, options, static_cast<int>(r));
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  // Ordered reduction keeps the result independent of the thread count.
  double sum = 0.0;
  for (double v : est.replicate_values) sum += v;
  est.mean = sum / static_cast<double>(count);
  if (count > 1) {
    double ss = 0.0;
    for (double v : est.replicate_values) ss += (v - est.mean) * (v - est.mean);
    est.standard_error = std::sqrt(ss / static_cast<double>(count - 1) / static_cast<double>(count));
  }
  return est;
}

CalibrationResult calibrate_gamma(double target_u, const MarketConfig& config,
                                  const CalibrationSearch& search) {
  if (!(target_u >= 0.0 && target_u <= 1.0)) throw ConfigError("target U must lie in [0, 1]");
  if (!(search.gamma_max > 0.0)) throw ConfigError("gamma_max must be positive");
  if (!(search.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (search.max_iterations < 0) throw ConfigError("max_iterations must be non-negative");

  CalibrationResult res;
  res.target_u = target_u;
  res.replicates = search.estimate.replicates;
  res.horizon = search.estimate.horizon;

  double lo = 0.0;
  double hi = search.gamma_max;
  auto at_lo = estimate_u(lo, config, search.estimate);
  auto at_hi = estimate_u(hi, config, search.estimate);

  auto check_order = [&](const UEstimate& a, const UEstimate& b, double ga, double gb) {
    const double band = 3.0 * std::hypot(a.standard_error, b.standard_error);
    if (a.mean > b.mean + band) {
      std::ostringstream os;
      os << "estimated U decreases from " << a.mean << " at gamma=" << ga << " to " << b.mean
         << " at gamma=" << gb << " beyond three standard errors; increase replicates or horizon";
      throw CalibrationDiagnosticError(os.str());
    }
  };
  check_order(at_lo, at_hi, lo, hi);

  const double feasible_lo = at_lo.mean - 2.0 * at_lo.standard_error;
  const double feasible_hi = at_hi.mean + 2.0 * at_hi.standard_error;
  if (target_u < feasible_lo || target_u > feasible_hi) {
    std::ostringstream os;
    os.precision(6);
    os << "target U=" << target_u << " outside the feasible interval "
       << format_interval(at_lo.mean, at_hi.mean) << " for gamma in "
       << format_interval(0.0, search.gamma_max);
    throw BracketingError(os.str(), at_lo.mean, at_hi.mean);
  }

  auto finish_at = [&](double gamma, const UEstimate& e, Termination why) {
    res.gamma_hat = gamma;
    res.achieved_u = e.mean;
    res.achieved_standard_error = e.standard_error;
    res.bracket_low = lo;
    res.bracket_high = hi;
    res.termination = why;
    res.iterations = static_cast<int>(res.trace.size());
    return res;
  };

  if (target_u <= at_lo.mean ||
      (search.stop_within_noise && within_noise(at_lo.mean, at_lo.standard_error, target_u))) {
    return finish_at(lo, at_lo, Termination::boundary);
  }
  if (target_u >= at_hi.mean ||
      (search.stop_within_noise && within_noise(at_hi.mean, at_hi.standard_error, target_u))) {
    return finish_at(hi, at_hi, Termination::boundary);
  }

  Termination why = Termination::max_iterations;
  for (int it = 0; it < search.max_iterations; ++it) {
    if (hi - lo < search.tolerance) {
      why = Termination::bracket_width;
      break;
    }
    const double mid = 0.5 * (lo + hi);
    auto est = estimate_u(mid, config, search.estimate);
    res.trace.push_back({mid, est.mean, est.standard_error, lo, hi});
    check_order(at_lo, est, lo, mid);
    check_order(est, at_hi, mid, hi);
    if (search.stop_within_noise && within_noise(est.mean, est.standard_error, target_u)) {
      return finish_at(mid, est, Termination::within_noise);
    }
    if (est.mean < target_u) {
      lo = mid;
      at_lo = std::move(est);
    } else {
      hi = mid;
      at_hi = std::move(est);
    }
  }
  if (why == Termination::max_iterations && hi - lo < search.tolerance) {
    why = Termination::bracket_width;
  }

  const bool take_lo = std::abs(at_lo.mean - target_u) <= std::abs(at_hi.mean - target_u);
  return take_lo ? finish_at(lo, at_lo, why) : finish_at(hi, at_hi, why);
}

}  // namespace laborsim
