#include "laborsim/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <CLI11.hpp>
#include <json.hpp>

#include "laborsim/analytics.hpp"
#include "laborsim/calibration.hpp"
#include "laborsim/data_io.hpp"
#include "laborsim/errors.hpp"
#include "laborsim/stage_pipeline.hpp"

namespace laborsim::cli {

namespace {

using nlohmann::json;

// Shortest text that parses back to the same double.
std::string exact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
  if (!f) throw std::runtime_error("failed writing " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

void write_manifest(const std::string& command, const std::vector<std::string>& args,
                    const json& config, std::uint64_t seed, const std::string& out) {
  const json m{{"artifact", "laborsim"},
               {"version", kVersion},
               {"command", command},
               {"args", args},
               {"config", config},
               {"seed", seed},
               {"outputs", json::array({out})}};
  write_file(manifest_path(out), m.dump(2) + "\n");
}

// Options shared by the commands that build a market.
struct MarketFlags {
  int students = 2000;
  int companies = 100;
  double alpha = 1.0;
  double gamma = 1.0;
  double beta = 1.0;
  int letters = 10;
  int quota = -1;  // uniform per-company quota override
  int history_depth = 1;
  std::string mismatch = "raw";
  std::string seats = "release";
  std::uint64_t seed = 1;

  void add_to(CLI::App& app, bool with_gamma) {
    app.add_option("--students", students, "number of students N")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--companies", companies, "number of companies K")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--alpha", alpha, "job-offer ratio V/N")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    if (with_gamma) {
      app.add_option("--gamma", gamma, "ranking preference")
          ->check(CLI::NonNegativeNumber)
          ->capture_default_str();
    }
    app.add_option("--beta", beta, "market-history preference")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--letters", letters, "application letters per student")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--quota", quota, "uniform quota per company (overrides --alpha)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--history-depth", history_depth, "stored market-history depth")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--mismatch", mismatch, "gap normalization inside the softmax")
        ->check(CLI::IsMember({"raw", "by_total_vacancy"}))
        ->capture_default_str();
    app.add_option("--seat-accounting", seats, "extra offers of multi-accepted students")
        ->check(CLI::IsMember({"release", "consume"}))
        ->capture_default_str();
    app.add_option("--seed", seed, "random seed")->envname("LABORSIM_SEED")->capture_default_str();
  }

  MarketConfig config() const {
    MarketConfig c;
    c.n_students = students;
    c.n_companies = companies;
    c.job_offer_ratio = alpha;
    if (quota >= 0) c.quotas.assign(static_cast<std::size_t>(companies), quota);
    c.gamma = gamma;
    c.beta = beta;
    c.letters_per_student = letters;
    c.history_depth = history_depth;
    c.mismatch_normalization = mismatch == "raw" ? MismatchNormalization::raw
                                                 : MismatchNormalization::by_total_vacancy;
    c.seat_accounting = seats == "release" ? SeatAccounting::release_declined
                                           : SeatAccounting::consume_all_offers;
    c.seed = seed;
    c.validate();
    return c;
  }

  std::vector<std::string> args(bool with_gamma) const {
    std::vector<std::string> a{"--students", std::to_string(students), "--companies",
                               std::to_string(companies), "--alpha", exact(alpha)};
    if (with_gamma) a.insert(a.end(), {"--gamma", exact(gamma)});
    a.insert(a.end(), {"--beta", exact(beta), "--letters", std::to_string(letters)});
    if (quota >= 0) a.insert(a.end(), {"--quota", std::to_string(quota)});
    a.insert(a.end(), {"--history-depth", std::to_string(history_depth), "--mismatch", mismatch,
                       "--seat-accounting", seats, "--seed", std::to_string(seed)});
    return a;
  }

  json describe(bool with_gamma) const {
    const auto c = config();
    json j{{"n_students", students},
           {"n_companies", companies},
           {"job_offer_ratio", alpha},
           {"realized_job_offer_ratio", c.alpha()},
           {"total_vacancy", c.total_vacancy()},
           {"beta", beta},
           {"letters_per_student", letters},
           {"history_depth", history_depth},
           {"mismatch_normalization", mismatch},
           {"seat_accounting", seats}};
    if (with_gamma) j["gamma"] = gamma;
    if (quota >= 0) j["quota_per_company"] = quota;
    return j;
  }
};

void print_stage_table(const std::vector<StageRecord>& records, std::ostream& out) {
  out << std::setw(6) << "stage" << std::setw(12) << "alpha(n)" << std::setw(10) << "U(n)"
      << std::setw(11) << "Omega(n)" << std::setw(10) << "(1-U)_n" << std::setw(10) << "eps_n"
      << std::setw(10) << "N(n+1)" << std::setw(10) << "V(n+1)" << '\n';
  out << std::fixed;
  for (const auto& r : records) {
    out << std::setw(6) << r.stage << std::setw(12) << std::setprecision(4) << r.alpha_stage
        << std::setw(10) << r.u_stage << std::setw(11) << r.omega_stage << std::setw(10)
        << r.cum_employment << std::setw(10) << r.error << std::setw(10) << r.remaining_students
        << std::setw(10) << r.remaining_vacancies << '\n';
  }
  out << std::defaultfloat;
}

std::string format_limit(const analytics::Limit& l) {
  switch (l.kind) {
    case analytics::Limit::Kind::finite:
      return io::format_number(l.value);
    case analytics::Limit::Kind::diverges:
      return "diverges";
    case analytics::Limit::Kind::marginal:
      return "marginal";
  }
  return "?";
}

struct Runner {
  std::ostream& out;
  std::ostream& err;

  int simulate(const MarketFlags& m, int stages, const std::string& format,
               const std::string& out_path) {
    const auto config = m.config();
    const auto fmt = io::parse_format(format);
    RandomStream rng(config.seed);
    const auto records = run_stages(config, stages, rng);
    const auto text = io::write_stage_records(records, fmt);
    if (out_path.empty()) {
      out << text;
      return kSuccess;
    }
    write_file(out_path, text);
    auto args = std::vector<std::string>{"simulate"};
    const auto margs = m.args(true);
    args.insert(args.end(), margs.begin(), margs.end());
    args.insert(args.end(), {"--stages", std::to_string(stages), "--format", format});
    auto cfg = m.describe(true);
    cfg["stages"] = stages;
    write_manifest("simulate", args, cfg, m.seed, out_path);
    print_stage_table(records, out);
    out << "wrote " << out_path << " and " << manifest_path(out_path) << '\n';
    return kSuccess;
  }

  int analyze(const std::string& input, const std::string& mode, int stage,
              const std::string& points, const std::string& format, const std::string& out_path) {
    const auto fmt = io::parse_format(format);
    const auto ds = io::read_employment_csv(input);
    std::string text;
    if (mode == "stagewise") {
      for (const auto& s : ds.records) {
        const auto sw = analytics::stagewise_from_cumulative(s);
        if (sw.truncated_at) {
          err << "note: " << s.year_label << " stage-wise quantities stop at stage "
              << *sw.truncated_at
              << (sw.truncation == analytics::Truncation::saturated ? " (all students employed)"
                                                                    : " (no vacancies left)")
              << '\n';
        }
      }
      text = io::write_stagewise_report(ds.records, fmt);
    } else if (mode == "trajectory") {
      const auto kind =
          points == "cumulative" ? analytics::PointKind::cumulative : analytics::PointKind::stagewise;
      const auto traj = analytics::uv_trajectory(ds.records, stage, kind);
      for (const auto& s : traj.skipped) err << "warning: skipped " << s.year_label << ": " << s.reason << '\n';
      text = io::write_trajectory(traj, kind, fmt);
    } else {
      text = io::write_learning_curves(ds.records, fmt);
    }
    if (out_path.empty()) {
      out << text;
      return kSuccess;
    }
    write_file(out_path, text);
    std::vector<std::string> args{"analyze", "--input", input, "--mode", mode, "--stage",
                                  std::to_string(stage), "--points", points, "--format", format};
    const json cfg{{"input", input}, {"mode", mode}, {"stage", stage}, {"points", points}};
    write_manifest("analyze", args, cfg, 0, out_path);
    out << "wrote " << out_path << " and " << manifest_path(out_path) << '\n';
    return kSuccess;
  }

  int calibrate(const MarketFlags& m, double target, const CalibrationSearch& search,
                const std::string& format, const std::string& out_path) {
    const auto config = m.config();
    const auto fmt = io::parse_format(format);
    const auto result = calibrate_gamma(target, config, search);
    const auto text = io::write_calibration(result, fmt);
    if (out_path.empty()) {
      out << text;
      return kSuccess;
    }
    write_file(out_path, text);
    std::vector<std::string> args{"calibrate", "--target-u", exact(target)};
    const auto margs = m.args(false);
    args.insert(args.end(), margs.begin(), margs.end());
    args.insert(args.end(),
                {"--replicates", std::to_string(search.estimate.replicates), "--horizon",
                 std::to_string(search.estimate.horizon), "--tolerance", exact(search.tolerance),
                 "--gamma-max", exact(search.gamma_max), "--max-iterations",
                 std::to_string(search.max_iterations), "--format", format});
    if (search.estimate.burn_in) {
      args.insert(args.end(), {"--burn-in", std::to_string(*search.estimate.burn_in)});
    }
    if (!search.stop_within_noise) args.emplace_back("--no-noise-stop");
    auto cfg = m.describe(false);
    cfg["target_u"] = target;
    cfg["replicates"] = search.estimate.replicates;
    cfg["horizon"] = search.estimate.horizon;
    cfg["tolerance"] = search.tolerance;
    cfg["gamma_max"] = search.gamma_max;
    cfg["max_iterations"] = search.max_iterations;
    cfg["stop_within_noise"] = search.stop_within_noise;
    write_manifest("calibrate", args, cfg, m.seed, out_path);
    out << "gamma_hat = " << io::format_number(result.gamma_hat) << " (U = "
        << io::format_number(result.achieved_u) << " +/- "
        << io::format_number(result.achieved_standard_error) << ", "
        << to_string(result.termination) << " after " << result.iterations << " iterations)\n";
    out << "wrote " << out_path << " and " << manifest_path(out_path) << '\n';
    return kSuccess;
  }

  int limits(double alpha) {
    const auto lim = analytics::asymptotic_limits(alpha);
    out << "alpha = " << io::format_number(alpha) << '\n';
    out << "regime: " << analytics::to_string(lim.regime) << '\n';
    out << "lim alpha(n) = " << format_limit(lim.alpha_stage) << '\n';
    out << "lim U(n) = " << format_limit(lim.u_stage) << '\n';
    out << "lim Omega(n) = " << format_limit(lim.omega_stage) << '\n';
    out << "lim Omega_n = " << io::format_number(lim.cumulative_shortage) << '\n';
    if (lim.regime == analytics::MarketRegime::marginal) {
      out << "marginal case: alpha(n) = 1 and U(n) = Omega(n) at every stage\n";
    }
    return kSuccess;
  }
};

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int replay(const std::string& manifest_file, const std::string& out_override, std::ostream& out,
           std::ostream& err) {
  json m;
  try {
    m = json::parse(read_file(manifest_file));
  } catch (const json::exception& e) {
    throw ValidationError("manifest " + manifest_file + ": " + e.what());
  }
  if (!m.contains("args") || !m.contains("outputs") || m["outputs"].empty()) {
    throw ValidationError("manifest " + manifest_file + " lacks args or outputs");
  }
  auto args = m["args"].get<std::vector<std::string>>();
  if (args.empty() || args.front() == "replay") {
    throw ValidationError("manifest " + manifest_file + " does not describe a command");
  }
  args.insert(args.end(),
              {"--out", out_override.empty() ? m["outputs"][0].get<std::string>() : out_override});
  return dispatch(args, out, err);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probabilistic graduate labor market: simulation, stage-wise analytics, calibration",
               "laborsim"};
  app.set_config("--config", "", "TOML/INI file with default flag values");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Runner runner{out, err};

  MarketFlags sim_flags;
  int stages = 4;
  std::string sim_format = "csv";
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "run successive job-hunting stages within one year");
  sim_flags.add_to(*sim, true);
  sim->add_option("--stages", stages, "maximum number of stages")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim->add_option("--format", sim_format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sim->add_option("--out", sim_out, "output file (stdout when omitted)");

  std::string input;
  std::string mode;
  int stage = 0;
  std::string points = "stagewise";
  std::string an_format = "csv";
  std::string an_out;
  auto* an = app.add_subcommand("analyze", "stage-wise transforms of empirical cumulative rates");
  an->add_option("--input", input, "employment CSV")->required();
  an->add_option("--mode", mode, "transform")
      ->required()
      ->check(CLI::IsMember({"stagewise", "trajectory", "learning-curve"}));
  an->add_option("--stage", stage, "stage for trajectory mode")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  an->add_option("--points", points, "trajectory point type")
      ->check(CLI::IsMember({"cumulative", "stagewise"}))
      ->capture_default_str();
  an->add_option("--format", an_format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  an->add_option("--out", an_out, "output file (stdout when omitted)");

  MarketFlags cal_flags;
  double target = 0.0;
  CalibrationSearch search;
  search.estimate.replicates = 16;
  search.estimate.horizon = 100;
  std::size_t burn_in = 0;
  bool no_noise_stop = false;
  std::string cal_format = "json";
  std::string cal_out;
  auto* cal = app.add_subcommand("calibrate", "fit gamma so that simulated U matches a target");
  cal->add_option("--target-u", target, "target unemployment rate")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  cal_flags.add_to(*cal, false);
  cal->add_option("--replicates", search.estimate.replicates, "Monte Carlo replicates")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cal->add_option("--horizon", search.estimate.horizon, "years per replicate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  auto* burn_opt = cal->add_option("--burn-in", burn_in, "discarded years (default horizon/10)");
  cal->add_option("--tolerance", search.tolerance, "gamma bracket width at which to stop")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cal->add_option("--gamma-max", search.gamma_max, "upper end of the gamma search")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cal->add_option("--max-iterations", search.max_iterations, "bisection iterations")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cal->add_flag("--no-noise-stop", no_noise_stop, "only stop on bracket width");
  cal->add_option("--threads", search.estimate.threads, "replicate threads (0: all cores)");
  cal->add_option("--format", cal_format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cal->add_option("--out", cal_out, "output file (stdout when omitted)");

  double limit_alpha = 1.0;
  auto* lim = app.add_subcommand("limits", "asymptotic stage-wise limits for a job-offer ratio");
  lim->add_option("--alpha", limit_alpha, "job-offer ratio")->required()->check(CLI::PositiveNumber);

  std::string manifest_file;
  std::string replay_out;
  auto* rep = app.add_subcommand("replay", "rerun the command recorded in a manifest");
  rep->add_option("--manifest", manifest_file, "manifest JSON")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", replay_out, "output path (defaults to the recorded one)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  if (sim->parsed()) return runner.simulate(sim_flags, stages, sim_format, sim_out);
  if (an->parsed()) return runner.analyze(input, mode, stage, points, an_format, an_out);
  if (cal->parsed()) {
    if (*burn_opt) search.estimate.burn_in = burn_in;
    search.stop_within_noise = !no_noise_stop;
    return runner.calibrate(cal_flags, target, search, cal_format, cal_out);
  }
  if (lim->parsed()) return runner.limits(limit_alpha);
  return replay(manifest_file, replay_out, out, err);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const BracketingError& e) {
    err << "infeasible calibration: " << e.what() << '\n';
    return kInfeasible;
  } catch (const CalibrationDiagnosticError& e) {
    err << "calibration diagnostic: " << e.what() << '\n';
    return kCalibrationDiagnostic;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace laborsim::cli
