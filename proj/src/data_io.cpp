#include "laborsim/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <json.hpp>

#include "laborsim/errors.hpp"

namespace laborsim::io {

using analytics::CumulativeSeries;
using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_cells(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_double(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::string rate_column(std::size_t stage) { return "cum_emp_" + std::to_string(stage); }

// Value rendered with twelve significant digits and read back, so that JSON
// output carries the same precision as CSV.
double rounded(double v) {
  const std::string s = format_number(v);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

// Shortest text that reads back to the same double.
std::string exact_number(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json number(double v) { return std::isfinite(v) ? json(rounded(v)) : json(nullptr); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
}

const char* to_string(analytics::Truncation t) {
  switch (t) {
    case analytics::Truncation::none:
      return "none";
    case analytics::Truncation::saturated:
      return "saturated";
    case analytics::Truncation::vacancies_exhausted:
      return "vacancies_exhausted";
  }
  return "none";
}

const char* to_string(analytics::PointKind kind) {
  return kind == analytics::PointKind::cumulative ? "cumulative" : "stagewise";
}

Termination termination_from(const std::string& s) {
  for (auto t : {Termination::boundary, Termination::bracket_width, Termination::within_noise,
                 Termination::max_iterations}) {
    if (s == laborsim::to_string(t)) return t;
  }
  throw ValidationError("unknown termination '" + s + "'");
}

}  // namespace

const CumulativeSeries* YearDataset::find(std::string_view year_label) const {
  for (const auto& r : records) {
    if (r.year_label == year_label) return &r;
  }
  return nullptr;
}

YearDataset parse_employment_csv(std::istream& in) {
  YearDataset ds;
  std::vector<std::string> header;
  struct Row {
    std::size_t line;
    std::string year;
    double alpha0;
    std::vector<double> rates;
  };
  std::vector<Row> rows;
  std::map<std::string, std::size_t> seen;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (line_no == 1 && raw.rfind("\xEF\xBB\xBF", 0) == 0) raw.erase(0, 3);
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (!ds.provenance.empty()) ds.provenance += '\n';
      ds.provenance += trim(std::string_view(line).substr(1));
      continue;
    }

    auto cells = split_cells(line);
    if (header.empty()) {
      if (cells.size() < 3 || cells[0] != "year" || cells[1] != "alpha0") {
        throw ParseError(line_no, cells.empty() ? "" : cells[0],
                         "header must start with year,alpha0,cum_emp_0");
      }
      for (std::size_t c = 2; c < cells.size(); ++c) {
        if (cells[c] != rate_column(c - 2)) {
          throw ParseError(line_no, cells[c],
                           "expected column '" + rate_column(c - 2) +
                               "' (rate columns must be contiguous from cum_emp_0)");
        }
      }
      header = std::move(cells);
      continue;
    }

    if (cells.size() > header.size()) {
      throw ParseError(line_no, "", "row has " + std::to_string(cells.size()) +
                                        " cells but the header has " +
                                        std::to_string(header.size()));
    }
    while (!cells.empty() && cells.back().empty()) cells.pop_back();

    Row row;
    row.line = line_no;
    if (cells.empty() || cells[0].empty()) throw ParseError(line_no, "year", "missing year label");
    row.year = cells[0];
    if (auto [it, inserted] = seen.emplace(row.year, line_no); !inserted) {
      throw ParseError(line_no, "year",
                       "duplicate year '" + row.year + "' (first on line " +
                           std::to_string(it->second) + ")");
    }
    if (cells.size() < 2 || !parse_double(cells[1], row.alpha0)) {
      throw ParseError(line_no, "alpha0", "non-numeric or missing value");
    }
    if (!(row.alpha0 > 0.0)) throw ParseError(line_no, "alpha0", "alpha0 must be positive");
    if (cells.size() < 3) throw ParseError(line_no, "cum_emp_0", "at least one rate is required");
    for (std::size_t c = 2; c < cells.size(); ++c) {
      double v = 0.0;
      if (cells[c].empty()) {
        throw ParseError(line_no, header[c], "empty cell before a later rate");
      }
      if (!parse_double(cells[c], v)) throw ParseError(line_no, header[c], "non-numeric value");
      if (v < 0.0) throw ParseError(line_no, header[c], "negative rate");
      row.rates.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (header.empty()) throw ParseError(line_no, "", "missing header");

  // Percent detection per column.
  const std::size_t n_rates = header.size() - 2;
  for (std::size_t c = 0; c < n_rates; ++c) {
    double top = 0.0;
    for (const auto& r : rows) {
      if (c < r.rates.size()) top = std::max(top, r.rates[c]);
    }
    if (top <= 1.5) continue;
    for (auto& r : rows) {
      if (c >= r.rates.size()) continue;
      if (r.rates[c] > 100.0) {
        throw ParseError(r.line, rate_column(c), "percentage above 100");
      }
      r.rates[c] /= 100.0;
    }
  }

  for (auto& r : rows) {
    double previous = 0.0;
    for (std::size_t c = 0; c < r.rates.size(); ++c) {
      const double v = r.rates[c];
      if (v > 1.0) throw ParseError(r.line, rate_column(c), "rate above 1");
      if (v < previous) {
        throw ParseError(r.line, rate_column(c),
                         "cumulative rate decreases (non-monotone series)");
      }
      if (r.alpha0 < 1.0 && v > r.alpha0) {
        throw ParseError(r.line, rate_column(c),
                         "cumulative rate exceeds alpha0 < 1 (cannot employ more than V/N)");
      }
      previous = v;
    }
    ds.records.push_back({r.year, r.alpha0, std::move(r.rates)});
  }
  return ds;
}

YearDataset read_employment_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return parse_employment_csv(in);
}

std::string write_dataset_csv(const YearDataset& dataset) {
  std::size_t width = 1;
  for (const auto& r : dataset.records) width = std::max(width, r.cum_employment.size());
  std::ostringstream os;
  if (!dataset.provenance.empty()) {
    std::istringstream lines(dataset.provenance);
    for (std::string l; std::getline(lines, l);) os << "# " << l << '\n';
  }
  os << "year,alpha0";
  for (std::size_t c = 0; c < width; ++c) os << ',' << rate_column(c);
  os << '\n';
  for (const auto& r : dataset.records) {
    os << r.year_label << ',' << exact_number(r.alpha0);
    for (std::size_t c = 0; c < width; ++c) {
      os << ',';
      if (c < r.cum_employment.size()) os << exact_number(r.cum_employment[c]);
    }
    os << '\n';
  }
  return os.str();
}

Format parse_format(std::string_view name) {
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  throw ConfigError("unknown format '" + std::string(name) + "' (expected csv or json)");
}

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string write_stage_records(std::span<const StageRecord> records, Format format) {
  if (format == Format::csv) {
    std::ostringstream os;
    os << kStageCsvHeader << '\n';
    for (const auto& r : records) {
      os << r.stage << ',' << format_number(r.alpha_stage) << ',' << format_number(r.u_stage)
         << ',' << format_number(r.omega_stage) << ',' << format_number(r.cum_employment) << ','
         << format_number(r.error) << ',' << r.remaining_students << ','
         << r.remaining_vacancies << '\n';
    }
    return os.str();
  }
  json arr = json::array();
  for (const auto& r : records) {
    arr.push_back({{"stage", r.stage},
                   {"alpha_stage", number(r.alpha_stage)},
                   {"u_stage", number(r.u_stage)},
                   {"omega_stage", number(r.omega_stage)},
                   {"cum_employment", number(r.cum_employment)},
                   {"error", number(r.error)},
                   {"remaining_students", r.remaining_students},
                   {"remaining_vacancies", r.remaining_vacancies}});
  }
  return dump(json{{"records", arr}});
}

std::vector<StageRecord> read_stage_records_json(std::string_view text) {
  const json doc = parse_json(text);
  std::vector<StageRecord> out;
  try {
    for (const auto& j : doc.at("records")) {
      StageRecord r;
      r.stage = j.at("stage").get<int>();
      r.alpha_stage = j.at("alpha_stage").get<double>();
      r.u_stage = j.at("u_stage").get<double>();
      r.omega_stage = j.at("omega_stage").get<double>();
      r.cum_employment = j.at("cum_employment").get<double>();
      r.error = j.at("error").get<double>();
      r.remaining_students = j.at("remaining_students").get<long>();
      r.remaining_vacancies = j.at("remaining_vacancies").get<long>();
      out.push_back(r);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("stage record JSON: ") + e.what());
  }
  return out;
}

std::string write_trajectory(const analytics::Trajectory& trajectory, analytics::PointKind kind,
                             Format format) {
  if (format == Format::csv) {
    std::ostringstream os;
    os << "year,stage,kind,omega,u\n";
    for (const auto& p : trajectory.points) {
      os << p.year_label << ',' << p.stage << ',' << to_string(kind) << ','
         << format_number(p.omega) << ',' << format_number(p.u) << '\n';
    }
    return os.str();
  }
  json points = json::array();
  for (const auto& p : trajectory.points) {
    points.push_back({{"year", p.year_label},
                      {"stage", p.stage},
                      {"omega", number(p.omega)},
                      {"u", number(p.u)}});
  }
  json skipped = json::array();
  for (const auto& s : trajectory.skipped) {
    skipped.push_back({{"year", s.year_label}, {"reason", s.reason}});
  }
  return dump(json{{"kind", to_string(kind)}, {"points", points}, {"skipped", skipped}});
}

std::string write_calibration(const CalibrationResult& r, Format format) {
  if (format == Format::csv) {
    std::ostringstream os;
    os << "iteration,gamma,u,standard_error,bracket_low,bracket_high\n";
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
      const auto& s = r.trace[i];
      os << i << ',' << format_number(s.gamma) << ',' << format_number(s.u) << ','
         << format_number(s.standard_error) << ',' << format_number(s.bracket_low) << ','
         << format_number(s.bracket_high) << '\n';
    }
    return os.str();
  }
  json trace = json::array();
  for (const auto& s : r.trace) {
    trace.push_back({{"gamma", number(s.gamma)},
                     {"u", number(s.u)},
                     {"standard_error", number(s.standard_error)},
                     {"bracket_low", number(s.bracket_low)},
                     {"bracket_high", number(s.bracket_high)}});
  }
  return dump(json{{"gamma_hat", number(r.gamma_hat)},
                   {"bracket", {number(r.bracket_low), number(r.bracket_high)}},
                   {"target_u", number(r.target_u)},
                   {"achieved_u", number(r.achieved_u)},
                   {"achieved_standard_error", number(r.achieved_standard_error)},
                   {"replicates", r.replicates},
                   {"horizon", r.horizon},
                   {"iterations", r.iterations},
                   {"termination", laborsim::to_string(r.termination)},
                   {"trace", trace}});
}

CalibrationResult read_calibration_json(std::string_view text) {
  const json doc = parse_json(text);
  CalibrationResult r;
  try {
    r.gamma_hat = doc.at("gamma_hat").get<double>();
    r.bracket_low = doc.at("bracket").at(0).get<double>();
    r.bracket_high = doc.at("bracket").at(1).get<double>();
    r.target_u = doc.at("target_u").get<double>();
    r.achieved_u = doc.at("achieved_u").get<double>();
    r.achieved_standard_error = doc.at("achieved_standard_error").get<double>();
    r.replicates = doc.at("replicates").get<int>();
    r.horizon = doc.at("horizon").get<int>();
    r.iterations = doc.at("iterations").get<int>();
    r.termination = termination_from(doc.at("termination").get<std::string>());
    for (const auto& s : doc.at("trace")) {
      r.trace.push_back({s.at("gamma").get<double>(), s.at("u").get<double>(),
                         s.at("standard_error").get<double>(), s.at("bracket_low").get<double>(),
                         s.at("bracket_high").get<double>()});
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("calibration JSON: ") + e.what());
  }
  return r;
}

std::string write_stagewise_report(std::span<const CumulativeSeries> years, Format format) {
  std::ostringstream os;
  json doc = json::array();
  if (format == Format::csv) {
    os << "year,stage,alpha_stage,u_stage,omega_stage,cum_employment,identity_residual\n";
  }
  for (const auto& s : years) {
    const auto sw = analytics::stagewise_from_cumulative(s);
    json stages = json::array();
    for (std::size_t n = 0; n < sw.stages.size(); ++n) {
      const auto& t = sw.stages[n];
      if (format == Format::csv) {
        os << s.year_label << ',' << n << ',' << format_number(t.alpha_stage) << ','
           << format_number(t.u_stage) << ',' << format_number(t.omega_stage) << ','
           << format_number(s.cum_employment[n]) << ',' << format_number(t.identity_residual())
           << '\n';
      } else {
        stages.push_back({{"stage", n},
                          {"alpha_stage", number(t.alpha_stage)},
                          {"u_stage", number(t.u_stage)},
                          {"omega_stage", number(t.omega_stage)},
                          {"cum_employment", number(s.cum_employment[n])},
                          {"identity_residual", number(t.identity_residual())}});
      }
    }
    if (format == Format::json) {
      json year{{"year", s.year_label},
                {"alpha0", number(s.alpha0)},
                {"stages", stages},
                {"truncation", to_string(sw.truncation)}};
      if (sw.truncated_at) year["truncated_at"] = *sw.truncated_at;
      doc.push_back(year);
    }
  }
  return format == Format::csv ? os.str() : dump(json{{"years", doc}});
}

std::string write_learning_curves(std::span<const CumulativeSeries> years, Format format) {
  std::ostringstream os;
  json doc = json::array();
  if (format == Format::csv) os << "year,stage,cum_employment,error\n";
  for (const auto& s : years) {
    const auto eps = analytics::learning_curve(s);
    json points = json::array();
    for (std::size_t n = 0; n < eps.size(); ++n) {
      if (format == Format::csv) {
        os << s.year_label << ',' << n << ',' << format_number(s.cum_employment[n]) << ','
           << format_number(eps[n]) << '\n';
      } else {
        points.push_back({{"stage", n},
                          {"cum_employment", number(s.cum_employment[n])},
                          {"error", number(eps[n])}});
      }
    }
    if (format == Format::json) {
      doc.push_back({{"year", s.year_label}, {"alpha0", number(s.alpha0)}, {"curve", points}});
    }
  }
  return format == Format::csv ? os.str() : dump(json{{"years", doc}});
}

}  // namespace laborsim::io
