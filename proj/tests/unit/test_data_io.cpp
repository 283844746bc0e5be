#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "laborsim/data_io.hpp"
#include "laborsim/errors.hpp"
#include "laborsim/stage_pipeline.hpp"

using namespace laborsim;
using namespace laborsim::io;

namespace {

YearDataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_employment_csv(in);
}

// Returns the ParseError raised by `text`, failing the test if none is thrown.
ParseError parse_failure(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a ParseError");
  return ParseError(0, "", "");
}

const std::string kHeader = "year,alpha0,cum_emp_0,cum_emp_1,cum_emp_2,cum_emp_3\n";

}  // namespace

TEST_CASE("parse a single fractional row") {
  const auto ds = parse(kHeader + "2012,1.28,0.60,0.75,0.85,0.94\n");
  REQUIRE(ds.records.size() == 1);
  const auto& s = ds.records[0];
  CHECK(s.year_label == "2012");
  CHECK(s.alpha0 == 1.28);
  CHECK(s.cum_employment == std::vector<double>{0.60, 0.75, 0.85, 0.94});
  CHECK(ds.find("2012") == &ds.records[0]);
  CHECK(ds.find("1999") == nullptr);
}

TEST_CASE("percent columns, short rows, BOM, CRLF and provenance") {
  const std::string text = "\xEF\xBB\xBF# source: illustrative\r\n" + std::string("# second line\r\n") +
                           "year,alpha0,cum_emp_0,cum_emp_1\r\n2011,1.2,60,72.5\r\n2012,1.3,61\r\n";
  const auto ds = parse(text);
  CHECK(ds.provenance == "source: illustrative\nsecond line");
  REQUIRE(ds.records.size() == 2);
  CHECK(ds.records[0].cum_employment == std::vector<double>{0.6, 0.725});
  CHECK(ds.records[1].cum_employment == std::vector<double>{0.61});
}

TEST_CASE("rates above alpha0 < 1 are rejected") {
  const auto e = parse_failure(kHeader + "2000,0.99,0.60,0.80,0.995\n");
  CHECK(e.line() == 2);
  CHECK(e.column() == "cum_emp_2");
}

TEST_CASE("non-monotone rows are rejected with their location") {
  const auto e = parse_failure(kHeader + "2011,1.2,0.5,0.6\n2012,1.28,0.60,0.55\n");
  CHECK(e.line() == 3);
  CHECK(e.column() == "cum_emp_1");
  CHECK(std::string(e.what()).find("line 3") != std::string::npos);
}

TEST_CASE("structural errors") {
  CHECK(parse_failure("yr,alpha0,cum_emp_0\n").column() == "yr");
  CHECK(parse_failure("year,alpha0,cum_emp_0,cum_emp_2\n").column() == "cum_emp_2");
  CHECK(parse_failure(kHeader + "2012,abc,0.5\n").column() == "alpha0");
  CHECK(parse_failure(kHeader + "2012,-1,0.5\n").column() == "alpha0");
  CHECK(parse_failure(kHeader + "2012,0,0.5\n").column() == "alpha0");
  CHECK(parse_failure(kHeader + "2012,1.2,0.5,x\n").column() == "cum_emp_1");
  CHECK(parse_failure(kHeader + "2012,1.2,0.5,,0.7\n").column() == "cum_emp_1");
  CHECK(parse_failure(kHeader + "2012,1.2,0.5\n2012,1.3,0.5\n").line() == 3);
  CHECK(parse_failure(kHeader + "2012,1.2,0.5,0.6,0.7,0.8,0.9\n").line() == 2);
  CHECK(parse_failure(kHeader + "2012,1.2,50,101\n").column() == "cum_emp_1");
  CHECK(parse_failure("# only a comment\n").line() == 1);
  CHECK_THROWS_AS(read_employment_csv("/nonexistent/file.csv"), ValidationError);
}

TEST_CASE("dataset roundtrip is exact") {
  const auto ds = read_employment_csv(std::string(LABORSIM_DATA_DIR) + "/sample_employment.csv");
  REQUIRE(ds.records.size() == 2);
  CHECK(ds.find("2012")->alpha0 == 1.28);
  CHECK(ds.find("2000")->alpha0 == 0.99);
  const auto text = write_dataset_csv(ds);
  const auto again = parse(text);
  CHECK(again.records == ds.records);
  CHECK(again.provenance == ds.provenance);
  CHECK(write_dataset_csv(again) == text);
}

TEST_CASE("stage records: header-only CSV and JSON roundtrip") {
  CHECK(write_stage_records({}, Format::csv) == std::string(kStageCsvHeader) + "\n");
  const StageRecord r{3, 1.25, 0.5, 0.6, 0.875, 0.125, 250, 62};
  const std::vector<StageRecord> one{r};
  const auto json_text = write_stage_records(one, Format::json);
  CHECK(read_stage_records_json(json_text) == one);
  CHECK(write_stage_records(one, Format::csv) ==
        std::string(kStageCsvHeader) + "\n3,1.25,0.5,0.6,0.875,0.125,250,62\n");
  CHECK_THROWS_AS(read_stage_records_json("{\"records\": [{\"stage\": 1}]}"), ValidationError);
  CHECK_THROWS_AS(read_stage_records_json("not json"), ValidationError);
}

TEST_CASE("numbers use twelve significant digits") {
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(2.0) == "2");
  CHECK(parse_format("csv") == Format::csv);
  CHECK(parse_format("json") == Format::json);
  CHECK_THROWS_AS(parse_format("xml"), ConfigError);
}

TEST_CASE("stage output golden file") {
  MarketConfig cfg;
  cfg.job_offer_ratio = 1.28;
  RandomStream rng(20130101);
  const auto records = run_stages(cfg, 8, rng);
  const auto csv = write_stage_records(records, Format::csv);
  const auto path = std::string(LABORSIM_GOLDEN_DIR) + "/stages_alpha1.28_seed20130101.csv";
  if (std::getenv("LABORSIM_UPDATE_GOLDEN")) std::ofstream(path, std::ios::binary) << csv;
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  const std::string expected((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(csv == expected);
}

TEST_CASE("calibration JSON roundtrip") {
  CalibrationResult r;
  r.gamma_hat = 2.5;
  r.bracket_low = 2.5;
  r.bracket_high = 3.125;
  r.target_u = 0.4;
  r.achieved_u = 0.40125;
  r.achieved_standard_error = 0.002;
  r.replicates = 8;
  r.horizon = 60;
  r.iterations = 2;
  r.termination = Termination::within_noise;
  r.trace = {{10.0, 0.6, 0.01, 0.0, 20.0}, {5.0, 0.5, 0.01, 0.0, 10.0}};
  const auto text = write_calibration(r, Format::json);
  CHECK(read_calibration_json(text) == r);
  CHECK(write_calibration(read_calibration_json(text), Format::json) == text);
  const auto csv = write_calibration(r, Format::csv);
  CHECK(csv.rfind("iteration,gamma,u,standard_error,bracket_low,bracket_high\n", 0) == 0);
}

TEST_CASE("analysis reports") {
  const std::vector<analytics::CumulativeSeries> years{{"2012", 1.28, {0.6, 0.8}},
                                                       {"2013", 1.0, {0.5, 1.0, 1.0}}};
  const auto csv = write_stagewise_report(years, Format::csv);
  CHECK(csv.find("2012,1,1.7,0.5,0.705882352941,0.8,") != std::string::npos);
  const auto json_text = write_stagewise_report(years, Format::json);
  CHECK(json_text.find("\"truncation\": \"saturated\"") != std::string::npos);

  const auto lc = write_learning_curves(years, Format::csv);
  CHECK(lc.rfind("year,stage,cum_employment,error\n2012,0,0.6,0.4\n", 0) == 0);

  const auto traj = analytics::uv_trajectory(years, 0, analytics::PointKind::cumulative);
  const auto tcsv = write_trajectory(traj, analytics::PointKind::cumulative, Format::csv);
  CHECK(tcsv.rfind("year,stage,kind,omega,u\n2012,0,cumulative,", 0) == 0);
}
