#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "laborsim/analytics.hpp"
#include "laborsim/calibration.hpp"
#include "laborsim/stage_pipeline.hpp"

namespace laborsim::io {

struct YearDataset {
  std::vector<analytics::CumulativeSeries> records;
  std::string provenance;  // from leading '#' comment lines

  const analytics::CumulativeSeries* find(std::string_view year_label) const;
};

/// Reads `year,alpha0,cum_emp_0[,cum_emp_1,...]`. Rate columns whose maximum
/// exceeds 1.5 hold percentages and are divided by 100. Rows may stop early.
/// Every rejection is a ParseError carrying the file line and column name.
YearDataset parse_employment_csv(std::istream& in);
YearDataset read_employment_csv(const std::filesystem::path& path);

/// Fractions in shortest round-trip form, so parsing the output gives the same dataset.
std::string write_dataset_csv(const YearDataset& dataset);

enum class Format { csv, json };

/// "csv" or "json"; throws ConfigError otherwise.
Format parse_format(std::string_view name);

/// Twelve significant digits, "C" locale.
std::string format_number(double value);

inline constexpr std::string_view kStageCsvHeader =
    "stage,alpha_stage,u_stage,omega_stage,cum_employment,error,remaining_students,"
    "remaining_vacancies";

std::string write_stage_records(std::span<const StageRecord> records, Format format);
std::vector<StageRecord> read_stage_records_json(std::string_view text);

std::string write_trajectory(const analytics::Trajectory& trajectory, analytics::PointKind kind,
                             Format format);

std::string write_calibration(const CalibrationResult& result, Format format);
CalibrationResult read_calibration_json(std::string_view text);

/// Per-year stage-wise triples with the identity residual U - (alpha Omega + 1 - alpha).
std::string write_stagewise_report(std::span<const analytics::CumulativeSeries> years,
                                   Format format);

std::string write_learning_curves(std::span<const analytics::CumulativeSeries> years,
                                  Format format);

}  // namespace laborsim::io
