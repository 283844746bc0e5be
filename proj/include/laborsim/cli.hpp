#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace laborsim::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,           // I/O and unexpected errors
  kUsage = 2,             // bad flags or flag combinations
  kValidation = 3,        // input data rejected
  kInfeasible = 4,        // calibration target outside the reachable interval
  kCalibrationDiagnostic = 5,
};

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace laborsim::cli
