#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace laborsim {

/// Invalid MarketConfig or run parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a closed-form expression.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Empirical series or dataset that violates its invariants.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CSV input problem with a 1-based line number and the offending column.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, std::string column, const std::string& what)
      : ValidationError("line " + std::to_string(line) +
                        (column.empty() ? std::string() : ", column '" + column + "'") + ": " +
                        what),
        line_(line),
        column_(std::move(column)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::string column_;
};

/// Calibration target lies outside [U(0), U(gamma_max)].
class BracketingError : public std::runtime_error {
 public:
  BracketingError(const std::string& what, double feasible_low, double feasible_high)
      : std::runtime_error(what), low_(feasible_low), high_(feasible_high) {}

  double feasible_low() const noexcept { return low_; }
  double feasible_high() const noexcept { return high_; }

 private:
  double low_;
  double high_;
};

/// Monte Carlo estimates of U(gamma) decreased by more than the noise band.
class CalibrationDiagnosticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace laborsim
