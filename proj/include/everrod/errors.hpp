#pragma once

#include <stdexcept>
#include <string>

namespace everrod {

// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  success = 0,
  failure = 1,
  validation = 2,
  solver = 3,
  infeasible = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::failure; }
};

// Invalid input: violated invariants, malformed files, bad arguments.
class ValidationError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::validation; }
};

// Query outside the domain of a function (arc length off the rod, etc).
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Reduction ratio or pressure not covered by the material calibration.
class CalibrationMissingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Unusable measurement data.
class DataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SolverError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::solver; }
};

class IntegrationDivergedError : public SolverError {
 public:
  IntegrationDivergedError(const std::string& what, double station)
      : SolverError(what), station_(station) {}
  double station() const noexcept { return station_; }

 private:
  double station_;
};

class NoEquilibriumError : public SolverError {
 public:
  NoEquilibriumError(const std::string& what, double best_residual)
      : SolverError(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

class DisplacementUnreachableError : public SolverError {
 public:
  using SolverError::SolverError;
};

class InfeasibleDesignError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::infeasible; }
};

}  // namespace everrod
