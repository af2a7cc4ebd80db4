#pragma once

#include <stdexcept>
#include <string>

namespace affinity {

// Base of the library's error taxonomy. ValidationError is a bad input or
// precondition failure (CLI exit code 1); NumericalError is a failure of an
// otherwise well-posed computation (CLI exit code 2).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
  using Error::Error;
};

struct NumericalError : Error {
  using Error::Error;
};

struct MissingColumn : ValidationError {
  explicit MissingColumn(const std::string& column)
      : ValidationError("missing column: " + column), column(column) {}
  std::string column;
};

struct UnknownCategory : ValidationError {
  UnknownCategory(long row, const std::string& attr, const std::string& label)
      : ValidationError("unknown category '" + label + "' for attribute '" + attr +
                        "' at data row " + std::to_string(row)),
        row(row),
        attr(attr),
        label(label) {}
  long row;
  std::string attr;
  std::string label;
};

struct EmptySample : ValidationError {
  using ValidationError::ValidationError;
};

struct DegenerateColumn : ValidationError {
  explicit DegenerateColumn(const std::string& attr)
      : ValidationError("degenerate column (zero standard deviation): " + attr), attr(attr) {}
  std::string attr;
};

struct DegenerateCharacteristic : ValidationError {
  explicit DegenerateCharacteristic(long index)
      : ValidationError("degenerate characteristic (zero variance across occupations): index " +
                        std::to_string(index)),
        index(index) {}
  long index;
};

struct EmptyBinSpec : ValidationError {
  using ValidationError::ValidationError;
};

struct DimensionMismatch : ValidationError {
  using ValidationError::ValidationError;
};

struct InsufficientTrades : ValidationError {
  InsufficientTrades(const std::string& what, long available)
      : ValidationError(what), available(available) {}
  long available;
};

struct InfeasibleLabor : ValidationError {
  explicit InfeasibleLabor(double implied)
      : ValidationError("implied female labor supply " + std::to_string(implied) +
                        " is outside [0, 1]"),
        implied(implied) {}
  double implied;
};

struct ZeroMatrix : ValidationError {
  explicit ZeroMatrix(long period)
      : ValidationError("matrix at period index " + std::to_string(period) +
                        " has zero Frobenius norm"),
        period(period) {}
  long period;
};

struct IoFailure : ValidationError {
  using ValidationError::ValidationError;
};

struct NonConvergence : NumericalError {
  NonConvergence(long iterations, double marginal_error)
      : NumericalError("equilibrium solver hit iteration cap " + std::to_string(iterations) +
                       " with marginal error " + std::to_string(marginal_error)),
        iterations(iterations),
        marginal_error(marginal_error) {}
  long iterations;
  double marginal_error;
};

struct NumericalOverflow : NumericalError {
  using NumericalError::NumericalError;
};

struct InnerSolverFailure : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace affinity
