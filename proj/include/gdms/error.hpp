#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gdms {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or semantically invalid system document. `line`/`column` are 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, int line = 0, int column = 0)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")" : what),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Evaluation hit (numerically) a pole of the map.
class PoleError : public Error {
 public:
  using Error::Error;
};

class RootFindingError : public Error {
 public:
  RootFindingError(const std::string& what, std::vector<double> residuals)
      : Error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// A backward orbit left the configured modulus bound.
class BlowupError : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// Generic numerical failure of a computation (no bracket, non-convergence, invalid hole...).
class ComputationError : public Error {
 public:
  using Error::Error;
};

}  // namespace gdms
