#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ricci {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invariant-violating chain data. `row` and `column` point at
/// the offending entry when one exists (-1 otherwise).
class ChainError : public Error {
 public:
  ChainError(const std::string& what, long row = -1, long column = -1)
      : Error(what), row_(row), column_(column) {}

  long row() const noexcept { return row_; }
  long column() const noexcept { return column_; }

 private:
  long row_;
  long column_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver ran out of iterations.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// The concentration theorem yields nothing for the requested setting.
/// Carries a human-readable line per rejected candidate.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, std::vector<std::string> report)
      : Error(what), report_(std::move(report)) {}

  const std::vector<std::string>& report() const noexcept { return report_; }

 private:
  std::vector<std::string> report_;
};

}  // namespace ricci
