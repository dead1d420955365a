#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace monovi {

/// %.3e rendering for diagnostics; std::to_string prints small residuals as 0.
inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A constructor or operation received arguments outside its contract.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The operator lacks the structure a solver path needs (e.g. no potential).
class UnsupportedOperator : public Error {
 public:
  using Error::Error;
};

/// An iterative method did not reach its tolerance.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, std::vector<double> residual_history = {})
      : Error(what), residual_history_(std::move(residual_history)) {}

  const std::vector<double>& residual_history() const noexcept { return residual_history_; }

 private:
  std::vector<double> residual_history_;
};

/// The outer iteration produced a non-monotone step or left the bracket.
class MonotonicityViolation : public SolverFailure {
 public:
  using SolverFailure::SolverFailure;
};

}  // namespace monovi
