#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace alegeo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad parameters, bad config fields, unreadable files.
/// The CLI maps this to exit code 2.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Query outside the domain of a profile or grid.
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Numerical failure; exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public NumericalError {
 public:
  NonConvergence(const std::string& what, double stage, std::vector<double> history)
      : NumericalError(what), stage_(stage), history_(std::move(history)) {}
  double stage() const noexcept { return stage_; }
  const std::vector<double>& residual_history() const noexcept { return history_; }

 private:
  double stage_;
  std::vector<double> history_;
};

class PositivityLoss : public NumericalError {
 public:
  PositivityLoss(const std::string& what, int i = -1, int j = -1)
      : NumericalError(what), i_(i), j_(j) {}
  int rho_index() const noexcept { return i_; }
  int t_index() const noexcept { return j_; }

 private:
  int i_;
  int j_;
};

class BoundaryInconsistency : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A precondition of a theorem-backed check does not hold (e.g. the convexity
/// audit on a background whose Ricci form is not seminegative).
class HypothesisViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace alegeo
