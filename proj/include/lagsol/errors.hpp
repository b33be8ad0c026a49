#pragma once

#include <stdexcept>
#include <string>

namespace lagsol {

// Bad user input or a violated precondition (CLI exit code 2).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Base for failures of a numerical procedure (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The trajectory left the open interval where every alpha_j + lambda_j u > 0.
class DomainEscape : public NumericalError {
 public:
  DomainEscape(double s, const std::string& what)
      : NumericalError(what), s_(s) {}
  double s() const noexcept { return s_; }

 private:
  double s_;
};

class ToleranceFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InvalidTarget : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class CaseMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace lagsol
