#pragma once

#include <stdexcept>
#include <string>

namespace maxboot {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function (p outside (0,1), shape <= 0, ...).
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The requested computation has no implemented path for this input
/// (e.g. a dense d^3 integral at d = 400).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Projected experiment cost exceeds the configured budget.
class CostRefusal : public Error {
 public:
  CostRefusal(const std::string& what, double projected, double budget)
      : Error(what), projected_(projected), budget_(budget) {}
  double projected() const { return projected_; }
  double budget() const { return budget_; }

 private:
  double projected_;
  double budget_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace maxboot
