#pragma once

#include <stdexcept>
#include <string>

namespace fmopto {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameter values or inconsistent inputs.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Configuration document problems; `field` names the offending key path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Requested or resolved time step does not resolve the fastest time scales.
class StepPolicyError : public Error {
 public:
  using Error::Error;
};

/// Fixed-point or iterative procedure hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A trajectory left its allowed region (|alpha| bound, covariance ceiling).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Linear-algebra precondition failed (non-Hurwitz drift, ill-conditioning,
/// singular Hurwitz determinants).
class SolverError : public Error {
 public:
  using Error::Error;
};

/// A covariance matrix violates the uncertainty relation beyond tolerance.
class UnphysicalError : public Error {
 public:
  using Error::Error;
};

/// Averaging was requested on a series that never settled.
class UnsettledError : public Error {
 public:
  using Error::Error;
};

}  // namespace fmopto
