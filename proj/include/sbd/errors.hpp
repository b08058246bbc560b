#pragma once

#include <stdexcept>
#include <string>

namespace sbd {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed argument: dimension mismatch, negative radius, point off the torus.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Configuration too large for exhaustive subset enumeration.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// An integrand or rate produced a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Operation invoked on an object in the wrong state (unsolved table, ...).
class StateError : public Error {
 public:
  using Error::Error;
};

/// The rate model cannot support the requested operation (e.g. zero total death rate).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Fixed-point iteration did not reach the requested tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// Explicit time stepping blew up.
class StabilityError : public Error {
 public:
  using Error::Error;
};

/// Event-count guard reached during a trajectory.
class ExplosionError : public Error {
 public:
  ExplosionError(const std::string& what, double time_reached)
      : Error(what), time_reached_(time_reached) {}
  double time_reached() const noexcept { return time_reached_; }

 private:
  double time_reached_;
};

/// Exponential fit has no usable data.
class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration does not match the schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace sbd
