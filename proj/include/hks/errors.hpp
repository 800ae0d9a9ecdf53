#pragma once

#include <stdexcept>
#include <string>

namespace hks {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A field handed to an operation contained NaN or Inf.
class DivergedInputError : public Error {
 public:
  using Error::Error;
};

/// A spectrum that should be Hermitian is not.
class AsymmetryError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the operation's domain (negative time, t1 < t0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Lebesgue or summability exponent below 1.
class InvalidExponentError : public Error {
 public:
  using Error::Error;
};

/// Two fields or runs live on different grids / time axes.
class GridMismatchError : public Error {
 public:
  using Error::Error;
};

/// A time integration produced non-finite values.
///
/// `time` is the last accepted time; `iterate` is the Friedrichs iterate
/// index when raised from the iteration, -1 otherwise.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time, int iterate = -1)
      : Error(what), time_(time), iterate_(iterate) {}
  double time() const noexcept { return time_; }
  int iterate() const noexcept { return iterate_; }

 private:
  double time_;
  int iterate_;
};

/// The CFL-limited step fell below the configured minimum.
class StepUnderflowError : public Error {
 public:
  StepUnderflowError(const std::string& what, double time, double dt)
      : Error(what), time_(time), dt_(dt) {}
  double time() const noexcept { return time_; }
  double dt() const noexcept { return dt_; }

 private:
  double time_;
  double dt_;
};

/// The numerical recursion exceeded the closed-form bound it should obey.
class LemmaViolationError : public Error {
 public:
  using Error::Error;
};

/// A record lacks a series an analysis requires.
class MissingSeriesError : public Error {
 public:
  using Error::Error;
};

/// Malformed or out-of-range configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace hks
