#pragma once

#include <stdexcept>
#include <string>

namespace mathieu {

/// Base class for every numerical or contract failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument or order outside the supported evaluation range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Evaluation at a singular point (e.g. Y_n at the origin).
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// The Bessel index is not an integer, so the closed form does not apply.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// An iterative procedure failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Parameters for which the requested construction degenerates.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// A sample lies outside the domain of a change of variables.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Violated precondition on user-supplied values.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Driven oscillator exactly at an undamped resonance.
class ResonanceError : public Error {
 public:
  using Error::Error;
};

/// The adaptive integrator could not make progress.
class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, double last_t)
      : Error(what), last_t_(last_t) {}
  [[nodiscard]] double last_t() const { return last_t_; }

 private:
  double last_t_;
};

/// Not enough signal to perform the requested analysis.
class SpanError : public Error {
 public:
  using Error::Error;
};

/// No parameter preimage exists for an inverse mapping.
class MappingError : public Error {
 public:
  using Error::Error;
};

}  // namespace mathieu
