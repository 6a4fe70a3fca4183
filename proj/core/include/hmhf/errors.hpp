#pragma once

#include <stdexcept>
#include <string>

namespace hmhf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value that must lie on the unit sphere does not.
class ConstraintViolation : public Error {
 public:
  using Error::Error;
};

/// Renormalization met a (near) zero vector; usually the time step was too large.
class DegenerateField : public Error {
 public:
  using Error::Error;
};

/// Neighbouring values differ by more than a quarter turn.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Scale/center requested for a map that carries no energy.
class NoScaleError : public Error {
 public:
  using Error::Error;
};

class OutOfRegimeError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

/// Radii passed to the localized distance violate one of its constraints.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// The time stepper produced non-finite values or could not renormalize.
class DegenerateStep : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace hmhf
