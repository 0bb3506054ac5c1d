#pragma once

#include <stdexcept>
#include <string>

namespace flowseek {

// Base for every error raised by the library. Callers that only care about
// "something went wrong in flowseek" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (Lambert W branch
// domains, r outside the allowed annulus, |Q| beyond its maximum, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Phase direction requested where it is undefined (the radial field origin,
// zero vectors).
class SingularityError : public Error {
 public:
  using Error::Error;
};

// Spectral magnitude below the degeneracy floor at a probe point.
class DegenerateMagnitudeError : public Error {
 public:
  using Error::Error;
};

// Field queried outside its support (gridded fields only).
class OutOfDomainError : public Error {
 public:
  using Error::Error;
};

// Malformed WAVF1 payload or invalid bundle.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Invalid user configuration (CLI, synthetic generators).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Bifurcation scan whose range does not bracket a transition.
class NoTransitionError : public Error {
 public:
  using Error::Error;
};

}  // namespace flowseek
