#pragma once

#include <stdexcept>
#include <string>

namespace lzi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operator dimensions do not match (embedding, commutators, products).
class DimensionError : public Error {
public:
  using Error::Error;
};

/// A two-site coupling was requested with both indices equal.
class SameSiteError : public Error {
public:
  using Error::Error;
};

/// Coincident spectral parameters, poles or levels make a 1/(x - y) factor blow up.
class DegenerateSpectralError : public Error {
public:
  using Error::Error;
};

/// The constant-shift polynomial has no real root in the requested interval.
class NoRealShiftError : public Error {
public:
  using Error::Error;
};

/// Root finder, integrator or tracker failed to meet its accuracy contract.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Evaluation of a multivalued power too close to (or at) its branch point.
class BranchPointError : public Error {
public:
  using Error::Error;
};

/// Oscillatory quadrature did not reach the requested tolerance.
class QuadratureError : public Error {
public:
  using Error::Error;
};

/// Violated precondition that is not covered by a more specific error.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

}  // namespace lzi
