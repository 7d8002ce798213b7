#pragma once

#include <stdexcept>
#include <string>

namespace mpass {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold for the given input.
class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

/// The operation is only implemented for a subset of dimensions (grid flood fill is planar).
class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

/// The flood-fill grid cannot separate or join the components at the finest admissible spacing.
class ResolutionLimit : public Error {
 public:
  using Error::Error;
};

/// Repeated eigenvalues: the distance to a defective matrix is zero.
class DegenerateSpectrum : public Error {
 public:
  using Error::Error;
};

}  // namespace mpass
