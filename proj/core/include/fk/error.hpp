#pragma once

#include <stdexcept>
#include <string>

namespace fk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument: axis out of range, period mismatch, malformed path, ...
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A field was read outside the region where it is defined.
class SupportError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed (NaN, repeated step rejection, no convergence).
class SolverError : public Error {
 public:
  using Error::Error;
};

/// A gap-dependent operation was requested for a model without a gap.
class NoGapError : public Error {
 public:
  NoGapError() : Error("no gap found") {}
  using Error::Error;
};

}  // namespace fk
