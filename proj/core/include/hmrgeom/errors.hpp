#pragma once

#include <stdexcept>
#include <string>

namespace hmrgeom {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad intrinsics, bad bbox, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A document could not be parsed or does not match its schema.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A point was projected with z <= 0.
class NonPositiveDepth : public Error {
 public:
  using Error::Error;
};

class TooFewVertices : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// The optimizer produced a non-finite cost or Jacobian.
class DivergedError : public Error {
 public:
  using Error::Error;
};

/// The initial parameters violate a residual precondition (e.g. a joint lies
/// behind the camera).
class InitializationError : public Error {
 public:
  using Error::Error;
};

/// Point configuration is too small or collinear for an alignment.
class DegenerateConfiguration : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class ZeroPathLength : public Error {
 public:
  using Error::Error;
};

class TooShort : public Error {
 public:
  using Error::Error;
};

class BehindCamera : public Error {
 public:
  using Error::Error;
};

}  // namespace hmrgeom
