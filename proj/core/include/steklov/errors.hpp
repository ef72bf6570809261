#pragma once

#include <stdexcept>
#include <string>

namespace steklov {

/// Base class for every error thrown by this library.  Non-convergence of an
/// iterative solver is not an error; it is reported through result flags.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed text input (mesh files, operator dumps, configs).  Carries the
/// 1-based line number at which parsing failed, or 0 when no single line is
/// to blame.
class ParseError : public Error {
public:
  explicit ParseError(const std::string& what) : Error(what), line_(0) {}
  ParseError(const std::string& what, long line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  long line() const { return line_; }

private:
  long line_;
};

/// A structural invariant of a mesh or operator does not hold.  The message
/// names the invariant and the offending entity.
class InvariantError : public Error {
public:
  using Error::Error;
};

/// An operation would exceed a configured resource cap (e.g. node count).
class ResourceLimitError : public Error {
public:
  using Error::Error;
};

/// A caller-supplied parameter is outside its admissible range.
class ParameterError : public Error {
public:
  using Error::Error;
};

/// Runtime data failed validation (non-finite values, sign constraints).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A matrix that must be positive definite is not.
class DefinitenessError : public Error {
public:
  using Error::Error;
};

/// Vectors or operators with incompatible dimensions or provenance were mixed.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// A geometric precondition of a variational algorithm fails on the given
/// data (e.g. no energy barrier along a path).
class GeometryError : public Error {
public:
  using Error::Error;
};

}  // namespace steklov
