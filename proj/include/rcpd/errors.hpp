#pragma once

#include <stdexcept>

namespace rcpd {

/// Base class for every error the toolkit throws deliberately.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input bytes: bad JSON, missing fields, wrong types.
/// Messages name the offending line or field.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Structurally valid input that violates a documented invariant.
/// Messages name the trace id and field involved.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A replay or strategy cannot run against the data it was given.
class ReplayError : public Error {
 public:
  using Error::Error;
};

}  // namespace rcpd
