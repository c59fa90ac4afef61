#pragma once

#include <stdexcept>
#include <string>

namespace mfrl {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (non-finite
// coordinate, zero sample count, mismatched dimension).
class InputDomainError : public Error {
 public:
  using Error::Error;
};

// A solver or plan precondition is violated (stability bound, state budget).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

// The request is well-formed but outside what the operation supports.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Problem size exceeds a hard computational budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// A time sweep produced non-finite values.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Internal identity failed (e.g. a series that must be real is not).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// Malformed plan or measure document.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace mfrl
