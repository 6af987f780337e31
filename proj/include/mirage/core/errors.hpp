#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mirage {

/// Root of every error thrown by the workbench libraries.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (empty input, bad k, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A record is missing a field or carries a field of the wrong type.
class SchemaError : public Error {
 public:
  SchemaError(std::string field, const std::string& detail)
      : Error("schema error at '" + field + "': " + detail), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A well-typed record violates a domain invariant.
class InvariantError : public Error {
 public:
  InvariantError(std::string invariant, const std::string& detail)
      : Error("invariant '" + invariant + "' violated: " + detail),
        invariant_(std::move(invariant)) {}

  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mirage
