#pragma once

#include <stdexcept>
#include <string>

namespace scopf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or mistyped document content. `path()` names the offending field.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Well-formed input that violates a cross-reference or model invariant.
class SemanticError : public Error {
 public:
  using Error::Error;
};

/// Caller broke an operation precondition (inverted bounds, foreign handle, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine produced a non-finite value or broke down.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace scopf
