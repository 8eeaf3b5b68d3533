#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace medpoc {

enum class ErrorKind {
  parse,
  schema,
  empty_data,
  positivity,
  invalid_evidence,
  unsupported_spec,
  conditioning,
  bootstrap_failure,
  usage,
};

/// Stable machine-readable name, used in report error blocks.
const char* error_kind_name(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorKind::parse,
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& m) : Error(ErrorKind::schema, m) {}
};

class EmptyDataError : public Error {
 public:
  explicit EmptyDataError(const std::string& m)
      : Error(ErrorKind::empty_data, m) {}
};

// A conditioning cell required by an identification formula has no rows.
class PositivityError : public Error {
 public:
  explicit PositivityError(const std::string& m)
      : Error(ErrorKind::positivity, m) {}
};

class InvalidEvidenceError : public Error {
 public:
  explicit InvalidEvidenceError(const std::string& m)
      : Error(ErrorKind::invalid_evidence, m) {}
};

class UnsupportedSpecError : public Error {
 public:
  explicit UnsupportedSpecError(const std::string& m)
      : Error(ErrorKind::unsupported_spec, m) {}
};

class ConditioningError : public Error {
 public:
  explicit ConditioningError(const std::string& m)
      : Error(ErrorKind::conditioning, m) {}
};

class BootstrapFailure : public Error {
 public:
  explicit BootstrapFailure(const std::string& m)
      : Error(ErrorKind::bootstrap_failure, m) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& m) : Error(ErrorKind::usage, m) {}
};

}  // namespace medpoc
