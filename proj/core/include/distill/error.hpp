#pragma once

#include <stdexcept>
#include <string>

namespace distill {

/// Coarse failure classes; the CLI maps them onto process exit codes.
enum class ErrorKind {
  Usage = 1,
  Data = 2,
  SolverLimit = 3,
  Internal = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed input, missing/invalid fields, unknown ids.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class FieldError : public DataError {
 public:
  FieldError(const std::string& field, const std::string& what)
      : DataError("field '" + field + "': " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

/// Iteration/node/size limits in the LP and MILP solvers.
class SolverLimitError : public Error {
 public:
  explicit SolverLimitError(const std::string& what) : Error(ErrorKind::SolverLimit, what) {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what) : Error(ErrorKind::Internal, what) {}
};

/// Wraps a failure with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.kind(), "[" + stage + "] " + cause.what()), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

int exit_code(ErrorKind kind) noexcept;

}  // namespace distill
