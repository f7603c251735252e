#pragma once

#include <stdexcept>
#include <string>

namespace lagcut {

enum class ErrorCode {
  DimensionMismatch,
  ProbabilitySum,
  InvalidArgument,
  FirstStageInfeasible,
  UnboundedRecourse,
  ScenarioInfeasible,
  CapExceeded,
  NumericalFailure,
  UnsupportedCut,
  NotInitialized,
  Parse,
  VersionMismatch,
  Io,
};

const char* to_string(ErrorCode code);

/// Base exception for every failure raised by the library. The code lets
/// callers (notably the CLI) map failures to stable exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the instance reader; carries the 1-based location.
class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& what)
      : Error(ErrorCode::Parse, "line " + std::to_string(line) + ", column " +
                                    std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Raised by brute-force enumerators when the feasible set is larger than
/// the requested cap.
class CapExceededError : public Error {
 public:
  CapExceededError(std::size_t found, std::size_t cap)
      : Error(ErrorCode::CapExceeded,
              "enumeration cap exceeded: found " + std::to_string(found) +
                  " points, cap " + std::to_string(cap)),
        found_(found) {}
  std::size_t found() const noexcept { return found_; }

 private:
  std::size_t found_;
};

}  // namespace lagcut
