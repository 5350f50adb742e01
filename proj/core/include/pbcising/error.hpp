#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pbcising {

enum class ErrorKind {
  InvalidArgument,
  UsageError,
  ParseError,
  SizeTooSmall,
  ShapeMismatch,
  TooLarge,
  TooWide,
  NumericalUnderflow,
  InvariantViolation,
  QuadratureNotConverged,
  TooCloseToSingularity,
  SeriesTooShort,
  NoCrossing,
  NotClosed,
  BasePointMismatch,
  ZeroVectorOnCycle,
  NotDivisible,
  TieWithoutRule,
  NotPowerOfB,
};

std::string_view to_string(ErrorKind kind);

// Process exit code for a failure of this kind: 2 usage/input, 3 guard,
// 4 numerical, 5 invariant violation.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace pbcising
