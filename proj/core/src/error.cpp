#include "pbcising/error.hpp"

namespace pbcising {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::UsageError: return "UsageError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SizeTooSmall: return "SizeTooSmall";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::TooWide: return "TooWide";
    case ErrorKind::NumericalUnderflow: return "NumericalUnderflow";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::TooCloseToSingularity: return "TooCloseToSingularity";
    case ErrorKind::SeriesTooShort: return "SeriesTooShort";
    case ErrorKind::NoCrossing: return "NoCrossing";
    case ErrorKind::NotClosed: return "NotClosed";
    case ErrorKind::BasePointMismatch: return "BasePointMismatch";
    case ErrorKind::ZeroVectorOnCycle: return "ZeroVectorOnCycle";
    case ErrorKind::NotDivisible: return "NotDivisible";
    case ErrorKind::TieWithoutRule: return "TieWithoutRule";
    case ErrorKind::NotPowerOfB: return "NotPowerOfB";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SizeTooSmall:
    case ErrorKind::TooLarge:
    case ErrorKind::TooWide:
      return 3;
    case ErrorKind::NumericalUnderflow:
    case ErrorKind::QuadratureNotConverged:
    case ErrorKind::TooCloseToSingularity:
    case ErrorKind::NoCrossing:
    case ErrorKind::ZeroVectorOnCycle:
      return 4;
    case ErrorKind::InvariantViolation:
      return 5;
    default:
      return 2;
  }
}

}  // namespace pbcising
