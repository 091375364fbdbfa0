#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace twowave {

enum class ErrorCode {
  InvalidArgument,
  OrderingViolation,
  NonpositiveCoefficient,
  CoercivityViolation,
  OutOfDomain,
  NonpositiveLength,
  HTooCoarse,
  IndefiniteGram,
  DimensionMismatch,
  SingularSystem,
  SizeExceeded,
  ConvergenceFailure,
  BandTooNarrow,
  WindowTooSmall,
  EnergyUnderflow,
  SolveFailure,
  BoundaryMismatch,
  InterfaceMismatch,
  ParseError,
  UnknownKey,
  MissingKey,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace twowave
