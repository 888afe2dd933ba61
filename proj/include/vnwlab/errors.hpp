#pragma once

#include <stdexcept>
#include <string>

namespace vnwlab {

enum class ErrorCode {
  InvalidParameter,
  ParseError,
  TableOutOfRange,
  WrongFamily,
  TrivialSolution,
  NoConvergence,
  DegenerateEigenvalues,
  DenominatorVanishes,
  AsymptoticViolation,
  TooFewZeros,
  DivisionByZero,
  Overflow,
  NoSuchEigenvalue,
  NotConvergedAtCap,
  TooFewPoints,
  SingularTransform,
  CannotSatisfy,
  NotContracting,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// that drivers can map it onto an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vnwlab
