#include "vnwlab/errors.hpp"

namespace vnwlab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::TableOutOfRange: return "TableOutOfRange";
    case ErrorCode::WrongFamily: return "WrongFamily";
    case ErrorCode::TrivialSolution: return "TrivialSolution";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateEigenvalues: return "DegenerateEigenvalues";
    case ErrorCode::DenominatorVanishes: return "DenominatorVanishes";
    case ErrorCode::AsymptoticViolation: return "AsymptoticViolation";
    case ErrorCode::TooFewZeros: return "TooFewZeros";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::NoSuchEigenvalue: return "NoSuchEigenvalue";
    case ErrorCode::NotConvergedAtCap: return "NotConvergedAtCap";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::SingularTransform: return "SingularTransform";
    case ErrorCode::CannotSatisfy: return "CannotSatisfy";
    case ErrorCode::NotContracting: return "NotContracting";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace vnwlab
