#include "vnwlab/report.hpp"

namespace vnwlab {

const char* version() noexcept { return VNWLAB_VERSION; }

bool record_check(std::vector<CheckResult>& checks, std::string name, bool passed, std::string detail) {
  checks.push_back({std::move(name), passed, std::move(detail)});
  return passed;
}

bool ReportEnvelope::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

Json ReportEnvelope::to_json() const {
  Json j;
  j["command"] = command;
  j["config"] = config;
  j["version"] = version();
  j["wall_time"] = wall_time;
  j["result"] = result;
  Json list = Json::array();
  for (const auto& c : checks) {
    Json e;
    e["name"] = c.name;
    e["passed"] = c.passed;
    if (!c.detail.empty()) e["detail"] = c.detail;
    list.push_back(std::move(e));
  }
  j["checks"] = std::move(list);
  j["all_passed"] = all_passed();
  return j;
}

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidParameter:
    case ErrorCode::ParseError:
    case ErrorCode::TableOutOfRange:
    case ErrorCode::WrongFamily:
      return 1;
    case ErrorCode::NoConvergence:
    case ErrorCode::AsymptoticViolation:
    case ErrorCode::TooFewZeros:
    case ErrorCode::NotConvergedAtCap:
    case ErrorCode::TooFewPoints:
    case ErrorCode::NoSuchEigenvalue:
      return 2;
    case ErrorCode::TrivialSolution:
    case ErrorCode::DegenerateEigenvalues:
    case ErrorCode::DenominatorVanishes:
    case ErrorCode::DivisionByZero:
    case ErrorCode::Overflow:
    case ErrorCode::SingularTransform:
    case ErrorCode::CannotSatisfy:
    case ErrorCode::NotContracting:
      return 3;
  }
  return 3;
}

}  // namespace vnwlab
