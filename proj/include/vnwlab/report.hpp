#pragma once

// Result envelope shared by the command runners and the CLI.

#include <string>
#include <vector>

#include "json.hpp"
#include "vnwlab/errors.hpp"

namespace vnwlab {

using Json = nlohmann::ordered_json;

const char* version() noexcept;

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Adds a named check; returns `passed` so callers can chain.
bool record_check(std::vector<CheckResult>& checks, std::string name, bool passed, std::string detail = {});

struct ReportEnvelope {
  std::string command;
  Json config = Json::object();
  double wall_time = 0.0;  // seconds
  Json result = Json::object();
  std::vector<CheckResult> checks;

  bool all_passed() const;
  Json to_json() const;
};

/// Exit status for a failure: 1 usage/config, 2 check failure or
/// non-convergence, 3 internal numeric failure.
int exit_code_for(ErrorCode code) noexcept;

}  // namespace vnwlab
