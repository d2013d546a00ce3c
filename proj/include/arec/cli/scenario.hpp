#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "arec/service/config.hpp"

namespace arec::cli {

/// Stable exit codes shared by every command.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

class ScenarioParseError : public std::runtime_error {
 public:
  ScenarioParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct ScenarioStep {
  std::size_t line = 0;
  std::string verb;
  nlohmann::json args;  // always an object
};

/// One line per step: `verb {json-args}`. Blank lines and `#` comments are
/// skipped. Throws ScenarioParseError naming the line.
std::vector<ScenarioStep> parse_scenario(std::string_view text);
std::vector<ScenarioStep> parse_scenario_file(const std::filesystem::path& path);

/// verb -> service operation it drives.
const std::map<std::string, std::string>& scenario_verbs();

struct ScenarioOutcome {
  int exit_code = kExitOk;
  std::size_t failed_line = 0;
  std::string message;
  std::size_t steps_run = 0;
  nlohmann::json log = nlohmann::json::array();
};

/// Runs the steps against a fresh embedded service. Stops at the first
/// failed assertion or unexpected error. Progress goes to `out`, one line per
/// step (JSON lines when `json_output`).
ScenarioOutcome run_scenario(const std::vector<ScenarioStep>& steps, const service::ServiceConfig& config,
                             std::ostream& out, bool json_output = false);

}  // namespace arec::cli
