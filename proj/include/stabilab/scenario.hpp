#pragma once

// Scenario files for the command-line front end.
//
//   {
//     "scenario": "lqr",
//     "seed": 7,
//     "output_path": "out/lqr.csv",
//     "parameters": { "a": 0.9, "b": -0.5, "q": 1, "r": 0.1 }
//   }
//
// Only "scenario" is mandatory at the top level. Relative data paths inside
// parameters resolve against the config file's directory; output_path
// resolves against the working directory.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "stabilab/error.hpp"
#include "stabilab/model_core.hpp"
#include "stabilab/optimal_control.hpp"

namespace stabilab::cli {

struct ScenarioConfig {
  nlohmann::json document = nlohmann::json::object();
  std::filesystem::path base_dir = ".";
};

const std::vector<std::string>& scenario_names();

/// Throws IOError when unreadable and ConfigError when not a JSON object.
ScenarioConfig load_config(const std::filesystem::path& path);

/// `key=value`; value is parsed as JSON when possible, else kept as a string.
/// Keys seed, output_path and scenario address the top level; anything else
/// (optionally prefixed with "parameters.") addresses a parameter.
void apply_override(ScenarioConfig& cfg, std::string_view assignment);

/// Every missing, unknown or ill-typed entry; empty iff run() will get past
/// its precondition checks.
std::vector<std::string> validate(const ScenarioConfig& cfg);
std::vector<std::string> validate(const std::filesystem::path& config_path);

struct RunResult {
  std::filesystem::path output;
  std::string summary;  ///< one screen, 4 significant digits
};

/// Runs the scenario and writes its CSV. Throws ConfigError when validate()
/// reports anything; library errors propagate unchanged.
RunResult run(const ScenarioConfig& cfg);

/// 0 for success, 2 for ConfigError, 3 for every other library error.
int exit_code_for(ErrorKind kind);

// ---------------------------------------------------------------------------
// Rules versus discretion: one row per proportional gain.

struct ComparisonRow {
  std::string label;  ///< "Rule/Peg" for f == 0, "Discretion/Feedback" otherwise
  double gain = 0.0;
  ClosedLoop loop;
  double loss = 0.0;      ///< policy_loss from pi0, +inf when unbounded
  double variance = 0.0;  ///< stationary variance, +inf when non-stationary
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
};

ComparisonReport compare_policies(const Transmission& tr, const LossSpec& ls,
                                  const std::vector<double>& gains, double pi0);

}  // namespace stabilab::cli
