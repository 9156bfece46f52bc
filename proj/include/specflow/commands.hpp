#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "specflow/report.hpp"

namespace specflow {

struct ExperimentConfig {
  std::string command;
  nlohmann::json params;
  std::uint64_t seed = 0;
  std::string output_path;  // empty -> stdout

  // Validates the command name and the per-command parameter schema up
  // front; throws ConfigError before any computation runs.
  static ExperimentConfig from_json(const nlohmann::json& j);
};

const std::vector<std::string>& known_commands();

// Executes the experiment. Deterministic given (config, seed).
Report run(const ExperimentConfig& config);

}  // namespace specflow
