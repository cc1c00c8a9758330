#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"

namespace sonolab::run {

/// One fully resolved invocation: subcommand, merged parameters, seed, and
/// output directory. Precedence is defaults < config file < explicit flags.
struct RunRequest {
  std::string command;
  nlohmann::json params;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
};

/// Parameter defaults for a subcommand; ConfigError on an unknown command.
nlohmann::json default_params(const std::string& command);

/// Merges defaults, the optional config-file object, and explicitly set flag
/// values. The file may carry "subcommand" (must match), "seed", and
/// "output_dir" beside the parameter keys; unknown keys are rejected by name.
RunRequest resolve_run(const std::string& command,
                       const nlohmann::json& file_json,
                       const nlohmann::json& flag_params,
                       const nlohmann::json& seed_flag,
                       const nlohmann::json& out_flag);

/// Runs the request: writes the data files into out_dir, then the manifest.
void execute(const RunRequest& req);

/// Full command-line entry point; returns the process exit code.
/// 0 success, 2 config error, 3 runtime error, 4 analysis-quality error.
int run_cli(int argc, char** argv);

}  // namespace sonolab::run
