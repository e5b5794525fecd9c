#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rotframe/config.hpp"

namespace rotframe {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // "<", "<=", ">=" or "==" (boolean checks use 1/0)
  bool pass = false;
};

struct RunSummary {
  std::string experiment;
  std::string name;
  std::string status;  // pass | fail | error
  std::string reason;  // failed check names, or "<ErrorKind>: message"
  Json metrics = Json::object();
  std::vector<CheckResult> checks;
  std::vector<std::string> artifacts;
  double wall_time = 0.0;

  bool passed() const noexcept { return status == "pass"; }
  Json to_json() const;
};

// ROTFRAME_OUTPUT_DIR, then the config's output_dir, then ./rotframe_out.
std::filesystem::path output_root(const ExperimentConfig& config);

// Runs the experiment and writes summary.json and CSV artifacts to <root>/<name>.
// Errors raised by the experiment end up in the summary with status "error".
RunSummary run_experiment(const ExperimentConfig& config,
                          const std::optional<std::filesystem::path>& root = std::nullopt);

// Loads and runs a config file. ConfigInvalid propagates.
RunSummary run(const std::filesystem::path& config_path,
               const std::optional<std::filesystem::path>& root = std::nullopt);

// 0 pass, 1 fail, 2 error.
int exit_code(const RunSummary& summary) noexcept;

// Fixed 17-significant-digit form, independent of the locale.
std::string format_number(double value);

}  // namespace rotframe
