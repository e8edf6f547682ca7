#pragma once

#include "sacfem/verify.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace sacfem {

enum class Command { mesh_info, operators, converge_smooth, converge_rough, validate_noise, ou_validate, moments };

Command parse_command(const std::string &s);
std::string to_string(Command c);

/// Parsed and range-checked run configuration.
struct ExperimentConfig {
  Command command = Command::converge_smooth;
  ExperimentSettings settings;
  std::vector<double> taus{4e-3, 2e-3, 1e-3, 5e-4};
  int trials = 100; // validate-noise
  std::filesystem::path output_dir = "out";
};

/// Defaults for a command before any key is applied.
ExperimentConfig default_config(Command c);

/// Flat key/value text: `key = value`, `#` comments, optional `[section]`
/// headers that prefix keys with `section.`. Unknown keys, duplicate keys and
/// malformed values throw ConfigError naming the key.
ExperimentConfig parse_config(const std::string &text);
ExperimentConfig load_config(const std::filesystem::path &file);

/// Every replay-relevant parameter as sorted `key = value` lines; the output
/// of parse_config on it is the same configuration.
std::map<std::string, std::string> manifest_entries(const ExperimentConfig &c);
std::string format_manifest(const ExperimentConfig &c, const std::map<std::string, std::string> &info);

enum ExitCode : int { exit_pass = 0, exit_fail = 1, exit_config = 2, exit_numerical = 3 };

struct RunOutcome {
  int exit_code = exit_pass;
  std::vector<std::string> checks; // "PASS name ..." / "FAIL name ..."
  std::vector<std::filesystem::path> files;
};

/// Runs the command and writes its CSVs, checks.txt and manifest.txt into
/// output_dir. Numerical failures become exit_numerical with the replay
/// information in checks.txt.
RunOutcome run_experiment(const ExperimentConfig &c);

/// Re-runs from a manifest into `output_dir` and compares every produced file
/// byte for byte with the files next to the manifest. Worker count may differ.
struct ReplayOutcome {
  int exit_code = exit_pass;
  std::vector<std::string> mismatches;
};
ReplayOutcome replay(const std::filesystem::path &manifest, const std::filesystem::path &output_dir,
                     int workers);

} // namespace sacfem
