#pragma once

#include <string>
#include <utility>
#include <vector>

#include "thermolab/cli/config.hpp"
#include "thermolab/cli/csv.hpp"

namespace thermolab::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitNumerical = 3 };

struct ResultRecord {
  std::string command;
  std::string config_hash;
  std::string timestamp;
  std::vector<std::pair<std::string, std::string>> metrics;
  std::vector<std::string> csv_paths;
  std::string summary_path;

  const std::string* metric(const std::string& key) const;
};

const std::vector<std::string>& command_names();
bool is_command(const std::string& name);

struct CommandOutput {
  CsvTable table;
  std::vector<std::pair<std::string, std::string>> metrics;
};

// Runs the command without touching the filesystem.
CommandOutput execute(const RunConfig& cfg, const std::string& command);

// Runs the command and writes <out_dir>/<command>.csv and <out_dir>/<command>.summary.
ResultRecord run_command(const RunConfig& cfg, const std::string& command, const std::string& out_dir);

std::string summary_text(const ResultRecord& record);
std::string utc_timestamp();

// Maps an exception thrown by execute/run_command to the process exit code.
int exit_code_for(const std::exception& e);

}  // namespace thermolab::cli
