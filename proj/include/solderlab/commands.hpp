#pragma once

// Command dispatch behind the solderlab tool: each command runs one module
// on a puzzle file and returns named checks plus informational values.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "solderlab/puzzle_file.hpp"

namespace solderlab {

struct RunOptions {
  double tol = 1e-8;
  std::size_t samples = 50;
  std::size_t steps = 20;
  std::uint64_t seed = 1;
  /// Adds wall times to the report (which then stops being reproducible).
  bool timing = false;
};

struct CheckRecord {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::size_t samples = 0;
  /// Set by [expect] when the check is a deliberate failure.
  bool expected_failure = false;
  double wall_ms = 0.0;
};

struct PuzzleReport {
  std::string name;
  std::string path;
  std::vector<CheckRecord> checks;
  nlohmann::ordered_json info = nlohmann::ordered_json::object();
  std::vector<std::string> warnings;

  bool pass() const;
};

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitInput = 2 };

const std::vector<std::string>& command_names();

/// Runs one command on a loaded file. Throws solderlab::Error when the
/// command cannot be applied (missing section, wrong rank case, ...).
PuzzleReport run_command(const std::string& command, const PuzzleFile& file, const RunOptions& options);

/// Every applicable command with [expect] honoured.
PuzzleReport run_all(const PuzzleFile& file, const RunOptions& options);

struct CliResult {
  nlohmann::ordered_json report;
  int exit_code = kExitPass;
};

/// Loads `path` (a directory is allowed for report-all, scanned for *.puzzle
/// files in sorted order), runs the command and assembles the report.
CliResult run_cli(const std::string& command, const std::string& path, const RunOptions& options);

nlohmann::ordered_json to_json(const PuzzleReport& report, bool timing);

}  // namespace solderlab
