#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "solderlab/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Verification engine for solder-form puzzles"};
  std::string command;
  std::string path;
  std::string report_path;
  solderlab::RunOptions options;

  std::string commands;
  for (const auto& c : solderlab::command_names()) commands += (commands.empty() ? "" : ", ") + c;
  app.add_option("command", command, "One of: " + commands)->required();
  app.add_option("puzzle", path, "Puzzle file (report-all also takes a directory)")->required();
  app.add_option("--tol", options.tol, "Residual tolerance")->check(CLI::PositiveNumber);
  app.add_option("--samples", options.samples, "Sample points per check")->check(CLI::PositiveNumber);
  app.add_option("--steps", options.steps, "RK4 steps per unit parameter")->check(CLI::PositiveNumber);
  app.add_option("--seed", options.seed, "Sampling seed");
  app.add_option("--report", report_path, "Write the JSON report here instead of stdout");
  app.add_flag("--timing", options.timing, "Include wall times (reports stop being reproducible)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : solderlab::kExitInput;
  }

  solderlab::CliResult result = solderlab::run_cli(command, path, options);
  const std::string text = result.report.dump(2) + "\n";
  if (report_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(report_path);
    if (!out) {
      std::cerr << "cannot write report to " << report_path << "\n";
      return solderlab::kExitInput;
    }
    out << text;
    for (const auto& p : result.report["puzzles"]) {
      for (const auto& c : p["checks"]) {
        std::cout << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << p["name"].get<std::string>() << " "
                  << c["name"].get<std::string>() << " " << c["value"].dump() << "\n";
      }
    }
  }
  for (const auto& e : result.report["errors"]) {
    std::cerr << "error: " << e["file"].get<std::string>() << ": " << e["message"].get<std::string>() << "\n";
  }
  return result.exit_code;
}
