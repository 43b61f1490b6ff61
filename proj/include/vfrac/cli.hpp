#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "vfrac/config.hpp"
#include "vfrac/io.hpp"

namespace vfrac {

/// Exit codes of the command line tool.
enum ExitCode : int { kExitOk = 0, kExitNumerical = 1, kExitUsage = 2 };

inline const std::vector<std::string>& cli_commands() {
  static const std::vector<std::string> names = {"static",        "quasistatic",        "blowup", "sif",
                                                 "stability",     "identity-check",     "demo-load-collapse",
                                                 "sweep"};
  return names;
}

/// Runs one command on a parsed configuration, writing artifacts into
/// cfg.output.directory and a manifest at the end. Errors propagate.
Json run_command(const std::string& command, const RunConfig& cfg, std::ostream& out);

struct LoadCollapseRow {
  double amplitude = 0.0;
  double energy = 0.0;
  double elastic = 0.0;
  double surface = 0.0;
  double load = 0.0;
};

struct LoadCollapseTable {
  std::vector<LoadCollapseRow> rows;
  double slope = 0.0;
  double expected_slope = 0.0;  // -int g phi
  bool strictly_decreasing = true;
};

/// E_Load(c phi) for the configured amplitudes with a v = 0 band between
/// demo.band and the loaded piece above it. Throws NotDisconnecting when the
/// band leaves a loaded node connected to the Dirichlet part.
LoadCollapseTable demo_load_collapse(const RunConfig& cfg);

/// `vfrac <command> <config> [--set section.key=value]... [--out dir]`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vfrac
