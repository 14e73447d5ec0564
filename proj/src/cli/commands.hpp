#pragma once

#include <string>
#include <vector>

#include "cli/output.hpp"
#include "cli/run_config.hpp"

namespace hyl::cli {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumeric = 3, kExitPartial = 4 };

/// Rows plus how many of them failed; a row failure never aborts the run.
struct CommandOutput {
  Table table;
  int failed = 0;
  std::string first_error;
};

CommandOutput cmd_bose(const RunConfig& cfg);
CommandOutput cmd_phase_diagram(const RunConfig& cfg);
CommandOutput cmd_transitions(const RunConfig& cfg);
CommandOutput cmd_pressure(const RunConfig& cfg);
CommandOutput cmd_simulate(const RunConfig& cfg);

CommandOutput dispatch(const RunConfig& cfg);

/// 0 when every row succeeded, 4 when some did, 3 when none did.
int exit_code_for(const CommandOutput& out);

/// Parses argv into a validated RunConfig. Throws ConfigError; returns an empty
/// command when help was printed.
RunConfig parse_command_line(int argc, const char* const* argv);

/// Full CLI: parse, run, write, map failures onto exit codes.
int run_cli(int argc, const char* const* argv);

}  // namespace hyl::cli
