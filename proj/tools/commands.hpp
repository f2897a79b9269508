// Subcommand bodies shared by the pulsesync binary and the tests.
#pragma once

#include <ostream>

#include <json.hpp>

#include "pulsesync/config.hpp"

namespace pulsesync::cli {

enum ExitCode : int { kPass = 0, kConformanceFailure = 1, kConfigError = 2 };

struct CommandResult {
  int code = kPass;
  nlohmann::ordered_json report;
};

/// Each command writes a human-readable table to `out`, the JSON report to
/// config.report_out and traces to config.trace_out when those are set, and
/// returns the report too. Bad configuration surfaces as kConfigError with
/// the message in report["error"].
CommandResult cmd_params(const ExperimentConfig& config, std::ostream& out);
CommandResult cmd_simulate(const ExperimentConfig& config, std::ostream& out);
CommandResult cmd_apa(const ExperimentConfig& config, std::ostream& out);
CommandResult cmd_attack(const ExperimentConfig& config, std::ostream& out);

/// Dispatches on config.mode.
CommandResult run_command(const ExperimentConfig& config, std::ostream& out);

}  // namespace pulsesync::cli
