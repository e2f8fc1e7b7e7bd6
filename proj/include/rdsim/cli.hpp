#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rdsim/config.hpp"
#include "rdsim/harness.hpp"

namespace rdsim {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes returned by run_cli.
enum ExitCode : int {
  kExitOk = 0,
  kExitCellErrors = 1,  // experiment finished but some replicates errored
  kExitUsage = 2,       // bad flags, config parse or validation failure
  kExitInfeasible = 3,  // generator targets cannot be met
  kExitFailure = 4,     // I/O or other runtime failure
};

// Builds plans from configuration sections. Unknown keys are left unread so
// that Config::check_all_used() rejects them.
ExperimentPlan plan_from_config(const Config& cfg, bool desk_scale);
EngageScenario engage_from_config(const Config& cfg, bool desk_scale);

// Entry point behind the rdsim executable. Subcommands: netgen, covgen,
// rds, estimate, experiment, engage-mimic.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rdsim
