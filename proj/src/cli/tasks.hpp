#pragma once

#include "config.hpp"
#include "csv.hpp"

namespace naeq::cli {

struct TaskOutcome {
  int exit_code = 0;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
};

// Flat single-run summary reusable as one sweep row.
struct FlatRow {
  std::vector<std::string> header;
  std::vector<std::string> cells;
};

// Executes the scenario, writing CSV/JSON outputs plus the run manifest under
// cfg.output_dir. workers bounds sweep-point concurrency.
TaskOutcome run_scenario(const ScenarioConfig& cfg, int workers = 1);

int log_level();  // from NAEQ_LOG: 0 silent, 1 info, 2 debug
void log_info(const std::string& msg);

}  // namespace naeq::cli
