#pragma once

#include "hypdec/config.hpp"
#include "hypdec/report.hpp"

namespace hypdec::scenarios {

struct RunResult {
  int exit_code = 0;
  report::Summary summary;
  std::vector<report::RatioReport> rows;
};

// Executes the named scenario across scales and writes the CSV/JSON
// (and optional SVG) artifacts into cfg.out_dir.
RunResult run(const config::ExperimentConfig& cfg);
std::vector<std::string> scenario_names();

}  // namespace hypdec::scenarios
