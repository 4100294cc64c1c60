#pragma once

#include <string>
#include <vector>

#include "hypdec/geom.hpp"

namespace hypdec::config {

// Scenario configuration. Defaults target a small desk run; the config file
// (key = value lines, optional [sections], # comments) and CLI flags
// override individual fields.
struct ExperimentConfig {
  std::string scenario;
  std::vector<double> scales{64, 256};
  uint64_t seed = 1;
  std::string ensemble = "all";
  int trials = 0;  // 0 = per-ensemble default
  std::string out_dir = "out";
  bool svg = false;

  double eps = 0.3;
  double delta = 1.0;       // square scale for the bilinear estimator
  double K = 8, K1 = 4, K2 = 4, K3 = 16;
  int A = 2;
  double p = 22.0 / 7.0;
  geom::Band band;

  double incidence_delta = 1.0 / 32;
  double eps1 = 0.6, eps2 = 0.3, CY = 2.0;
  double c_min = 1e-2;
  int line_count = 256;
  std::string generator = "bush";
  std::string shading = "full";
  double mu = 0;  // 0 = formula value

  int grid_n = 0;        // frequency samples per side; 0 = auto
  double budget_min = 30;

  void apply(const std::string& key, const std::string& value);
  void validate() const;
};

ExperimentConfig parse_file(const std::string& path);
std::vector<double> parse_scales(const std::string& text);

}  // namespace hypdec::config
