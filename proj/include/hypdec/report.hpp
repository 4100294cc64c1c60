#pragma once

#include <string>
#include <vector>

#include "hypdec/common.hpp"

namespace hypdec::report {

// One estimator evaluation. lhs/rhs are the two sides of the inequality
// being probed; extra params ride along into the CSV.
struct RatioReport {
  std::string scenario;
  std::string ensemble;
  double R = 0;
  uint64_t seed = 0;
  int trial = 0;
  double lhs = 0;
  double rhs = 0;
  double ratio = 0;
  bool degenerate = false;
  std::vector<std::pair<std::string, double>> params;

  void set(const std::string& key, double value);
  double get(const std::string& key, double fallback = 0) const;
  void finish() {
    if (rhs > 0)
      ratio = lhs / rhs;
    else {
      ratio = 0;
      degenerate = true;
    }
  }
};

// Least-squares slope of log2(y) against log2(x). Needs >= 2 points;
// non-positive y values are rejected.
double fit_log2_slope(const std::vector<double>& x,
                      const std::vector<double>& y);

// Per-scale aggregate of a trial batch.
struct ScaleSummary {
  double R = 0;
  int trials = 0;
  double max_ratio = 0;
  double mean_ratio = 0;
};
ScaleSummary summarize(const std::vector<RatioReport>& rows, double R);

void write_csv(const std::vector<RatioReport>& rows, const std::string& path);

// JSON summary: per-scale max ratios, fitted exponent, invariant flags.
struct Summary {
  std::string scenario;
  std::vector<ScaleSummary> scales;
  double exponent = 0;
  bool exponent_valid = false;
  std::vector<std::pair<std::string, double>> extra;
  std::vector<std::pair<std::string, bool>> checks;
};
void write_json(const Summary& s, const std::string& path);

// Minimal log-log scatter of (R, max ratio) with the fitted line.
void write_svg_loglog(const Summary& s, const std::string& path);

}  // namespace hypdec::report
