#pragma once

#include <string>
#include <vector>

namespace hypdec::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  bool attempted = false;
  std::string detail;
  double seconds = 0;
};

// Runs the acceptance suite in order; criteria that would start after the
// budget (minutes) is exhausted are reported as not attempted.
std::vector<CriterionResult> run_all(double budget_minutes);
void print_table(const std::vector<CriterionResult>& results);
bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace hypdec::acceptance
