#include <cstdio>
#include <cstring>

#include "hypdec/acceptance.hpp"

// Runs every acceptance criterion and prints one verdict line per criterion.
// Exits nonzero if any criterion fails or is skipped.
int main(int argc, char** argv) {
  double budget_minutes = 60;
  for (int i = 1; i < argc - 1; ++i)
    if (std::strcmp(argv[i], "--budget") == 0)
      budget_minutes = std::atof(argv[i + 1]);
  auto results = hypdec::acceptance::run_all(budget_minutes);
  return hypdec::acceptance::all_passed(results) ? 0 : 1;
}
