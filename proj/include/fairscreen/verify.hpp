#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fairscreen {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;  // first failure, or a short summary when passing
};

// Runs every acceptance criterion, streaming one PASS/FAIL line per criterion
// to `log` (when non-null). Returns all results.
std::vector<CriterionResult> run_acceptance(std::ostream* log);

}  // namespace fairscreen
