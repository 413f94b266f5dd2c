#pragma once

#include <string>
#include <vector>

namespace fldelay::verify {

enum class Level { Fast, Full };

struct CheckResult {
  std::string name;
  bool pass;
  std::string detail;
  double seconds;
};

/// Fast level: scalar-function round trips, inner-objective convexity and
/// gradient checks (a few seconds). Full level adds the grid-oracle
/// equivalence runs, scheme dominance, sweep trend, termination and the
/// training-round bound (a few minutes).
std::vector<CheckResult> run_checks(Level level);

/// True when every check passed.
bool all_passed(const std::vector<CheckResult>& results);

}  // namespace fldelay::verify
