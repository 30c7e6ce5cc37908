#pragma once

#include <vector>

namespace fairscreen {

// Dense two-phase simplex for small problems:
//   minimize c.v   subject to  A v >= b,  v >= 0.
// Sizes here are tiny (tens of variables), so a tableau with Bland's rule is
// plenty and keeps the solver dependency-free.
struct LpResult {
  enum class Status { optimal, infeasible, unbounded };
  Status status = Status::infeasible;
  double value = 0.0;
  std::vector<double> solution;
};

LpResult solve_lp_geq(const std::vector<double>& objective,
                      const std::vector<std::vector<double>>& constraints,
                      const std::vector<double>& rhs);

}  // namespace fairscreen
