#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fairscreen/pipeline.hpp"
#include "fairscreen/policy.hpp"

namespace fairscreen {

enum class ObjectiveKind { linear, reciprocal };  // f_alpha (maximize) | g_alpha (minimize)

enum class Certificate { exact, fptas, two_approx, closed_form };

std::string certificate_name(Certificate c);

struct OptimizerResult {
  PromotionPolicy<double> policy;
  double value = 0.0;
  Certificate certificate = Certificate::exact;
  double eps = 0.0;  // meaningful for fptas certificates
  GroupRates<double> rates;
  double recall = 0.0;
  double precision = 0.0;
};

// Better of bypass-all (recall 1) and the Opportunity Ratio policy (max
// precision); a 2-approximation of max f_alpha over Equal Opportunity
// policies.
OptimizerResult two_approx(const Pipeline<double>& pipeline, const Population<double>& pop,
                           double alpha);

struct StageWitness {
  double promote_pass = 0.0;
  double promote_fail = 0.0;
};

// Decides whether one stage can simultaneously push the qualified promotion
// rate to at least (1-eps_bar)^tpr_exp while keeping the unqualified rate at
// most (1-eps_bar)^fpr_exp. Decided exactly by enumerating the vertices of
// (two half-planes intersected with the unit square); returns the witness
// with the smallest unqualified rate.
std::optional<StageWitness> stage_feasible(const TestStats<double>& test, int fpr_exp, int tpr_exp,
                                           double eps_bar);

// Per-group Boolean DP over discretized (tpr, fpr) levels. feasible(i,j1,j0)
// means: some policy prefix through stage i has TPR >= (1-eps_bar)^j1 and
// FPR <= (1-eps_bar)^j0. Stored compactly as, per (i, j1), the largest
// feasible j0 plus the back-pointer split that realizes it.
struct DpTable {
  double eps_bar = 0.0;
  double l_tpr = 0.0, l_fpr = 0.0;
  int ell_tpr = 0, ell_fpr = 0;
  std::vector<double> pw;                   // pw[j] = (1-eps_bar)^j
  std::vector<std::vector<int>> capacity;   // [stage][j1] -> max feasible j0
  std::vector<std::vector<int>> split;      // [stage][j1] -> j1-demand spent at this stage

  bool feasible(std::size_t stage, int j1, int j0) const {
    if (j1 < 0 || j1 > ell_tpr || j0 < 0) return false;
    return j0 <= capacity[stage][static_cast<std::size_t>(j1)];
  }
};

DpTable build_dp_table(const std::vector<TestStats<double>>& stages, double eps_bar, int ell_tpr,
                       int ell_fpr);

// FPTAS for maximizing f_alpha over Equal Opportunity policies:
// value >= (1-eps) * OPT.
OptimizerResult fptas_max(const Pipeline<double>& pipeline, const Population<double>& pop,
                          double alpha, double eps);

// FPTAS for minimizing g_alpha: value <= (1+eps) * OPT.
OptimizerResult fptas_min(const Pipeline<double>& pipeline, const Population<double>& pop,
                          double alpha, double eps);

// Exact optimum via enumeration of the Pareto-dominant policy structure (at
// most one partially-used level per group, every other level fully used or
// bypassed) with a 1-D search over the common recall level per configuration.
OptimizerResult exact_optimal(const Pipeline<double>& pipeline, const Population<double>& pop,
                              double alpha, ObjectiveKind objective);

// DP variant that uses one shared policy for all groups (group-blind).
// Returned policies are exactly Equal Opportunity; bypass-all is the
// guaranteed fallback.
OptimizerResult group_blind_dp(const Pipeline<double>& pipeline, const Population<double>& pop,
                               double alpha, double eps, ObjectiveKind objective);

}  // namespace fairscreen
