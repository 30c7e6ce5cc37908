#pragma once

#include <stdexcept>
#include <vector>

#include "fairscreen/pipeline.hpp"

namespace fairscreen {

// Per-group down-weighting factors rho_X = prod_j tau^j_{X*1} / tau^j_{X1},
// where X* is the group with the smallest product of qualified pass rates.
// The bottleneck group has ratio exactly 1; ties break to the lowest index.
template <class S>
struct OpportunityRatios {
  std::vector<S> rho;
  GroupId bottleneck_group = 0;
};

namespace detail {

template <class S>
void require_strict(const Pipeline<S>& pipeline, const char* who) {
  if (!pipeline.strictly_effective())
    throw std::invalid_argument(std::string(who) + ": pipeline must satisfy Minimal Effectiveness");
}

template <class S>
std::vector<S> qualified_products(const Pipeline<S>& pipeline) {
  std::vector<S> prod(pipeline.group_count(), S(1));
  for (std::size_t i = 0; i < pipeline.stage_count(); ++i)
    for (GroupId g = 0; g < pipeline.group_count(); ++g)
      prod[g] *= pipeline.test(i, g).pass_qualified;
  return prod;
}

}  // namespace detail

template <class S>
OpportunityRatios<S> opportunity_ratios(const Pipeline<S>& pipeline) {
  detail::require_strict(pipeline, "opportunity_ratios");
  std::vector<S> prod = detail::qualified_products(pipeline);
  GroupId best = 0;
  for (GroupId g = 1; g < prod.size(); ++g)
    if (prod[g] < prod[best]) best = g;
  OpportunityRatios<S> out;
  out.bottleneck_group = best;
  out.rho.reserve(prod.size());
  for (GroupId g = 0; g < prod.size(); ++g) out.rho.push_back(prod[best] / prod[g]);
  return out;
}

// Opportunity Ratio policy: first stage promotes a rho_X fraction of passers
// (and nobody who fails); every later stage promotes exactly the passers.
// Maximizes precision over Equal Opportunity policies (exactly, in exact mode).
template <class S>
PromotionPolicy<S> opportunity_ratio_policy(const Pipeline<S>& pipeline) {
  OpportunityRatios<S> ratios = opportunity_ratios(pipeline);
  std::vector<std::vector<PolicyEntry<S>>> stages(
      pipeline.stage_count(), std::vector<PolicyEntry<S>>(pipeline.group_count(), {S(1), S(0)}));
  for (GroupId g = 0; g < pipeline.group_count(); ++g)
    stages[0][g] = PolicyEntry<S>{ratios.rho[g], S(0)};
  return PromotionPolicy<S>(std::move(stages));
}

// Applies the opportunity ratio at every stage, so Equal Opportunity holds at
// the end of each stage, not only overall. Interview efficiency matches the
// Opportunity Ratio policy; recall can only be lower (strictly, when the
// per-stage bottleneck group varies).
template <class S>
PromotionPolicy<S> per_stage_or_policy(const Pipeline<S>& pipeline) {
  detail::require_strict(pipeline, "per_stage_or_policy");
  std::vector<std::vector<PolicyEntry<S>>> stages(
      pipeline.stage_count(), std::vector<PolicyEntry<S>>(pipeline.group_count(), {S(1), S(0)}));
  for (std::size_t i = 0; i < pipeline.stage_count(); ++i) {
    GroupId best = 0;
    for (GroupId g = 1; g < pipeline.group_count(); ++g)
      if (pipeline.test(i, g).pass_qualified < pipeline.test(i, best).pass_qualified) best = g;
    for (GroupId g = 0; g < pipeline.group_count(); ++g)
      stages[i][g] = PolicyEntry<S>{
          pipeline.test(i, best).pass_qualified / pipeline.test(i, g).pass_qualified, S(0)};
  }
  return PromotionPolicy<S>(std::move(stages));
}

// Maximum interview efficiency over Equal Opportunity policies:
// |q| / (|q| + sum_X u_X prod_i tau^i_{X0} / tau^i_{X1}).
template <class S>
S max_precision_value(const Pipeline<S>& pipeline, const Population<S>& pop) {
  detail::require_strict(pipeline, "max_precision_value");
  if (pop.group_count() != pipeline.group_count())
    throw std::invalid_argument("max_precision_value: population and pipeline group counts differ");
  S q = pop.positive_total();
  S penalty(0);
  for (GroupId g = 0; g < pipeline.group_count(); ++g) {
    S ratio(1);
    for (std::size_t i = 0; i < pipeline.stage_count(); ++i)
      ratio *= pipeline.test(i, g).pass_unqualified / pipeline.test(i, g).pass_qualified;
    penalty += pop.negative(g) * ratio;
  }
  return q / (q + penalty);
}

// Upper bound on interview efficiency of any Equalized Odds policy:
// |q| / (|q| + rho * |u|), rho = max_X prod_i tau^i_{X0} / tau^i_{X1}.
template <class S>
S eodds_ie_upper_bound(const Pipeline<S>& pipeline, const Population<S>& pop) {
  detail::require_strict(pipeline, "eodds_ie_upper_bound");
  if (pop.group_count() != pipeline.group_count())
    throw std::invalid_argument("eodds_ie_upper_bound: population and pipeline group counts differ");
  S worst(0);
  for (GroupId g = 0; g < pipeline.group_count(); ++g) {
    S ratio(1);
    for (std::size_t i = 0; i < pipeline.stage_count(); ++i)
      ratio *= pipeline.test(i, g).pass_unqualified / pipeline.test(i, g).pass_qualified;
    if (ratio > worst) worst = ratio;
  }
  S q = pop.positive_total();
  return q / (q + worst * pop.negative_total());
}

}  // namespace fairscreen
