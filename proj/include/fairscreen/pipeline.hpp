#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fairscreen/rational.hpp"

namespace fairscreen {

// Scalar S is double or Rational. All screening-pipeline arithmetic below is
// shared between the floating-point and exact modes.

using GroupId = std::size_t;

// Per-stage, per-group test statistics: probability that a qualified
// (resp. unqualified) candidate passes the stage's test.
template <class S>
struct TestStats {
  S pass_qualified{};
  S pass_unqualified{};

  bool operator==(const TestStats&) const = default;
};

// Per-stage, per-group promotion probabilities conditioned on passing or
// failing the current test.
template <class S>
struct PolicyEntry {
  S promote_pass{};
  S promote_fail{};

  bool operator==(const PolicyEntry&) const = default;
};

// Promotion probabilities of one stage for a single group: probability a
// qualified (resp. unqualified) candidate advances to the next stage.
template <class S>
struct StageRates {
  S promote_qualified{};
  S promote_unqualified{};
};

template <class S>
struct GroupRates {
  std::vector<S> tpr;  // per group, product of stage promote_qualified
  std::vector<S> fpr;  // per group, product of stage promote_unqualified
};

template <class S>
struct PipelineMetrics {
  GroupRates<S> rates;
  S recall{};
  S precision{};
  bool degenerate = false;  // precision was 0/0
};

namespace detail {

template <class S>
inline bool in_unit_interval(const S& v) {
  return v >= S(0) && v <= S(1);
}

}  // namespace detail

// A k-stage screening pipeline over a fixed group list. Stage statistics are
// validated at construction; Minimal Effectiveness (pass_qualified strictly
// above pass_unqualified) is required unless allow_uninformative_tests is set,
// which a few evaluation-only instances need.
template <class S>
class Pipeline {
 public:
  Pipeline(std::vector<std::vector<TestStats<S>>> stages, bool allow_uninformative_tests = false)
      : stages_(std::move(stages)) {
    if (stages_.empty()) throw std::invalid_argument("Pipeline: at least one stage required");
    const std::size_t groups = stages_[0].size();
    if (groups == 0) throw std::invalid_argument("Pipeline: at least one group required");
    strictly_effective_ = true;
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      if (stages_[i].size() != groups)
        throw std::invalid_argument("Pipeline: stage " + std::to_string(i) +
                                    " has inconsistent group count");
      for (std::size_t g = 0; g < groups; ++g) {
        const TestStats<S>& t = stages_[i][g];
        if (!detail::in_unit_interval(t.pass_qualified) || !detail::in_unit_interval(t.pass_unqualified))
          throw std::invalid_argument("TestStats: pass probabilities must lie in [0,1] (stage " +
                                      std::to_string(i) + ", group " + std::to_string(g) + ")");
        if (t.pass_unqualified > t.pass_qualified)
          throw std::invalid_argument(
              "TestStats: Minimal Effectiveness requires pass_qualified >= pass_unqualified (stage " +
              std::to_string(i) + ", group " + std::to_string(g) + ")");
        if (!(t.pass_qualified > t.pass_unqualified)) strictly_effective_ = false;
      }
    }
    if (!strictly_effective_ && !allow_uninformative_tests)
      throw std::invalid_argument(
          "TestStats: Minimal Effectiveness requires pass_qualified > pass_unqualified for every "
          "group at every stage");
  }

  std::size_t stage_count() const { return stages_.size(); }
  std::size_t group_count() const { return stages_[0].size(); }
  bool strictly_effective() const { return strictly_effective_; }

  const TestStats<S>& test(std::size_t stage, GroupId group) const {
    return stages_.at(stage).at(group);
  }
  const std::vector<TestStats<S>>& stage(std::size_t i) const { return stages_.at(i); }
  const std::vector<std::vector<TestStats<S>>>& stages() const { return stages_; }

 private:
  std::vector<std::vector<TestStats<S>>> stages_;
  bool strictly_effective_ = true;
};

// Per-group positive/negative mass. Masses are global: they sum to 1 over all
// groups and labels together.
template <class S>
class Population {
 public:
  Population(std::vector<S> positive_mass, std::vector<S> negative_mass)
      : q_(std::move(positive_mass)), u_(std::move(negative_mass)) {
    if (q_.empty() || q_.size() != u_.size())
      throw std::invalid_argument("Population: positive/negative mass lists must be nonempty and equal length");
    S total(0);
    for (std::size_t g = 0; g < q_.size(); ++g) {
      if (!(q_[g] > S(0)))
        throw std::invalid_argument("Population: positive mass must be > 0 (group " + std::to_string(g) + ")");
      if (u_[g] < S(0))
        throw std::invalid_argument("Population: negative mass must be >= 0 (group " + std::to_string(g) + ")");
      total += q_[g] + u_[g];
    }
    double gap = to_double(total - S(1));
    if (gap < -1e-12 || gap > 1e-12)
      throw std::invalid_argument("Population: total mass must sum to 1 within 1e-12");
  }

  std::size_t group_count() const { return q_.size(); }
  const S& positive(GroupId g) const { return q_.at(g); }
  const S& negative(GroupId g) const { return u_.at(g); }

  S positive_total() const {
    S t(0);
    for (const S& v : q_) t += v;
    return t;
  }
  S negative_total() const {
    S t(0);
    for (const S& v : u_) t += v;
    return t;
  }

 private:
  std::vector<S> q_, u_;
};

// Promotion policy for every stage and group. Entries validated to [0,1].
template <class S>
class PromotionPolicy {
 public:
  explicit PromotionPolicy(std::vector<std::vector<PolicyEntry<S>>> stages)
      : stages_(std::move(stages)) {
    if (stages_.empty()) throw std::invalid_argument("PromotionPolicy: at least one stage required");
    const std::size_t groups = stages_[0].size();
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      if (stages_[i].size() != groups)
        throw std::invalid_argument("PromotionPolicy: stage " + std::to_string(i) +
                                    " has inconsistent group count");
      for (std::size_t g = 0; g < groups; ++g) {
        const PolicyEntry<S>& e = stages_[i][g];
        if (!detail::in_unit_interval(e.promote_pass) || !detail::in_unit_interval(e.promote_fail))
          throw std::invalid_argument("PromotionPolicy: probabilities must lie in [0,1] (stage " +
                                      std::to_string(i) + ", group " + std::to_string(g) + ")");
      }
    }
  }

  std::size_t stage_count() const { return stages_.size(); }
  std::size_t group_count() const { return stages_[0].size(); }
  const PolicyEntry<S>& entry(std::size_t stage, GroupId group) const {
    return stages_.at(stage).at(group);
  }
  std::vector<std::vector<PolicyEntry<S>>>& stages() { return stages_; }
  const std::vector<std::vector<PolicyEntry<S>>>& stages() const { return stages_; }

  // All stages promote everyone regardless of the test outcome.
  static PromotionPolicy bypass_all(std::size_t stage_count, std::size_t group_count) {
    return uniform(stage_count, group_count, PolicyEntry<S>{S(1), S(1)});
  }
  // Every stage promotes exactly those who pass.
  static PromotionPolicy fully_use(std::size_t stage_count, std::size_t group_count) {
    return uniform(stage_count, group_count, PolicyEntry<S>{S(1), S(0)});
  }

 private:
  static PromotionPolicy uniform(std::size_t k, std::size_t groups, PolicyEntry<S> e) {
    return PromotionPolicy(std::vector<std::vector<PolicyEntry<S>>>(
        k, std::vector<PolicyEntry<S>>(groups, e)));
  }

  std::vector<std::vector<PolicyEntry<S>>> stages_;
};

// Promotion probabilities of a positive / negative candidate through one
// stage under the given per-group policy entry.
template <class S>
StageRates<S> stage_rates(const TestStats<S>& test, const PolicyEntry<S>& entry) {
  StageRates<S> r;
  r.promote_qualified =
      test.pass_qualified * entry.promote_pass + (S(1) - test.pass_qualified) * entry.promote_fail;
  r.promote_unqualified = test.pass_unqualified * entry.promote_pass +
                          (S(1) - test.pass_unqualified) * entry.promote_fail;
  return r;
}

template <class S>
StageRates<S> stage_rates(const Pipeline<S>& pipeline, const PromotionPolicy<S>& policy,
                          std::size_t stage, GroupId group) {
  return stage_rates(pipeline.test(stage, group), policy.entry(stage, group));
}

// Per-group end-to-end true/false positive rates: products of stage rates.
template <class S>
GroupRates<S> pipeline_rates(const Pipeline<S>& pipeline, const PromotionPolicy<S>& policy) {
  if (pipeline.stage_count() != policy.stage_count())
    throw std::invalid_argument("pipeline_rates: policy stage count (" +
                                std::to_string(policy.stage_count()) +
                                ") must match pipeline stage count (" +
                                std::to_string(pipeline.stage_count()) + ")");
  if (pipeline.group_count() != policy.group_count())
    throw std::invalid_argument("pipeline_rates: policy group count must match pipeline group count");
  GroupRates<S> out;
  out.tpr.assign(pipeline.group_count(), S(1));
  out.fpr.assign(pipeline.group_count(), S(1));
  for (std::size_t i = 0; i < pipeline.stage_count(); ++i) {
    for (GroupId g = 0; g < pipeline.group_count(); ++g) {
      StageRates<S> r = stage_rates(pipeline, policy, i, g);
      out.tpr[g] *= r.promote_qualified;
      out.fpr[g] *= r.promote_unqualified;
    }
  }
  return out;
}

// Interview efficiency (precision): mass of qualified finalists over all
// finalists. 0/0 is defined as 0 and flagged.
template <class S>
std::pair<S, bool> interview_efficiency_checked(const Population<S>& pop, const GroupRates<S>& rates) {
  if (pop.group_count() != rates.tpr.size() || pop.group_count() != rates.fpr.size())
    throw std::invalid_argument("interview_efficiency: rates must cover every group");
  S num(0), neg(0);
  for (GroupId g = 0; g < pop.group_count(); ++g) {
    num += pop.positive(g) * rates.tpr[g];
    neg += pop.negative(g) * rates.fpr[g];
  }
  S den = num + neg;
  if (den == S(0)) return {S(0), true};
  return {num / den, false};
}

template <class S>
S interview_efficiency(const Population<S>& pop, const GroupRates<S>& rates) {
  return interview_efficiency_checked(pop, rates).first;
}

// Throughput efficiency (recall): qualified-mass-weighted mean of per-group
// TPRs. Equals the common TPR whenever Equal Opportunity holds.
template <class S>
S recall_of(const Population<S>& pop, const GroupRates<S>& rates) {
  S num(0);
  for (GroupId g = 0; g < pop.group_count(); ++g) num += pop.positive(g) * rates.tpr[g];
  return num / pop.positive_total();
}

template <class S>
bool is_equal_opportunity(const GroupRates<S>& rates, double tol = 1e-9) {
  S lo = rates.tpr[0], hi = rates.tpr[0];
  for (const S& v : rates.tpr) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return to_double(hi - lo) <= tol;
}

template <class S>
bool is_equal_opportunity(const Pipeline<S>& pipeline, const PromotionPolicy<S>& policy,
                          double tol = 1e-9) {
  return is_equal_opportunity(pipeline_rates(pipeline, policy), tol);
}

// Objective weight conversion: alpha arrives as a double; the exact mode only
// accepts weights that are exact binary fractions so no precision is lost
// silently. Exact-mode callers with non-dyadic weights use the *_exact forms.
inline double make_weight(double w, const double&) { return w; }
inline Rational make_weight(double w, const Rational&) {
  Rational r(0);
  double remaining = w;
  std::int64_t den = 1;
  for (int i = 0; i < 62 && remaining != 0.0; ++i) {
    remaining *= 2;
    den *= 2;
    std::int64_t bit = static_cast<std::int64_t>(remaining);
    remaining -= static_cast<double>(bit);
    r += Rational(bit, den);
  }
  if (remaining != 0.0)
    throw std::invalid_argument("objective weight is not an exact binary fraction");
  return r;
}

template <class S>
S objective_f_exact(const S& alpha, const S& recall, const S& precision) {
  return (S(1) - alpha) * recall + alpha * precision;
}

template <class S>
S objective_g_exact(const S& alpha, const S& recall, const S& precision) {
  if (!(recall > S(0)) || !(precision > S(0)))
    throw std::domain_error("objective_g: recall and precision must be positive");
  return (S(1) - alpha) / recall + alpha / precision;
}

// f_alpha = (1-alpha) * recall + alpha * precision.
template <class S>
S objective_f(double alpha, const S& recall, const S& precision) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("objective_f: alpha must lie in [0,1]");
  return objective_f_exact(make_weight(alpha, recall), recall, precision);
}

// g_alpha = (1-alpha) / recall + alpha / precision. Requires both positive.
template <class S>
S objective_g(double alpha, const S& recall, const S& precision) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("objective_g: alpha must lie in [0,1]");
  return objective_g_exact(make_weight(alpha, recall), recall, precision);
}

// Convenience bundle.
template <class S>
PipelineMetrics<S> evaluate(const Pipeline<S>& pipeline, const PromotionPolicy<S>& policy,
                            const Population<S>& pop) {
  PipelineMetrics<S> m;
  m.rates = pipeline_rates(pipeline, policy);
  m.recall = recall_of(pop, m.rates);
  auto [prec, degen] = interview_efficiency_checked(pop, m.rates);
  m.precision = prec;
  m.degenerate = degen;
  return m;
}

using PipelineD = Pipeline<double>;
using PopulationD = Population<double>;
using PromotionPolicyD = PromotionPolicy<double>;
using PipelineQ = Pipeline<Rational>;
using PopulationQ = Population<Rational>;
using PromotionPolicyQ = PromotionPolicy<Rational>;

}  // namespace fairscreen
