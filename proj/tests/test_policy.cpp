#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fairscreen/pipeline.hpp"
#include "fairscreen/policy.hpp"
#include "fairscreen/rng.hpp"

using namespace fairscreen;

namespace {

Pipeline<double> one_stage() { return Pipeline<double>({{{1.0, 0.5}, {0.8, 0.5}}}); }
Population<double> quarters() { return Population<double>({0.25, 0.25}, {0.25, 0.25}); }

}  // namespace

TEST_CASE("opportunity ratio policy on the one-stage example") {
  PromotionPolicy<double> p = opportunity_ratio_policy(one_stage());
  CHECK(p.entry(0, 0).promote_pass == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(p.entry(0, 0).promote_fail == 0.0);
  CHECK(p.entry(0, 1).promote_pass == 1.0);
  CHECK(p.entry(0, 1).promote_fail == 0.0);
  CHECK(is_equal_opportunity(one_stage(), p));
}

TEST_CASE("single group: fully-use at every stage") {
  Pipeline<double> pipe({{{0.7, 0.2}}, {{0.9, 0.4}}});
  PromotionPolicy<double> p = opportunity_ratio_policy(pipe);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(p.entry(i, 0).promote_pass == 1.0);
    CHECK(p.entry(i, 0).promote_fail == 0.0);
  }
  CHECK(per_stage_or_policy(pipe).stages() == p.stages());
}

TEST_CASE("opportunity ratios: bottleneck has ratio one, lowest index on ties") {
  Pipeline<double> pipe({{{0.9, 0.1}, {0.9, 0.2}}});  // equal qualified products
  OpportunityRatios<double> r = opportunity_ratios(pipe);
  CHECK(r.bottleneck_group == 0);
  CHECK(r.rho[0] == 1.0);
  CHECK(r.rho[1] == 1.0);
}

TEST_CASE("or-suboptimal instance: OR recall is 3/8") {
  Pipeline<double> pipe({{{0.75, 0.0}, {0.5, 0.25}}, {{0.5, 0.25}, {0.75, 0.0}}});
  Population<double> pop = quarters();
  GroupRates<double> rates = pipeline_rates(pipe, opportunity_ratio_policy(pipe));
  CHECK(recall_of(pop, rates) == doctest::Approx(3.0 / 8.0).epsilon(1e-15));
  CHECK(interview_efficiency(pop, rates) == 1.0);
}

TEST_CASE("per-stage OR: same precision, recall can only drop") {
  // The per-stage bottleneck group differs per stage, so requiring Equal
  // Opportunity after every stage costs recall; interview efficiency matches.
  Pipeline<double> pipe({{{0.75, 0.0}, {0.5, 0.25}}, {{0.5, 0.25}, {0.75, 0.0}}});
  Population<double> pop = quarters();
  GroupRates<double> global = pipeline_rates(pipe, opportunity_ratio_policy(pipe));
  GroupRates<double> staged = pipeline_rates(pipe, per_stage_or_policy(pipe));

  CHECK(interview_efficiency(pop, staged) ==
        doctest::Approx(interview_efficiency(pop, global)).epsilon(1e-12));
  CHECK(recall_of(pop, staged) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(recall_of(pop, global) == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(recall_of(pop, staged) < recall_of(pop, global));

  // Equal Opportunity holds after every prefix of stages.
  for (std::size_t cut = 1; cut <= 2; ++cut) {
    std::vector<std::vector<TestStats<double>>> stats;
    std::vector<std::vector<PolicyEntry<double>>> entries;
    PromotionPolicy<double> staged_policy = per_stage_or_policy(pipe);
    for (std::size_t i = 0; i < cut; ++i) {
      stats.push_back(pipe.stage(i));
      entries.push_back(staged_policy.stages()[i]);
    }
    CHECK(is_equal_opportunity(Pipeline<double>(stats), PromotionPolicy<double>(entries)));
  }
}

TEST_CASE("max_precision_value") {
  // perfect tests
  Pipeline<double> perfect({{{0.9, 0.0}, {0.8, 0.0}}});
  CHECK(max_precision_value(perfect, quarters()) == 1.0);
  // one-stage example closed form
  CHECK(max_precision_value(one_stage(), quarters()) == doctest::Approx(0.64).epsilon(1e-14));
}

TEST_CASE("max precision equals IE of the OR policy (cross-operation oracle)") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t k = static_cast<std::size_t>(rng.uniform_int(1, 3));
    std::size_t groups = static_cast<std::size_t>(rng.uniform_int(1, 3));
    std::vector<std::vector<TestStats<double>>> stages(k, std::vector<TestStats<double>>(groups));
    for (auto& st : stages)
      for (auto& t : st) {
        t.pass_qualified = rng.uniform(0.3, 1.0);
        t.pass_unqualified = rng.uniform(0.0, t.pass_qualified - 0.05);
      }
    std::vector<double> q(groups), u(groups);
    double total = 0;
    for (std::size_t g = 0; g < groups; ++g) {
      q[g] = rng.uniform(0.1, 1.0);
      u[g] = rng.uniform(0.0, 1.0);
      total += q[g] + u[g];
    }
    for (std::size_t g = 0; g < groups; ++g) {
      q[g] /= total;
      u[g] /= total;
    }
    Pipeline<double> pipe(stages);
    Population<double> pop(q, u);
    double via_policy = interview_efficiency(pop, pipeline_rates(pipe, opportunity_ratio_policy(pipe)));
    CHECK(via_policy == doctest::Approx(max_precision_value(pipe, pop)).epsilon(1e-12));
  }
}

TEST_CASE("no grid EOpp policy beats max_precision_value") {
  Pipeline<double> pipe = one_stage();
  Population<double> pop = quarters();
  double cap = max_precision_value(pipe, pop);
  const int steps = 20;
  for (int a1 = 0; a1 <= steps; ++a1)
    for (int a0 = 0; a0 <= steps; ++a0)
      for (int b1 = 0; b1 <= steps; ++b1)
        for (int b0 = 0; b0 <= steps; ++b0) {
          PromotionPolicy<double> pol({{{a1 / 20.0, a0 / 20.0}, {b1 / 20.0, b0 / 20.0}}});
          GroupRates<double> rates = pipeline_rates(pipe, pol);
          if (std::fabs(rates.tpr[0] - rates.tpr[1]) > 1e-9) continue;
          auto [prec, degenerate] = interview_efficiency_checked(pop, rates);
          if (!degenerate) CHECK(prec <= cap + 1e-9);
        }
}

TEST_CASE("equalized odds upper bound") {
  // single group, single stage: bound equals the max precision value
  Pipeline<double> single({{{0.8, 0.3}}});
  Population<double> pop1({0.5}, {0.5});
  CHECK(eodds_ie_upper_bound(single, pop1) ==
        doctest::Approx(max_precision_value(single, pop1)).epsilon(1e-15));

  // two groups with ratios 0.5 and 0.1, quarters population
  Pipeline<double> two({{{0.8, 0.4}, {1.0, 0.1}}});
  CHECK(eodds_ie_upper_bound(two, quarters()) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("grid EOdd-feasible policies respect the bound") {
  Pipeline<double> pipe({{{0.8, 0.4}, {0.4, 0.2}}});
  Population<double> pop = quarters();
  double bound = eodds_ie_upper_bound(pipe, pop);
  const int steps = 10;
  for (int a1 = 0; a1 <= steps; ++a1)
    for (int a0 = 0; a0 <= steps; ++a0)
      for (int b1 = 0; b1 <= steps; ++b1)
        for (int b0 = 0; b0 <= steps; ++b0) {
          PromotionPolicy<double> pol({{{a1 / 10.0, a0 / 10.0}, {b1 / 10.0, b0 / 10.0}}});
          GroupRates<double> rates = pipeline_rates(pipe, pol);
          if (std::fabs(rates.tpr[0] - rates.tpr[1]) > 1e-9) continue;
          if (std::fabs(rates.fpr[0] - rates.fpr[1]) > 1e-9) continue;
          auto [prec, degenerate] = interview_efficiency_checked(pop, rates);
          if (!degenerate) CHECK(prec <= bound + 1e-9);
        }
}

TEST_CASE("nontrivial grid-optimal EOdd policies have a zero entry") {
  // Observation: subtracting the common minimum from all entries keeps
  // Equalized Odds and improves precision, so grid optima touch zero.
  Pipeline<double> pipe({{{0.8, 0.4}, {0.4, 0.2}}});
  Population<double> pop = quarters();
  double best = -1.0;
  std::vector<double> best_entries;
  const int steps = 10;
  for (int a1 = 0; a1 <= steps; ++a1)
    for (int a0 = 0; a0 <= steps; ++a0)
      for (int b1 = 0; b1 <= steps; ++b1)
        for (int b0 = 0; b0 <= steps; ++b0) {
          std::vector<double> entries{a1 / 10.0, a0 / 10.0, b1 / 10.0, b0 / 10.0};
          PromotionPolicy<double> pol({{{entries[0], entries[1]}, {entries[2], entries[3]}}});
          GroupRates<double> rates = pipeline_rates(pipe, pol);
          if (std::fabs(rates.tpr[0] - rates.tpr[1]) > 1e-9) continue;
          if (std::fabs(rates.fpr[0] - rates.fpr[1]) > 1e-9) continue;
          if (rates.tpr[0] <= 0.0) continue;  // trivial all-zero policy
          auto [prec, degenerate] = interview_efficiency_checked(pop, rates);
          if (degenerate) continue;
          if (prec > best + 1e-12) {
            best = prec;
            best_entries = entries;
          }
        }
  REQUIRE(best >= 0.0);
  double min_entry = *std::min_element(best_entries.begin(), best_entries.end());
  CHECK(min_entry == 0.0);
}

TEST_CASE("exact mode: OR policy precision is exactly the closed form") {
  using Q = Rational;
  Pipeline<Q> pipe({{{Q(1), Q(1, 2)}, {Q(4, 5), Q(1, 2)}}});
  Population<Q> pop({Q(1, 4), Q(1, 4)}, {Q(1, 4), Q(1, 4)});
  Q via_policy = interview_efficiency(pop, pipeline_rates(pipe, opportunity_ratio_policy(pipe)));
  CHECK(via_policy == max_precision_value(pipe, pop));
  CHECK(via_policy == Q(16, 25));
}

TEST_CASE("preconditions") {
  CHECK_THROWS_AS(opportunity_ratio_policy(
                      Pipeline<double>({{{0.5, 0.5}}}, /*allow_uninformative_tests=*/true)),
                  std::invalid_argument);
}
