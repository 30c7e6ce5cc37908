#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fairscreen/pipeline.hpp"
#include "fairscreen/rng.hpp"

using namespace fairscreen;

namespace {

Pipeline<double> one_stage() { return Pipeline<double>({{{1.0, 0.5}, {0.8, 0.5}}}); }
Population<double> quarters() { return Population<double>({0.25, 0.25}, {0.25, 0.25}); }

Pipeline<double> random_pipeline(Rng& rng, std::size_t k, std::size_t groups) {
  std::vector<std::vector<TestStats<double>>> stages(k, std::vector<TestStats<double>>(groups));
  for (auto& st : stages)
    for (auto& t : st) {
      t.pass_qualified = rng.uniform(0.3, 1.0);
      t.pass_unqualified = rng.uniform(0.0, t.pass_qualified - 0.05);
    }
  return Pipeline<double>(stages);
}

PromotionPolicy<double> random_policy(Rng& rng, std::size_t k, std::size_t groups) {
  std::vector<std::vector<PolicyEntry<double>>> stages(k, std::vector<PolicyEntry<double>>(groups));
  for (auto& st : stages)
    for (auto& e : st) {
      e.promote_pass = rng.uniform(0.0, 1.0);
      e.promote_fail = rng.uniform(0.0, 1.0);
    }
  return PromotionPolicy<double>(stages);
}

}  // namespace

TEST_CASE("stage_rates closed form") {
  // fully-use policy returns the raw test statistics
  StageRates<double> r = stage_rates<double>({1.0, 0.5}, {1.0, 0.0});
  CHECK(r.promote_qualified == 1.0);
  CHECK(r.promote_unqualified == 0.5);
  // bypass promotes everyone
  r = stage_rates<double>({0.8, 0.5}, {1.0, 1.0});
  CHECK(r.promote_qualified == 1.0);
  CHECK(r.promote_unqualified == 1.0);
  // hand-evaluated two-term formula
  r = stage_rates<double>({1.0, 0.5}, {0.8, 0.0});
  CHECK(r.promote_qualified == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(r.promote_unqualified == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("pipeline_rates products and errors") {
  Pipeline<double> pipe = one_stage();
  auto bypass = PromotionPolicy<double>::bypass_all(1, 2);
  GroupRates<double> rates = pipeline_rates(pipe, bypass);
  CHECK(rates.tpr == std::vector<double>{1.0, 1.0});
  CHECK(rates.fpr == std::vector<double>{1.0, 1.0});

  PromotionPolicy<double> p({{{0.8, 0.0}, {1.0, 0.0}}});
  rates = pipeline_rates(pipe, p);
  CHECK(rates.tpr[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(rates.tpr[1] == doctest::Approx(0.8).epsilon(1e-15));

  auto wrong = PromotionPolicy<double>::bypass_all(2, 2);
  CHECK_THROWS_AS(pipeline_rates(pipe, wrong), std::invalid_argument);
}

TEST_CASE("two-stage averaged policy recall (exact)") {
  using Q = Rational;
  Pipeline<Q> pipe({{{Q(3, 4), Q(0)}, {Q(1, 2), Q(1, 2)}},
                    {{Q(1, 2), Q(1, 2)}, {Q(3, 4), Q(0)}}},
                   /*allow_uninformative_tests=*/true);
  PromotionPolicy<Q> avg({{{Q(1), Q(0)}, {Q(1), Q(3, 4)}},
                          {{Q(1), Q(1)}, {Q(1), Q(1, 2)}}});
  GroupRates<Q> rates = pipeline_rates(pipe, avg);
  CHECK(rates.tpr[1] == Q(49, 64));
  CHECK_FALSE(is_equal_opportunity(rates));
}

TEST_CASE("interview_efficiency") {
  Pipeline<double> pipe = one_stage();
  Population<double> pop = quarters();

  auto bypass = PromotionPolicy<double>::bypass_all(1, 2);
  CHECK(interview_efficiency(pop, pipeline_rates(pipe, bypass)) ==
        doctest::Approx(0.5).epsilon(1e-15));  // base rate

  PromotionPolicy<double> p({{{0.8, 0.0}, {1.0, 0.0}}});
  CHECK(interview_efficiency(pop, pipeline_rates(pipe, p)) ==
        doctest::Approx(0.64).epsilon(1e-14));

  // zero fpr with positive tpr: precision 1
  GroupRates<double> perfect{{0.5, 0.5}, {0.0, 0.0}};
  CHECK(interview_efficiency(pop, perfect) == 1.0);

  // degenerate 0/0 flagged and defined as 0
  GroupRates<double> dead{{0.0, 0.0}, {0.0, 0.0}};
  auto [value, degenerate] = interview_efficiency_checked(pop, dead);
  CHECK(value == 0.0);
  CHECK(degenerate);
}

TEST_CASE("is_equal_opportunity on the one-stage example") {
  Pipeline<double> pipe = one_stage();
  CHECK(is_equal_opportunity(pipe, PromotionPolicy<double>({{{0.8, 0.0}, {1.0, 0.0}}})));
  CHECK(is_equal_opportunity(pipe, PromotionPolicy<double>({{{1.0, 0.0}, {1.0, 1.0}}})));
  CHECK_FALSE(is_equal_opportunity(pipe, PromotionPolicy<double>::fully_use(1, 2)));
}

TEST_CASE("objectives") {
  CHECK(objective_f(0.0, 1.0, 0.5) == 1.0);
  CHECK(objective_f(0.5, 0.75, 1.0) == doctest::Approx(0.875).epsilon(1e-15));
  CHECK(objective_f(0.5, 0.375, 1.0) == doctest::Approx(11.0 / 16.0).epsilon(1e-15));
  CHECK(objective_g(0.5, 0.5, 0.5) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(objective_g(0.5, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(objective_g(0.5, 1.0, 0.0), std::domain_error);
  // exact mode keeps fraction-valued scores exact
  CHECK(objective_f_exact<Rational>(Rational(1, 2), Rational(3, 4), Rational(1)) == Rational(7, 8));
}

TEST_CASE("construction errors name the violated invariant") {
  CHECK_THROWS_WITH_AS(Pipeline<double>({{{0.5, 0.6}}}),
                       doctest::Contains("Minimal Effectiveness"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(Pipeline<double>({{{1.2, 0.5}}}), doctest::Contains("[0,1]"),
                       std::invalid_argument);
  CHECK_THROWS_AS(Pipeline<double>({{{0.5, 0.5}}}), std::invalid_argument);
  CHECK_NOTHROW(Pipeline<double>({{{0.5, 0.5}}}, /*allow_uninformative_tests=*/true));
  CHECK_THROWS_WITH_AS((Population<double>{{0.5, 0.0}, {0.25, 0.25}}),
                       doctest::Contains("positive mass"), std::invalid_argument);
  CHECK_THROWS_WITH_AS((Population<double>{{0.5, 0.5}, {0.25, 0.25}}),
                       doctest::Contains("sum to 1"), std::invalid_argument);
  CHECK_THROWS_AS(PromotionPolicy<double>({{{1.5, 0.0}}}), std::invalid_argument);
}

TEST_CASE("ratio preservation for zero promote_fail stages") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    TestStats<double> t{rng.uniform(0.2, 1.0), 0.0};
    t.pass_unqualified = rng.uniform(0.0, t.pass_qualified - 0.05);
    double pp = rng.uniform(0.05, 1.0);
    StageRates<double> r = stage_rates(t, PolicyEntry<double>{pp, 0.0});
    CHECK(r.promote_unqualified / r.promote_qualified ==
          doctest::Approx(t.pass_unqualified / t.pass_qualified).epsilon(1e-12));
  }
}

TEST_CASE("scaling a zero-fail stage preserves precision and scales recall") {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    Pipeline<double> pipe = random_pipeline(rng, 2, 2);
    Population<double> pop({0.3, 0.2}, {0.25, 0.25});
    PromotionPolicy<double> pol = random_policy(rng, 2, 2);
    pol.stages()[0][0].promote_fail = 0.0;  // make stage 0, group 0 a zero-fail stage
    pol.stages()[0][1].promote_fail = 0.0;
    double c = rng.uniform(0.1, 0.9);
    PromotionPolicy<double> scaled = pol;
    scaled.stages()[0][0].promote_pass *= c;
    scaled.stages()[0][1].promote_pass *= c;

    GroupRates<double> before = pipeline_rates(pipe, pol);
    GroupRates<double> after = pipeline_rates(pipe, scaled);
    CHECK(interview_efficiency(pop, after) ==
          doctest::Approx(interview_efficiency(pop, before)).epsilon(1e-10));
    CHECK(recall_of(pop, after) == doctest::Approx(c * recall_of(pop, before)).epsilon(1e-10));
  }
}

TEST_CASE("interview efficiency is monotone in per-group rates") {
  Rng rng(13);
  Population<double> pop({0.3, 0.2}, {0.25, 0.25});
  for (int i = 0; i < 200; ++i) {
    GroupRates<double> rates{{rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)},
                             {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)}};
    double base = interview_efficiency(pop, rates);
    GroupRates<double> worse = rates;
    worse.fpr[i % 2] = std::min(1.0, worse.fpr[i % 2] + rng.uniform(0.0, 0.5));
    CHECK(interview_efficiency(pop, worse) <= base + 1e-12);
    GroupRates<double> better = rates;
    better.tpr[i % 2] = std::min(1.0, better.tpr[i % 2] + rng.uniform(0.0, 0.5));
    CHECK(interview_efficiency(pop, better) >= base - 1e-12);
  }
}

TEST_CASE("rates over concatenated pipelines multiply") {
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    Pipeline<double> front = random_pipeline(rng, 2, 2);
    Pipeline<double> back = random_pipeline(rng, 1, 2);
    PromotionPolicy<double> pf = random_policy(rng, 2, 2);
    PromotionPolicy<double> pb = random_policy(rng, 1, 2);

    auto stages = front.stages();
    for (const auto& s : back.stages()) stages.push_back(s);
    auto pol_stages = pf.stages();
    for (const auto& s : pb.stages()) pol_stages.push_back(s);
    Pipeline<double> whole(stages);
    PromotionPolicy<double> pol(pol_stages);

    GroupRates<double> a = pipeline_rates(front, pf);
    GroupRates<double> b = pipeline_rates(back, pb);
    GroupRates<double> all = pipeline_rates(whole, pol);
    for (std::size_t g = 0; g < 2; ++g) {
      CHECK(all.tpr[g] == doctest::Approx(a.tpr[g] * b.tpr[g]).epsilon(1e-12));
      CHECK(all.fpr[g] == doctest::Approx(a.fpr[g] * b.fpr[g]).epsilon(1e-12));
    }
  }
}
