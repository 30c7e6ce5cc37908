#include "fairscreen/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "fairscreen/defense.hpp"
#include "fairscreen/optimizer.hpp"
#include "fairscreen/pipeline.hpp"
#include "fairscreen/policy.hpp"
#include "fairscreen/rng.hpp"
#include "fairscreen/strategic.hpp"

namespace fairscreen {

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& msg) {
    if (!cond && ok) {
      ok = false;
      detail = msg;
    }
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// Shared instances -----------------------------------------------------------

Halfspace zigzag_h1() { return Halfspace({-3.0, 4.0}, 1.0); }
Halfspace zigzag_h2() { return Halfspace({1.0, 0.0}, 1.0); }

Pipeline<double> one_stage_example() {
  return Pipeline<double>({{{1.0, 0.5}, {0.8, 0.5}}});
}

Population<double> quarters() { return Population<double>({0.25, 0.25}, {0.25, 0.25}); }

// T_A = (3/4,0),(1/2,1/4); T_B = (1/2,1/4),(3/4,0)
Pipeline<double> or_suboptimal_pipeline() {
  return Pipeline<double>({{{0.75, 0.0}, {0.5, 0.25}}, {{0.5, 0.25}, {0.75, 0.0}}});
}

Pipeline<double> nonlocality_pipeline(std::size_t tests) {
  std::vector<std::vector<TestStats<double>>> stages{{{0.5, 0.0}}};
  for (std::size_t i = 1; i < tests; ++i) stages.push_back({{0.99, 0.5}});
  return Pipeline<double>(stages);
}

Halfspace random_direction_2d(Rng& rng, double angle) {
  return Halfspace({std::cos(angle), std::sin(angle)}, rng.uniform(-1.5, 1.5));
}

struct TwoClassifierInstance {
  Halfspace h1, h2;
  Vec x0;
  double theta;
};

TwoClassifierInstance random_pair(Rng& rng, double theta_lo, double theta_hi) {
  double phi = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  double theta = rng.uniform(theta_lo, theta_hi);
  double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
  double psi = 3.14159265358979323846 - theta;  // so that w1.w2 = -cos(theta)
  Halfspace h1 = random_direction_2d(rng, phi);
  Halfspace h2 = random_direction_2d(rng, phi + sign * psi);
  Vec x0{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
  return {h1, h2, x0, theta};
}

int expected_region_case(const Vec& x0, const Halfspace& h1, const Halfspace& h2) {
  if (h1.passes(x0)) return 1;
  Vec p1 = project(x0, h1);
  if (h2.passes(p1)) return 4;
  double cos_t = -dot(h1.normal, h2.normal);
  double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
  double tan_abs =
      std::fabs(cos_t) < 1e-300 ? std::numeric_limits<double>::infinity() : sin_t / std::fabs(cos_t);
  double det = h1.normal[0] * h2.normal[1] - h2.normal[0] * h1.normal[1];
  Vec inter{(h1.offset * h2.normal[1] - h2.offset * h1.normal[1]) / det,
            (h1.normal[0] * h2.offset - h2.normal[0] * h1.offset) / det};
  double foot_norm = norm2(vec_sub(p1, inter));
  double d1 = distance(x0, h1);
  return (foot_norm == 0.0 || tan_abs >= foot_norm / d1) ? 3 : 2;
}

// Random strictly-effective pipeline in double precision.
Pipeline<double> random_pipeline(Rng& rng, std::size_t k, std::size_t groups) {
  std::vector<std::vector<TestStats<double>>> stages(k, std::vector<TestStats<double>>(groups));
  for (auto& stage : stages)
    for (auto& t : stage) {
      t.pass_qualified = rng.uniform(0.4, 1.0);
      t.pass_unqualified = rng.uniform(0.0, t.pass_qualified - 0.1);
    }
  return Pipeline<double>(stages);
}

Population<double> random_population(Rng& rng, std::size_t groups) {
  std::vector<double> q(groups), u(groups);
  double total = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    q[g] = rng.uniform(0.1, 1.0);
    u[g] = rng.uniform(0.1, 1.0);
    total += q[g] + u[g];
  }
  for (std::size_t g = 0; g < groups; ++g) {
    q[g] /= total;
    u[g] /= total;
  }
  return Population<double>(q, u);
}

// Criterion 1 ----------------------------------------------------------------

CriterionResult criterion_zigzag() {
  Check c;
  Halfspace h1 = zigzag_h1(), h2 = zigzag_h2();
  Vec x0{0.0, 0.0};

  double conj = conjunction_best_response(x0, {h1, h2}).cost;
  c.require(std::fabs(conj - std::sqrt(2.0)) <= 1e-9,
            "conjunction cost " + fmt(conj) + " != sqrt(2)");

  ManipulationPath seq = sequential_closed_form_2d(x0, h1, h2);
  c.require(seq.closed_form_case == 2, "expected the zig-zag (R2) case");
  c.require(seq.cost <= 1.25 + 1e-12, "sequential cost above the 5/4 witness");
  c.require(std::fabs(seq.cost - 31.0 / 25.0) <= 1e-6,
            "sequential cost " + fmt(seq.cost) + " != 31/25");

  // Independent oracle: scan candidate first hops along h1's boundary (from
  // beyond the foot of x0 to beyond the boundary intersection), the optimal
  // second hop being the projection onto h2.
  Vec foot = project(x0, h1);
  Vec inter{1.0, 1.0};  // boundary intersection of the two classifiers
  double span = norm2(vec_sub(inter, foot));
  Vec dir = vec_scale(vec_sub(inter, foot), 1.0 / span);
  double best = std::numeric_limits<double>::infinity();
  const int kPoints = 3200;
  for (int i = 0; i <= kPoints; ++i) {
    double s = (-0.3 + 1.6 * static_cast<double>(i) / kPoints) * span;
    Vec x1 = vec_add(foot, vec_scale(dir, s));
    double cost = norm2(vec_sub(x1, x0)) + distance(x1, h2);
    best = std::min(best, cost);
  }
  c.require(std::fabs(best - seq.cost) <= 1e-5,
            "grid oracle " + fmt(best) + " disagrees with closed form " + fmt(seq.cost));
  return {1, "zig-zag example: conjunction sqrt(2), sequential 31/25 <= 5/4", c.ok, c.detail};
}

// Criterion 2 ----------------------------------------------------------------

CriterionResult criterion_cost_gap() {
  Check c;
  const double gamma = 300.0;
  Halfspace h1({1.0 / gamma, 1.0}, 1.0);
  Halfspace h2({1.0 / gamma, -1.0}, 1.0);
  Vec x0{0.0, 0.0};
  double conj = conjunction_best_response(x0, {h1, h2}).cost;
  double seq = sequential_best_response(x0, {h1, h2}).cost;
  c.require(conj >= gamma - 1e-9, "conjunction cost " + fmt(conj) + " below gamma");
  c.require(seq <= 3.0 + 1e-9, "sequential cost " + fmt(seq) + " above the explicit 3-path");
  c.require(conj / seq >= 100.0, "cost ratio " + fmt(conj / seq) + " below 100");
  return {2, "cost gap (gamma = 300): conjunction >= 300, sequential <= 3, ratio >= 100", c.ok,
          c.detail};
}

// Criteria 3, 4, 6 -----------------------------------------------------------

CriterionResult criterion_closed_form_vs_numeric(bool& seq_le_conj) {
  Check c;
  Rng rng(20240301);
  for (int trial = 0; trial < 1000 && c.ok; ++trial) {
    TwoClassifierInstance inst = random_pair(rng, 0.1, 3.14159265358979323846 - 0.1);
    ManipulationPath closed = sequential_closed_form_2d(inst.x0, inst.h1, inst.h2);
    ManipulationPath numeric =
        sequential_best_response(inst.x0, {inst.h1, inst.h2}, CostSpec::l2(), 17 + trial);
    c.require(std::fabs(closed.cost - numeric.cost) <= 1e-6,
              "trial " + std::to_string(trial) + ": closed " + fmt(closed.cost) + " vs numeric " +
                  fmt(numeric.cost));
    int expected = expected_region_case(inst.x0, inst.h1, inst.h2);
    c.require(closed.closed_form_case == expected,
              "trial " + std::to_string(trial) + ": case label " +
                  std::to_string(closed.closed_form_case) + " != expected " +
                  std::to_string(expected));
    double conj = conjunction_best_response(inst.x0, {inst.h1, inst.h2}).cost;
    if (std::min(closed.cost, numeric.cost) > conj + 1e-12) seq_le_conj = false;
  }
  return {3, "closed form vs numeric solver on 1000 random 2-d instances (costs and R1-R4 labels)",
          c.ok, c.detail};
}

CriterionResult criterion_no_zigzag(bool& seq_le_conj) {
  Check c;
  Rng rng(20240402);
  for (int trial = 0; trial < 500 && c.ok; ++trial) {
    TwoClassifierInstance inst =
        random_pair(rng, 3.14159265358979323846 / 2.0, 3.14159265358979323846 - 0.05);
    double seq = sequential_cost_2d(inst.x0, inst.h1, inst.h2);
    double conj = conjunction_best_response(inst.x0, {inst.h1, inst.h2}).cost;
    c.require(std::fabs(seq - conj) <= 1e-8,
              "trial " + std::to_string(trial) + ": |seq - conj| = " + fmt(std::fabs(seq - conj)));
    if (seq > conj + 1e-12) seq_le_conj = false;
  }
  return {4, "no zig-zag for theta >= pi/2 on 500 random instances", c.ok, c.detail};
}

CriterionResult criterion_monotone(bool& seq_le_conj) {
  Check c;
  Rng rng(20240503);
  for (int trial = 0; trial < 500 && c.ok; ++trial) {
    std::size_t d = 2 + static_cast<std::size_t>(rng.uniform_int(0, 1));
    std::size_t k = static_cast<std::size_t>(rng.uniform_int(2, 4));
    std::vector<Halfspace> hs;
    for (std::size_t i = 0; i < k; ++i) {
      Vec w(d);
      for (double& v : w) v = rng.uniform(0.05, 1.0);
      hs.emplace_back(std::move(w), rng.uniform(-1.0, 1.0));
    }
    Vec x0(d);
    for (double& v : x0) v = rng.uniform(-2.0, 2.0);
    for (int push = 0; push < 40; ++push) {
      bool fails_all = true;
      for (const Halfspace& h : hs)
        if (h.passes(x0)) fails_all = false;
      if (fails_all) break;
      for (double& v : x0) v -= 0.5;
    }

    for (CostKind kind : {CostKind::l2, CostKind::l1}) {
      CostSpec cost;
      cost.kind = kind;
      double seq = sequential_best_response(x0, hs, cost, 99 + trial).cost;
      double conj = conjunction_best_response(x0, hs, cost).cost;
      c.require(std::fabs(seq - conj) <= 1e-8,
                "trial " + std::to_string(trial) + (kind == CostKind::l2 ? " (l2)" : " (l1)") +
                    ": |seq - conj| = " + fmt(std::fabs(seq - conj)));
      if (seq > conj + 1e-12) seq_le_conj = false;
    }
  }
  return {5, "monotone pipelines: sequential = conjunction under l2 and l1 costs (500 instances)",
          c.ok, c.detail};
}

CriterionResult criterion_seq_le_conj(bool carried) {
  Check c;
  c.require(carried, "a randomized suite saw sequential cost above conjunction cost");
  Rng rng(20240604);
  for (int trial = 0; trial < 300 && c.ok; ++trial) {
    std::size_t d = 2 + static_cast<std::size_t>(rng.uniform_int(0, 2));
    std::size_t k = static_cast<std::size_t>(rng.uniform_int(1, 4));
    std::vector<Halfspace> hs;
    for (std::size_t i = 0; i < k; ++i) {
      Vec w(d);
      for (double& v : w) v = rng.uniform(-1.0, 1.0);
      if (norm2(w) < 1e-3) w[0] += 1.0;
      hs.emplace_back(std::move(w), rng.uniform(-1.0, 1.0));
    }
    Vec x0(d);
    for (double& v : x0) v = rng.uniform(-2.5, 2.5);
    double conj;
    try {
      conj = conjunction_best_response(x0, hs).cost;
    } catch (const std::runtime_error&) {
      continue;  // empty intersection: no conjunction benchmark
    }
    double seq = sequential_best_response(x0, hs, CostSpec::l2(), 7 + trial).cost;
    c.require(seq <= conj + 1e-12,
              "trial " + std::to_string(trial) + ": seq " + fmt(seq) + " > conj " + fmt(conj));
  }
  return {6, "sequential cost never exceeds conjunction cost across all randomized suites", c.ok,
          c.detail};
}

// Criterion 7 ----------------------------------------------------------------

CriterionResult criterion_one_stage() {
  Check c;
  Pipeline<double> pipe = one_stage_example();
  Population<double> pop = quarters();

  PromotionPolicy<double> ratio = opportunity_ratio_policy(pipe);
  c.require(ratio.entry(0, 0).promote_pass == 0.8 && ratio.entry(0, 0).promote_fail == 0.0 &&
                ratio.entry(0, 1).promote_pass == 1.0 && ratio.entry(0, 1).promote_fail == 0.0,
            "Opportunity Ratio policy is not ((0.8,0),(1,0))");
  c.require(is_equal_opportunity(pipe, ratio, 1e-9), "Opportunity Ratio policy is not EOpp");
  double precision = interview_efficiency(pop, pipeline_rates(pipe, ratio));
  c.require(std::fabs(precision - 0.64) <= 1e-12, "precision " + fmt(precision) + " != 0.64");

  // Brute force over the 0.05 policy grid: no Equal Opportunity policy beats it.
  double best = 0.0;
  const int steps = 20;
  for (int a1 = 0; a1 <= steps; ++a1)
    for (int a0 = 0; a0 <= steps; ++a0)
      for (int b1 = 0; b1 <= steps; ++b1)
        for (int b0 = 0; b0 <= steps; ++b0) {
          PromotionPolicy<double> pol({{{a1 / 20.0, a0 / 20.0}, {b1 / 20.0, b0 / 20.0}}});
          GroupRates<double> rates = pipeline_rates(pipe, pol);
          if (std::fabs(rates.tpr[0] - rates.tpr[1]) > 1e-9) continue;
          auto [prec, degenerate] = interview_efficiency_checked(pop, rates);
          if (!degenerate) best = std::max(best, prec);
        }
  c.require(best <= 0.64 + 1e-9, "grid search found EOpp precision " + fmt(best) + " > 0.64");
  return {7, "one-stage example: OR policy ((0.8,0),(1,0)), precision 0.64, grid-optimal", c.ok,
          c.detail};
}

// Criterion 8 ----------------------------------------------------------------

CriterionResult criterion_precision_formula() {
  Check c;
  Rng rng(20240805);
  for (int trial = 0; trial < 200 && c.ok; ++trial) {
    std::size_t k = static_cast<std::size_t>(rng.uniform_int(1, 3));
    std::size_t groups = static_cast<std::size_t>(rng.uniform_int(1, 3));

    std::vector<std::vector<TestStats<Rational>>> stages(
        k, std::vector<TestStats<Rational>>(groups));
    for (auto& stage : stages)
      for (auto& t : stage) {
        std::int64_t t1 = rng.uniform_int(4, 12);
        std::int64_t t0 = rng.uniform_int(0, static_cast<int>(t1) - 1);
        t.pass_qualified = Rational(t1, 12);
        t.pass_unqualified = Rational(t0, 12);
      }
    std::vector<Rational> q(groups), u(groups);
    std::int64_t units = 24, used = 0;
    for (std::size_t g = 0; g < groups; ++g) {
      std::int64_t qi = rng.uniform_int(1, 4);
      q[g] = Rational(qi, units);
      used += qi;
    }
    for (std::size_t g = 0; g < groups; ++g) {
      std::int64_t remaining = units - used;
      std::int64_t ui = g + 1 == groups ? remaining : rng.uniform_int(0, static_cast<int>(remaining / 2));
      u[g] = Rational(ui, units);
      used += ui;
    }

    Pipeline<Rational> pipe(stages);
    Population<Rational> pop(q, u);
    Rational via_policy =
        interview_efficiency(pop, pipeline_rates(pipe, opportunity_ratio_policy(pipe)));
    Rational closed_form = max_precision_value(pipe, pop);
    c.require(via_policy == closed_form,
              "trial " + std::to_string(trial) + ": exact-mode IE(OR) != max_precision_value");

    // Double mode on the same instance.
    std::vector<std::vector<TestStats<double>>> dstages(k, std::vector<TestStats<double>>(groups));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t g = 0; g < groups; ++g)
        dstages[i][g] = {stages[i][g].pass_qualified.to_double(),
                         stages[i][g].pass_unqualified.to_double()};
    std::vector<double> dq(groups), du(groups);
    for (std::size_t g = 0; g < groups; ++g) {
      dq[g] = q[g].to_double();
      du[g] = u[g].to_double();
    }
    Pipeline<double> dpipe(dstages);
    Population<double> dpop(dq, du);
    double a = interview_efficiency(dpop, pipeline_rates(dpipe, opportunity_ratio_policy(dpipe)));
    double b = max_precision_value(dpipe, dpop);
    c.require(std::fabs(a - b) <= 1e-12,
              "trial " + std::to_string(trial) + ": double-mode gap " + fmt(std::fabs(a - b)));
  }
  return {8, "IE(OR policy) equals the closed-form max precision on 200 random pipelines", c.ok,
          c.detail};
}

// Criterion 9 ----------------------------------------------------------------

CriterionResult criterion_nonconvexity() {
  Check c;
  using Q = Rational;
  std::vector<std::vector<TestStats<Q>>> stages{
      {{Q(3, 4), Q(0)}, {Q(1, 2), Q(1, 2)}},
      {{Q(1, 2), Q(1, 2)}, {Q(3, 4), Q(0)}}};
  Pipeline<Q> pipe(stages, /*allow_uninformative_tests=*/true);

  // Average of the two Equal Opportunity policies P and Q from the instance.
  std::vector<std::vector<PolicyEntry<Q>>> avg{
      {{Q(1), Q(0)}, {Q(1), Q(3, 4)}},
      {{Q(1), Q(1)}, {Q(1), Q(1, 2)}}};
  PromotionPolicy<Q> mixed(avg);
  GroupRates<Q> rates = pipeline_rates(pipe, mixed);
  c.require(rates.tpr[0] == Q(3, 4), "group A recall is not exactly 3/4");
  c.require(rates.tpr[1] == Q(49, 64), "group B recall is not exactly 49/64");
  c.require(!is_equal_opportunity(rates, 1e-9), "averaged policy unexpectedly Equal Opportunity");
  return {9, "non-convexity example: averaged policy reaches 49/64 exactly and breaks EOpp", c.ok,
          c.detail};
}

// Criterion 10 ---------------------------------------------------------------

CriterionResult criterion_or_suboptimal() {
  Check c;
  Pipeline<double> pipe = or_suboptimal_pipeline();
  Population<double> pop = quarters();

  OptimizerResult exact = exact_optimal(pipe, pop, 0.5, ObjectiveKind::linear);
  c.require(std::fabs(exact.value - 7.0 / 8.0) <= 1e-12,
            "exact optimum " + fmt(exact.value) + " != 7/8");
  c.require(is_equal_opportunity(pipe, exact.policy, 1e-9), "exact policy is not EOpp");
  // the witness is the instance's policy P: A uses t1 and bypasses t2, B mirrors
  c.require(exact.policy.entry(0, 0) == PolicyEntry<double>{1.0, 0.0} &&
                exact.policy.entry(1, 0) == PolicyEntry<double>{1.0, 1.0} &&
                exact.policy.entry(0, 1) == PolicyEntry<double>{1.0, 1.0} &&
                exact.policy.entry(1, 1) == PolicyEntry<double>{1.0, 0.0},
            "exact policy does not match the use/bypass structure of policy P");

  PromotionPolicy<double> ratio = opportunity_ratio_policy(pipe);
  GroupRates<double> rates = pipeline_rates(pipe, ratio);
  double f = objective_f(0.5, recall_of(pop, rates), interview_efficiency(pop, rates));
  c.require(std::fabs(f - 11.0 / 16.0) <= 1e-12, "OR policy objective " + fmt(f) + " != 11/16");
  return {10, "OR-suboptimal example: exact optimum 7/8 beats the OR policy's 11/16", c.ok,
          c.detail};
}

// Criterion 11 ---------------------------------------------------------------

CriterionResult criterion_nonlocality() {
  Check c;
  Population<double> pop({0.5}, {0.5});
  const double alpha = 2.0 / 3.0;  // f = recall + 2 * precision, scaled by 3

  OptimizerResult two = exact_optimal(nonlocality_pipeline(2), pop, alpha, ObjectiveKind::linear);
  c.require(std::fabs(3.0 * two.value - 2.5) <= 1e-9,
            "two-test optimum " + fmt(3.0 * two.value) + " != 2.5");
  c.require(two.policy.entry(0, 0).promote_pass == 1.0 && two.policy.entry(0, 0).promote_fail == 0.0,
            "two-test optimum does not fully use t1");
  c.require(two.policy.entry(1, 0).promote_pass == 1.0 && two.policy.entry(1, 0).promote_fail == 1.0,
            "two-test optimum does not bypass t2");

  OptimizerResult three = exact_optimal(nonlocality_pipeline(3), pop, alpha, ObjectiveKind::linear);
  c.require(3.0 * three.value > 2.57, "three-test optimum " + fmt(3.0 * three.value) + " <= 2.57");
  c.require(three.policy.entry(0, 0).promote_pass == 1.0 &&
                three.policy.entry(0, 0).promote_fail == 1.0,
            "three-test optimum does not bypass t1");
  c.require(three.policy.entry(1, 0).promote_fail == 0.0 &&
                three.policy.entry(2, 0).promote_fail == 0.0 &&
                three.policy.entry(1, 0).promote_pass == 1.0 &&
                three.policy.entry(2, 0).promote_pass == 1.0,
            "three-test optimum does not fully use t2 and t3");
  return {11, "non-locality: optimum switches from {t1} to {t2,t3} when t3 arrives", c.ok, c.detail};
}

// Criterion 12 ---------------------------------------------------------------

CriterionResult criterion_fptas_guarantee() {
  Check c;
  // Table-size accounting: the discretization must match the stated formulas.
  {
    Pipeline<double> pipe = or_suboptimal_pipeline();
    double eps = 0.1, k = 2.0;
    double eps_bar = eps / (2.0 * k);
    double l_tpr = eps / (1.0 - eps) * std::pow(1.0 - eps_bar, k - 1.0);
    int ell = static_cast<int>(std::ceil(std::log(l_tpr) / std::log(1.0 - eps_bar)));
    std::vector<TestStats<double>> col{pipe.test(0, 0), pipe.test(1, 0)};
    DpTable table = build_dp_table(col, eps_bar, ell, ell);
    c.require(static_cast<int>(table.capacity[0].size()) == ell + 1 &&
                  table.capacity.size() == 2,
              "DP table dimensions disagree with the discretization formulas");
  }

  Rng rng(20241206);
  for (int trial = 0; trial < 100 && c.ok; ++trial) {
    std::size_t k = static_cast<std::size_t>(rng.uniform_int(1, 3));
    std::size_t groups = static_cast<std::size_t>(rng.uniform_int(1, 2));
    Pipeline<double> pipe = random_pipeline(rng, k, groups);
    Population<double> pop = random_population(rng, groups);
    double alpha = rng.uniform(0.05, 0.95);
    double eps = trial % 2 == 0 ? 0.05 : 0.1;

    OptimizerResult exact_f = exact_optimal(pipe, pop, alpha, ObjectiveKind::linear);
    OptimizerResult approx_f = fptas_max(pipe, pop, alpha, eps);
    c.require(approx_f.value >= (1.0 - eps) * exact_f.value - 1e-9,
              "trial " + std::to_string(trial) + ": fptas_max " + fmt(approx_f.value) +
                  " below (1-eps) * " + fmt(exact_f.value));
    c.require(is_equal_opportunity(pipe, approx_f.policy, 1e-9),
              "trial " + std::to_string(trial) + ": fptas_max policy not EOpp");

    OptimizerResult exact_g = exact_optimal(pipe, pop, alpha, ObjectiveKind::reciprocal);
    OptimizerResult approx_g = fptas_min(pipe, pop, alpha, eps);
    c.require(approx_g.value <= (1.0 + eps) * exact_g.value + 1e-9,
              "trial " + std::to_string(trial) + ": fptas_min " + fmt(approx_g.value) +
                  " above (1+eps) * " + fmt(exact_g.value));
    c.require(is_equal_opportunity(pipe, approx_g.policy, 1e-9),
              "trial " + std::to_string(trial) + ": fptas_min policy not EOpp");
  }
  return {12, "FPTAS guarantees against the exact optimizer on 100 random instances", c.ok,
          c.detail};
}

// Criterion 13 ---------------------------------------------------------------

CriterionResult criterion_group_blind() {
  Check c;
  Pipeline<double> pipe({{{1.0, 0.0}, {0.5, 0.0}}});
  Population<double> pop = quarters();
  OptimizerResult res = group_blind_dp(pipe, pop, 1.0, 0.3, ObjectiveKind::linear);
  c.require(std::fabs(res.value - 0.5) <= 1e-9,
            "group-blind optimum " + fmt(res.value) + " != |q| = 0.5");
  for (GroupId g = 0; g < 2; ++g) {
    const auto& e = res.policy.entry(0, g);
    c.require(std::fabs(e.promote_pass - e.promote_fail) <= 1e-9,
              "returned policy uses the test (promote_pass != promote_fail)");
  }
  c.require(res.policy.entry(0, 0).promote_pass == res.policy.entry(0, 1).promote_pass &&
                res.policy.entry(0, 0).promote_fail == res.policy.entry(0, 1).promote_fail,
            "returned policy is not group-blind");
  c.require(is_equal_opportunity(pipe, res.policy, 1e-9), "returned policy is not EOpp");
  return {13, "group-blind degenerate case: only (scaled) bypass is EOpp, value |q|", c.ok,
          c.detail};
}

// Criterion 14 ---------------------------------------------------------------

CriterionResult criterion_eodds() {
  Check c;
  // Structured stats so the 0.05-grid contains many exactly-EOdd policies.
  Pipeline<double> pipe({{{0.8, 0.4}, {0.4, 0.2}}});
  Population<double> pop = quarters();
  double bound = eodds_ie_upper_bound(pipe, pop);
  const int steps = 17;  // 18^4 = 104,976 sampled policies
  std::size_t feasible = 0;
  double worst = 0.0;
  for (int a1 = 0; a1 <= steps; ++a1)
    for (int a0 = 0; a0 <= steps; ++a0)
      for (int b1 = 0; b1 <= steps; ++b1)
        for (int b0 = 0; b0 <= steps; ++b0) {
          PromotionPolicy<double> pol({{{a1 / 17.0, a0 / 17.0}, {b1 / 17.0, b0 / 17.0}}});
          GroupRates<double> rates = pipeline_rates(pipe, pol);
          if (std::fabs(rates.tpr[0] - rates.tpr[1]) > 1e-9) continue;
          if (std::fabs(rates.fpr[0] - rates.fpr[1]) > 1e-9) continue;
          ++feasible;
          auto [prec, degenerate] = interview_efficiency_checked(pop, rates);
          if (!degenerate) worst = std::max(worst, prec);
        }
  c.require(feasible >= 18, "grid produced too few exactly-EOdd policies");
  c.require(worst <= bound + 1e-9,
            "EOdd-feasible grid policy precision " + fmt(worst) + " exceeds bound " + fmt(bound));

  // EOpp-vs-EOdd construction with delta = mu = 1e-3, gamma = 0.5.
  const double delta = 1e-3, mu = 1e-3, gamma = 0.5;
  Pipeline<double> gap_pipe({{{1.0, 0.0}, {1.0, 1.0 - delta}}});
  Population<double> gap_pop({gamma / 2.0, gamma / 2.0}, {1.0 - gamma - mu, mu});
  double ratio = max_precision_value(gap_pipe, gap_pop) / eodds_ie_upper_bound(gap_pipe, gap_pop);
  c.require(std::fabs(ratio - 1.0 / gamma) <= 0.05 / gamma,
            "EOpp/EOdd precision ratio " + fmt(ratio) + " not within 5% of 1/gamma");
  return {14, "Equalized Odds: grid-sampled feasible policies respect the bound; gap ~ 1/|q|", c.ok,
          c.detail};
}

// Criterion 15 ---------------------------------------------------------------

struct GeneralPositionInstance {
  std::vector<Halfspace> hs;
};

GeneralPositionInstance random_general_position(Rng& rng, std::size_t k) {
  for (int attempt = 0; attempt < 500; ++attempt) {
    std::vector<Halfspace> hs;
    for (std::size_t i = 0; i < k; ++i) {
      double phi = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
      hs.emplace_back(Vec{std::cos(phi), std::sin(phi)}, rng.uniform(-1.0, 0.5));
    }
    try {
      if (general_position_check_2d(hs)) return {hs};
    } catch (const std::exception&) {
    }
  }
  throw std::runtime_error("could not sample a general-position pipeline");
}

CriterionResult criterion_conservative_defense() {
  Check c;
  Rng rng(20241507);
  const double tau = 0.2;
  for (int trial = 0; trial < 100 && c.ok; ++trial) {
    std::size_t k = trial % 5 == 4 ? 3 : 2;
    GeneralPositionInstance inst = random_general_position(rng, k);
    std::vector<Halfspace> deployed = conservative_shift(inst.hs, tau);

    std::vector<Vec> agents;
    agents.reserve(500);
    for (int i = 0; i < 500; ++i) agents.push_back(Vec{rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5)});

    DefenseOutcome seq = evaluate_defense(inst.hs, deployed, agents, tau, ResponseMode::sequential);
    DefenseOutcome conj = evaluate_defense(inst.hs, deployed, agents, tau, ResponseMode::conjunction);
    c.require(seq.false_positives == 0,
              "trial " + std::to_string(trial) + ": sequential FPR nonzero");
    c.require(conj.false_positives == 0,
              "trial " + std::to_string(trial) + ": conjunction FPR nonzero");
    c.require(seq.true_positives >= conj.true_positives,
              "trial " + std::to_string(trial) + ": sequential TPR below conjunction TPR");
  }

  // Optimality witnesses: shifting any single classifier by less than tau
  // admits some negative agent within budget.
  int witnesses = 0;
  for (int sample = 0; sample < 20; ++sample) {
    bool found = false;
    for (int attempt = 0; attempt < 300 && !found; ++attempt) {
      GeneralPositionInstance inst = random_general_position(rng, 2);
      std::size_t weak = static_cast<std::size_t>(rng.uniform_int(0, 1));
      double reduced = rng.uniform(0.0, 0.8) * tau;

      // A spot on the weakened classifier's boundary, deep inside the other
      // classifiers' true positive regions.
      const Halfspace& hw = inst.hs[weak];
      Vec p0 = vec_scale(hw.normal, hw.offset);
      Vec dir{-hw.normal[1], hw.normal[0]};
      Vec spot;
      double best_margin = -1.0;
      for (int i = -40; i <= 40; ++i) {
        Vec p = vec_add(p0, vec_scale(dir, 0.15 * i));
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < inst.hs.size(); ++j)
          if (j != weak) m = std::min(m, inst.hs[j].margin(p));
        if (m > best_margin) {
          best_margin = m;
          spot = p;
        }
      }
      if (best_margin < 3.0 * tau) continue;

      double eta = (tau - reduced) / 2.0;
      Vec x0 = vec_sub(spot, vec_scale(hw.normal, eta));  // truly negative: fails hw
      std::vector<Halfspace> deployed = conservative_shift(inst.hs, tau);
      deployed[weak] = Halfspace(hw.normal, hw.offset + reduced);
      Vec z = vec_add(x0, vec_scale(hw.normal, (reduced + eta) * (1.0 + 1e-9)));
      bool passes = true;
      for (const Halfspace& h : deployed)
        if (!h.passes(z)) passes = false;
      if (passes && norm2(vec_sub(z, x0)) <= tau) found = true;
    }
    if (found) ++witnesses;
  }
  c.require(witnesses == 20, "reduced-shift witness found for only " + std::to_string(witnesses) +
                                 "/20 samples");
  return {15, "conservative defense: zero FPR, sequential TPR >= conjunction TPR, shift optimality",
          c.ok, c.detail};
}

// Criterion 16 ---------------------------------------------------------------

CriterionResult criterion_region_maps() {
  Check c;
  RegionBounds bounds{-2.0, 2.0, -2.0, 2.0};

  // (a) zero budget: both regions equal the exact intersection region.
  {
    Halfspace h1({1.0, 0.3}, 0.4), h2({-0.2, 1.0}, 0.1);
    RegionMap map = region_map(h1, h2, 0.0, bounds, 0.25);
    for (std::size_t iy = 0; iy < map.ys.size() && c.ok; ++iy)
      for (std::size_t ix = 0; ix < map.xs.size() && c.ok; ++ix) {
        Vec p{map.xs[ix], map.ys[iy]};
        bool inside = h1.passes(p) && h2.passes(p);
        c.require(map.conj_at(ix, iy) == inside && map.seq_at(ix, iy) == inside,
                  "tau = 0 region does not equal the intersection region");
      }
  }

  // (b) zig-zag instance at tau = 1.24: (0,0) manipulates sequentially only.
  {
    RegionMap map = region_map(zigzag_h1(), zigzag_h2(), 1.24, bounds, 0.25);
    std::size_t ix = 8, iy = 8;  // grid point (0, 0)
    c.require(std::fabs(map.xs[ix]) < 1e-12 && std::fabs(map.ys[iy]) < 1e-12,
              "grid does not contain the origin");
    c.require(map.seq_at(ix, iy) && !map.conj_at(ix, iy),
              "origin is not in the sequential-only difference region");
  }

  // (c) theta >= pi/2: the difference region is empty; inclusion always holds.
  {
    Halfspace h1({1.0, 1.0}, 0.5), h2({-1.0, 1.0}, 0.3);  // theta = pi/2
    RegionMap map = region_map(h1, h2, 0.7, bounds, 0.2);
    for (std::size_t iy = 0; iy < map.ys.size() && c.ok; ++iy)
      for (std::size_t ix = 0; ix < map.xs.size() && c.ok; ++ix)
        c.require(map.seq_at(ix, iy) == map.conj_at(ix, iy),
                  "difference region nonempty at theta = pi/2");
  }
  {
    RegionMap map = region_map(zigzag_h1(), zigzag_h2(), 0.9, bounds, 0.2);
    for (std::size_t iy = 0; iy < map.ys.size() && c.ok; ++iy)
      for (std::size_t ix = 0; ix < map.xs.size() && c.ok; ++ix)
        c.require(!map.conj_at(ix, iy) || map.seq_at(ix, iy),
                  "conjunction region escapes the sequential region");
  }
  return {16, "region maps: inclusion everywhere, empty difference at pi/2, zig-zag origin", c.ok,
          c.detail};
}

}  // namespace

std::vector<CriterionResult> run_acceptance(std::ostream* log) {
  std::vector<CriterionResult> results;
  bool seq_le_conj = true;

  results.push_back(criterion_zigzag());
  results.push_back(criterion_cost_gap());
  results.push_back(criterion_closed_form_vs_numeric(seq_le_conj));
  results.push_back(criterion_no_zigzag(seq_le_conj));
  results.push_back(criterion_monotone(seq_le_conj));
  results.push_back(criterion_seq_le_conj(seq_le_conj));
  results.push_back(criterion_one_stage());
  results.push_back(criterion_precision_formula());
  results.push_back(criterion_nonconvexity());
  results.push_back(criterion_or_suboptimal());
  results.push_back(criterion_nonlocality());
  results.push_back(criterion_fptas_guarantee());
  results.push_back(criterion_group_blind());
  results.push_back(criterion_eodds());
  results.push_back(criterion_conservative_defense());
  results.push_back(criterion_region_maps());

  std::sort(results.begin(), results.end(),
            [](const CriterionResult& a, const CriterionResult& b) { return a.id < b.id; });
  if (log) {
    for (const CriterionResult& r : results) {
      *log << (r.passed ? "PASS" : "FAIL") << " criterion " << r.id << ": " << r.name;
      if (!r.passed) *log << " -- " << r.detail;
      *log << '\n';
    }
  }
  return results;
}

}  // namespace fairscreen
