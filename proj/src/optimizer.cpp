#include "fairscreen/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fairscreen {

namespace {

double eval_objective(ObjectiveKind kind, double alpha, double recall, double precision) {
  if (kind == ObjectiveKind::linear) return (1.0 - alpha) * recall + alpha * precision;
  if (recall <= 0.0 || precision <= 0.0)
    throw std::domain_error("objective_g: recall and precision must be positive");
  return (1.0 - alpha) / recall + alpha / precision;
}

bool improves(ObjectiveKind kind, double candidate, double incumbent) {
  return kind == ObjectiveKind::linear ? candidate > incumbent : candidate < incumbent;
}

double worst_value(ObjectiveKind kind) {
  return kind == ObjectiveKind::linear ? -std::numeric_limits<double>::infinity()
                                       : std::numeric_limits<double>::infinity();
}

OptimizerResult finalize(const Pipeline<double>& pipeline, const Population<double>& pop,
                         PromotionPolicy<double> policy, double alpha, ObjectiveKind kind,
                         Certificate cert, double eps) {
  OptimizerResult r{std::move(policy), 0.0, cert, eps, {}, 0.0, 0.0};
  r.rates = pipeline_rates(pipeline, r.policy);
  r.recall = recall_of(pop, r.rates);
  r.precision = interview_efficiency(pop, r.rates);
  r.value = eval_objective(kind, alpha, r.recall, r.precision);
  return r;
}

// True objective value of a candidate policy; infinity-flavored worst value
// when g is undefined for it (recall or precision zero).
double safe_value(const Pipeline<double>& pipeline, const Population<double>& pop,
                  const PromotionPolicy<double>& policy, double alpha, ObjectiveKind kind) {
  GroupRates<double> rates = pipeline_rates(pipeline, policy);
  double rec = recall_of(pop, rates);
  double prec = interview_efficiency(pop, rates);
  if (kind == ObjectiveKind::reciprocal && (rec <= 0.0 || prec <= 0.0)) return worst_value(kind);
  return eval_objective(kind, alpha, rec, prec);
}

}  // namespace

std::string certificate_name(Certificate c) {
  switch (c) {
    case Certificate::exact: return "exact";
    case Certificate::fptas: return "fptas";
    case Certificate::two_approx: return "two_approx";
    case Certificate::closed_form: return "closed_form";
  }
  return "unknown";
}

OptimizerResult two_approx(const Pipeline<double>& pipeline, const Population<double>& pop,
                           double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("two_approx: alpha must lie in [0,1]");
  auto bypass = PromotionPolicy<double>::bypass_all(pipeline.stage_count(), pipeline.group_count());
  auto ratio = opportunity_ratio_policy(pipeline);
  double v_bypass = safe_value(pipeline, pop, bypass, alpha, ObjectiveKind::linear);
  double v_ratio = safe_value(pipeline, pop, ratio, alpha, ObjectiveKind::linear);
  PromotionPolicy<double> winner = v_bypass >= v_ratio ? bypass : ratio;
  return finalize(pipeline, pop, std::move(winner), alpha, ObjectiveKind::linear,
                  Certificate::two_approx, 0.0);
}

std::optional<StageWitness> stage_feasible(const TestStats<double>& test, int fpr_exp, int tpr_exp,
                                           double eps_bar) {
  if (fpr_exp < 0 || tpr_exp < 0) throw std::invalid_argument("stage_feasible: exponents must be >= 0");
  const double thr0 = std::pow(1.0 - eps_bar, fpr_exp);  // n <= thr0
  const double thr1 = std::pow(1.0 - eps_bar, tpr_exp);  // m >= thr1
  const double t1 = test.pass_qualified, t0 = test.pass_unqualified;
  const double tol = 1e-12;

  auto m_of = [&](double x, double y) { return t1 * x + (1.0 - t1) * y; };
  auto n_of = [&](double x, double y) { return t0 * x + (1.0 - t0) * y; };

  std::vector<std::pair<double, double>> cands = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  // Boundary-line intersections with the square's edges.
  auto add_line_hits = [&](double a, double b, double c) {  // a x + b y = c
    if (std::fabs(b) > tol) {
      cands.push_back({0.0, c / b});
      cands.push_back({1.0, (c - a) / b});
    }
    if (std::fabs(a) > tol) {
      cands.push_back({c / a, 0.0});
      cands.push_back({(c - b) / a, 1.0});
    }
  };
  add_line_hits(t1, 1.0 - t1, thr1);
  add_line_hits(t0, 1.0 - t0, thr0);
  // Intersection of the two constraint boundaries (det = t1 - t0 > 0).
  {
    double det = t1 * (1.0 - t0) - t0 * (1.0 - t1);
    if (std::fabs(det) > tol) {
      double x = (thr1 * (1.0 - t0) - thr0 * (1.0 - t1)) / det;
      double y = (t1 * thr0 - t0 * thr1) / det;
      cands.push_back({x, y});
    }
  }

  std::optional<StageWitness> best;
  double best_n = std::numeric_limits<double>::infinity();
  for (auto [x, y] : cands) {
    if (x < -tol || x > 1.0 + tol || y < -tol || y > 1.0 + tol) continue;
    x = std::clamp(x, 0.0, 1.0);
    y = std::clamp(y, 0.0, 1.0);
    if (m_of(x, y) < thr1 - tol) continue;
    if (n_of(x, y) > thr0 + tol) continue;
    double n = n_of(x, y);
    if (n < best_n - 1e-15 || (!best && n < best_n + 1e-15)) {
      best_n = n;
      best = StageWitness{x, y};
    }
  }
  return best;
}

namespace {

// Smallest achievable unqualified promotion rate for one stage subject to
// promote_qualified >= thr. Qualified passers are always cheaper per unit of
// TPR than failers (Minimal Effectiveness), so fill promote_pass first.
double stage_min_fpr(const TestStats<double>& test, double thr) {
  double x = std::min(1.0, thr / test.pass_qualified);
  double y = 0.0;
  if (thr > test.pass_qualified) {
    y = (thr - test.pass_qualified) / (1.0 - test.pass_qualified);
    y = std::clamp(y, 0.0, 1.0);
  }
  return test.pass_unqualified * x + (1.0 - test.pass_unqualified) * y;
}

StageWitness stage_min_fpr_witness(const TestStats<double>& test, double thr) {
  double x = std::min(1.0, thr / test.pass_qualified);
  double y = 0.0;
  if (thr > test.pass_qualified)
    y = std::clamp((thr - test.pass_qualified) / (1.0 - test.pass_qualified), 0.0, 1.0);
  return {std::clamp(x, 0.0, 1.0), y};
}

int exponent_at_most(const std::vector<double>& pw, int ell, double value) {
  // Largest j in [0, ell] with pw[j] >= value (value in (0, 1]); ell if value
  // is 0 or below the last level.
  if (value <= pw[static_cast<std::size_t>(ell)]) return ell;
  double base = pw[1];
  int j = static_cast<int>(std::floor(std::log(value) / std::log(base)));
  j = std::clamp(j, 0, ell);
  while (j > 0 && pw[static_cast<std::size_t>(j)] < value) --j;
  while (j < ell && pw[static_cast<std::size_t>(j) + 1] >= value) ++j;
  return j;
}

}  // namespace

DpTable build_dp_table(const std::vector<TestStats<double>>& stages, double eps_bar, int ell_tpr,
                       int ell_fpr) {
  if (stages.empty()) throw std::invalid_argument("build_dp_table: empty pipeline");
  DpTable t;
  t.eps_bar = eps_bar;
  t.ell_tpr = ell_tpr;
  t.ell_fpr = ell_fpr;
  int top = std::max(ell_tpr, ell_fpr) + 1;
  t.pw.resize(static_cast<std::size_t>(top) + 1);
  for (int j = 0; j <= top; ++j) t.pw[static_cast<std::size_t>(j)] = std::pow(1.0 - eps_bar, j);
  t.l_tpr = t.pw[static_cast<std::size_t>(ell_tpr)];
  t.l_fpr = t.pw[static_cast<std::size_t>(ell_fpr)];

  const std::size_t k = stages.size();
  // Per stage, per tpr-demand: the best fpr exponent one stage can deliver.
  std::vector<std::vector<int>> stage_cap(k, std::vector<int>(static_cast<std::size_t>(ell_tpr) + 1));
  for (std::size_t i = 0; i < k; ++i)
    for (int d = 0; d <= ell_tpr; ++d) {
      double nmin = stage_min_fpr(stages[i], t.pw[static_cast<std::size_t>(d)]);
      stage_cap[i][static_cast<std::size_t>(d)] =
          nmin <= 0.0 ? ell_fpr : exponent_at_most(t.pw, ell_fpr, nmin);
    }

  t.capacity.assign(k, std::vector<int>(static_cast<std::size_t>(ell_tpr) + 1, 0));
  t.split.assign(k, std::vector<int>(static_cast<std::size_t>(ell_tpr) + 1, 0));
  for (int j = 0; j <= ell_tpr; ++j) {
    t.capacity[0][static_cast<std::size_t>(j)] = stage_cap[0][static_cast<std::size_t>(j)];
    t.split[0][static_cast<std::size_t>(j)] = j;
  }
  for (std::size_t i = 1; i < k; ++i) {
    for (int J = 0; J <= ell_tpr; ++J) {
      int best = -1, best_d = 0;
      for (int d = 0; d <= J; ++d) {
        int cap = stage_cap[i][static_cast<std::size_t>(d)] +
                  t.capacity[i - 1][static_cast<std::size_t>(J - d)];
        cap = std::min(cap, ell_fpr);
        if (cap > best) {
          best = cap;
          best_d = d;
        }
      }
      t.capacity[i][static_cast<std::size_t>(J)] = best;
      t.split[i][static_cast<std::size_t>(J)] = best_d;
    }
  }
  return t;
}

namespace {

struct FptasParams {
  double eps_bar = 0.0;
  int ell_tpr = 0, ell_fpr = 0;
};

FptasParams fptas_params(const Pipeline<double>& pipeline, const Population<double>& pop,
                         double eps, bool min_variant) {
  const double k = static_cast<double>(pipeline.stage_count());
  const double q = pop.positive_total();
  FptasParams p;
  p.eps_bar = eps / (2.0 * k);
  double l_tpr, l_fpr;
  if (!min_variant) {
    l_tpr = eps / (1.0 - eps) * std::pow(1.0 - p.eps_bar, k - 1.0);
    l_fpr = eps * eps * q / ((2.0 - eps) * (1.0 - eps) * (1.0 - q));
  } else {
    double tau_min = 1.0;
    for (std::size_t i = 0; i < pipeline.stage_count(); ++i)
      for (GroupId g = 0; g < pipeline.group_count(); ++g)
        tau_min = std::min(tau_min, pipeline.test(i, g).pass_qualified);
    double tau_min_k = std::pow(tau_min, k);
    l_tpr = tau_min_k * std::pow(1.0 - p.eps_bar, k - 1.0);
    l_fpr = eps * q * tau_min_k / ((2.0 - eps) * (1.0 - q));
  }
  l_tpr = std::min(l_tpr, 1.0);
  l_fpr = std::min(l_fpr, 1.0);
  double logb = std::log(1.0 - p.eps_bar);
  p.ell_tpr = std::max(0, static_cast<int>(std::ceil(std::log(l_tpr) / logb)));
  p.ell_fpr = std::max(0, static_cast<int>(std::ceil(std::log(l_fpr) / logb)));
  if (p.ell_tpr > 200000 || p.ell_fpr > 200000)
    throw std::runtime_error("fptas: discretization budget exceeded; use a larger eps");
  return p;
}

// Rebuilds the witness policy for one group at the common tpr level.
std::vector<PolicyEntry<double>> reconstruct_group(const std::vector<TestStats<double>>& stages,
                                                   const DpTable& table, int level) {
  const std::size_t k = stages.size();
  std::vector<PolicyEntry<double>> entries(k);
  int remaining = level;
  for (std::size_t i = k; i-- > 0;) {
    int d = i == 0 ? remaining : table.split[i][static_cast<std::size_t>(remaining)];
    StageWitness w = stage_min_fpr_witness(stages[i], table.pw[static_cast<std::size_t>(d)]);
    entries[i] = PolicyEntry<double>{w.promote_pass, w.promote_fail};
    remaining -= d;
  }
  return entries;
}

OptimizerResult fptas_engine(const Pipeline<double>& pipeline, const Population<double>& pop,
                             double alpha, double eps, bool min_variant) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("fptas: eps must lie in (0, 1)");
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("fptas: alpha must lie in [0,1]");
  if (!pipeline.strictly_effective())
    throw std::invalid_argument("fptas: pipeline must satisfy Minimal Effectiveness");
  if (pop.group_count() != pipeline.group_count())
    throw std::invalid_argument("fptas: population and pipeline group counts differ");
  const ObjectiveKind kind = min_variant ? ObjectiveKind::reciprocal : ObjectiveKind::linear;
  const std::size_t k = pipeline.stage_count();
  const std::size_t groups = pipeline.group_count();

  auto bypass = PromotionPolicy<double>::bypass_all(k, groups);
  if (pop.negative_total() <= 0.0)  // precision is 1 for every policy; recall decides
    return finalize(pipeline, pop, bypass, alpha, kind, Certificate::fptas, eps);

  FptasParams params = fptas_params(pipeline, pop, eps, min_variant);
  std::vector<std::vector<TestStats<double>>> per_group(groups);
  for (GroupId g = 0; g < groups; ++g) {
    per_group[g].reserve(k);
    for (std::size_t i = 0; i < k; ++i) per_group[g].push_back(pipeline.test(i, g));
  }
  std::vector<DpTable> tables;
  tables.reserve(groups);
  for (GroupId g = 0; g < groups; ++g)
    tables.push_back(build_dp_table(per_group[g], params.eps_bar, params.ell_tpr, params.ell_fpr));

  const double q = pop.positive_total();
  // Pick the common tpr grid level by the table estimates (recall lower
  // bound, per-group minimal fpr upper bound).
  int best_level = -1;
  double best_est = worst_value(kind);
  for (int level = 0; level <= params.ell_tpr; ++level) {
    double rec_est = tables[0].pw[static_cast<std::size_t>(level)];
    double neg = 0.0;
    for (GroupId g = 0; g < groups; ++g) {
      int cap = tables[g].capacity[k - 1][static_cast<std::size_t>(level)];
      neg += pop.negative(g) * tables[g].pw[static_cast<std::size_t>(cap)];
    }
    double prec_est = q * rec_est / (q * rec_est + neg);
    double est = eval_objective(kind, alpha, rec_est, prec_est);
    if (best_level < 0 || improves(kind, est, best_est)) {
      best_est = est;
      best_level = level;
    }
  }

  // Realize the witness and equalize the groups exactly by scaling stage 0.
  std::vector<std::vector<PolicyEntry<double>>> stages(
      k, std::vector<PolicyEntry<double>>(groups));
  for (GroupId g = 0; g < groups; ++g) {
    auto entries = reconstruct_group(per_group[g], tables[g], best_level);
    for (std::size_t i = 0; i < k; ++i) stages[i][g] = entries[i];
  }
  PromotionPolicy<double> dp_policy{stages};
  GroupRates<double> rates = pipeline_rates(pipeline, dp_policy);
  double target = *std::min_element(rates.tpr.begin(), rates.tpr.end());
  for (GroupId g = 0; g < groups; ++g) {
    double factor = rates.tpr[g] > 0.0 ? target / rates.tpr[g] : 1.0;
    auto& e = dp_policy.stages()[0][g];
    e.promote_pass = std::clamp(e.promote_pass * factor, 0.0, 1.0);
    e.promote_fail = std::clamp(e.promote_fail * factor, 0.0, 1.0);
  }

  // Endpoint fallbacks (recall-optimal bypass, precision-optimal Opportunity
  // Ratio); ties and out-of-range alpha are settled by direct comparison.
  auto ratio_policy = opportunity_ratio_policy(pipeline);
  PromotionPolicy<double> best_policy = bypass;
  double best_val = safe_value(pipeline, pop, bypass, alpha, kind);
  for (const auto& cand : {ratio_policy, dp_policy}) {
    double v = safe_value(pipeline, pop, cand, alpha, kind);
    if (improves(kind, v, best_val)) {
      best_val = v;
      best_policy = cand;
    }
  }
  return finalize(pipeline, pop, std::move(best_policy), alpha, kind, Certificate::fptas, eps);
}

}  // namespace

OptimizerResult fptas_max(const Pipeline<double>& pipeline, const Population<double>& pop,
                          double alpha, double eps) {
  return fptas_engine(pipeline, pop, alpha, eps, false);
}

OptimizerResult fptas_min(const Pipeline<double>& pipeline, const Population<double>& pop,
                          double alpha, double eps) {
  return fptas_engine(pipeline, pop, alpha, eps, true);
}

namespace {

// One group's choice inside the exact enumeration: the partially used level,
// the fully-use/bypass assignment of the other levels, and the partial mode
// ((1-pi1) * pi0 = 0 leaves pi1 free with pi0 = 0, or pi1 = 1 with pi0 free).
struct GroupConfig {
  std::size_t partial_level = 0;
  unsigned bypass_mask = 0;  // bit per non-partial level, in stage order
  int mode = 0;              // 0: promote_pass free; 1: promote_fail free
  double c_prod = 1.0, d_prod = 1.0;
  double m_lo = 0.0, m_hi = 0.0;   // achievable common-recall interval
  double fpr_a = 0.0, fpr_b = 0.0; // fpr(M) = a + b * M on [m_lo, m_hi]
};

std::vector<GroupConfig> group_configs(const std::vector<TestStats<double>>& stats) {
  const std::size_t k = stats.size();
  std::vector<GroupConfig> out;
  for (std::size_t level = 0; level < k; ++level) {
    const double t1 = stats[level].pass_qualified;
    const double t0 = stats[level].pass_unqualified;
    const unsigned mask_count = 1u << (k - 1);
    for (unsigned mask = 0; mask < mask_count; ++mask) {
      double c = 1.0, d = 1.0;
      unsigned bit = 0;
      for (std::size_t i = 0; i < k; ++i) {
        if (i == level) continue;
        if (mask & (1u << bit)) {
          // bypass: promotes everyone
        } else {
          c *= stats[i].pass_qualified;
          d *= stats[i].pass_unqualified;
        }
        ++bit;
      }
      for (int mode = 0; mode < 2; ++mode) {
        if (mode == 1 && t1 >= 1.0) continue;  // covered exactly by mode 0
        GroupConfig cfg;
        cfg.partial_level = level;
        cfg.bypass_mask = mask;
        cfg.mode = mode;
        cfg.c_prod = c;
        cfg.d_prod = d;
        if (mode == 0) {
          cfg.m_lo = 0.0;
          cfg.m_hi = c * t1;
          cfg.fpr_a = 0.0;
          cfg.fpr_b = d * t0 / (t1 * c);
        } else {
          cfg.m_lo = c * t1;
          cfg.m_hi = c;
          cfg.fpr_a = d * (t0 - t1) / (1.0 - t1);
          cfg.fpr_b = d * (1.0 - t0) / ((1.0 - t1) * c);
        }
        out.push_back(cfg);
      }
    }
  }
  return out;
}

struct ExactEval {
  double value;
  double recall;
};

}  // namespace

OptimizerResult exact_optimal(const Pipeline<double>& pipeline, const Population<double>& pop,
                              double alpha, ObjectiveKind objective) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("exact_optimal: alpha must lie in [0,1]");
  if (!pipeline.strictly_effective())
    throw std::invalid_argument("exact_optimal: pipeline must satisfy Minimal Effectiveness");
  if (pop.group_count() != pipeline.group_count())
    throw std::invalid_argument("exact_optimal: population and pipeline group counts differ");
  const std::size_t k = pipeline.stage_count();
  const std::size_t groups = pipeline.group_count();
  if (k > 24) throw std::runtime_error("exact_optimal: configuration budget exceeded");

  std::vector<std::vector<TestStats<double>>> per_group(groups);
  for (GroupId g = 0; g < groups; ++g)
    for (std::size_t i = 0; i < k; ++i) per_group[g].push_back(pipeline.test(i, g));

  std::vector<std::vector<GroupConfig>> cfgs(groups);
  double total = 1.0;
  for (GroupId g = 0; g < groups; ++g) {
    cfgs[g] = group_configs(per_group[g]);
    total *= static_cast<double>(cfgs[g].size());
  }
  if (total > 1e7) throw std::runtime_error("exact_optimal: configuration budget exceeded");

  const double q = pop.positive_total();
  const bool maximize = objective == ObjectiveKind::linear;

  auto evaluate_at = [&](const std::vector<const GroupConfig*>& combo,
                         double m) -> std::optional<ExactEval> {
    double neg = 0.0;
    for (GroupId g = 0; g < groups; ++g)
      neg += pop.negative(g) * std::max(0.0, combo[g]->fpr_a + combo[g]->fpr_b * m);
    double num = q * m;
    double precision = (num + neg) > 0.0 ? num / (num + neg) : 0.0;
    if (!maximize && (m <= 0.0 || precision <= 0.0)) return std::nullopt;
    return ExactEval{eval_objective(objective, alpha, m, precision), m};
  };

  double best_value = worst_value(objective);
  double best_recall = -1.0;
  std::vector<std::size_t> best_combo;
  double best_m = 0.0;
  bool have_best = false;

  std::vector<std::size_t> index(groups, 0);
  std::vector<const GroupConfig*> combo(groups);
  for (;;) {
    for (GroupId g = 0; g < groups; ++g) combo[g] = &cfgs[g][index[g]];
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (GroupId g = 0; g < groups; ++g) {
      lo = std::max(lo, combo[g]->m_lo);
      hi = std::min(hi, combo[g]->m_hi);
    }
    if (hi >= lo - 1e-15) {
      hi = std::max(hi, lo);
      // The restricted objective is monotone or convex in the common recall,
      // so the endpoints are exact optimizers; golden-section candidates in
      // the interior are kept per the stated search scheme.
      std::vector<double> candidates{lo, hi};
      if (hi - lo > 1e-10) {
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = lo, b = hi;
        double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
        auto score = [&](double m) {
          auto ev = evaluate_at(combo, m);
          if (!ev) return worst_value(objective);
          return ev->value;
        };
        double f1 = score(x1), f2 = score(x2);
        for (int it = 0; it < 200 && b - a > 1e-10; ++it) {
          bool keep_left = maximize ? f1 > f2 : f1 < f2;
          if (keep_left) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = score(x1);
          } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = score(x2);
          }
        }
        candidates.push_back(0.5 * (a + b));
      }
      for (double m : candidates) {
        auto ev = evaluate_at(combo, m);
        if (!ev) continue;
        bool better = !have_best || improves(objective, ev->value, best_value) ||
                      (ev->value == best_value && ev->recall > best_recall);
        if (better) {
          have_best = true;
          best_value = ev->value;
          best_recall = ev->recall;
          best_m = m;
          best_combo.assign(index.begin(), index.end());
        }
      }
    }
    // odometer over configurations, group 0 outermost
    bool advanced = false;
    for (std::size_t g = groups; g-- > 0;) {
      if (++index[g] < cfgs[g].size()) {
        advanced = true;
        break;
      }
      index[g] = 0;
    }
    if (!advanced) break;
  }
  if (!have_best) {
    // Only possible for the reciprocal objective when every configuration
    // collapses to zero recall; bypass-all is always valid.
    auto bypass = PromotionPolicy<double>::bypass_all(k, groups);
    return finalize(pipeline, pop, bypass, alpha, objective, Certificate::exact, 0.0);
  }

  std::vector<std::vector<PolicyEntry<double>>> stages(k, std::vector<PolicyEntry<double>>(groups));
  for (GroupId g = 0; g < groups; ++g) {
    const GroupConfig& cfg = cfgs[g][best_combo[g]];
    unsigned bit = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (i == cfg.partial_level) continue;
      stages[i][g] = (cfg.bypass_mask & (1u << bit)) ? PolicyEntry<double>{1.0, 1.0}
                                                     : PolicyEntry<double>{1.0, 0.0};
      ++bit;
    }
    const TestStats<double>& t = per_group[g][cfg.partial_level];
    if (cfg.mode == 0) {
      double s = std::clamp(best_m / (cfg.c_prod * t.pass_qualified), 0.0, 1.0);
      stages[cfg.partial_level][g] = PolicyEntry<double>{s, 0.0};
    } else {
      double s = std::clamp((best_m / cfg.c_prod - t.pass_qualified) / (1.0 - t.pass_qualified),
                            0.0, 1.0);
      stages[cfg.partial_level][g] = PolicyEntry<double>{1.0, s};
    }
  }
  return finalize(pipeline, pop, PromotionPolicy<double>{stages}, alpha, objective,
                  Certificate::exact, 0.0);
}

// --- group-blind DP --------------------------------------------------------

namespace {

struct BlindCorner {
  std::vector<int> tpr_delta;   // per group
  std::vector<int> fpr_delta;   // per group (capacity for the last group)
  double x = 0.0, y = 0.0;      // shared stage policy witness
};

struct BlindProv {
  int prev = -1;  // state index at the previous stage, -1 for stage 0
  double x = 0.0, y = 0.0;
};

// Feasible vertices of { m_g(x,y) >= mthr_g, n_g(x,y) <= nthr_g (g < limited) }
// inside the unit square; nthr entries < 0 mean "no constraint".
std::vector<std::pair<double, double>> blind_vertices(const std::vector<TestStats<double>>& tests,
                                                      const std::vector<double>& mthr,
                                                      const std::vector<double>& nthr) {
  const double tol = 1e-12;
  struct Line {
    double a, b, c;  // a x + b y = c
  };
  std::vector<Line> lines;
  for (std::size_t g = 0; g < tests.size(); ++g) {
    lines.push_back({tests[g].pass_qualified, 1.0 - tests[g].pass_qualified, mthr[g]});
    if (nthr[g] >= 0.0)
      lines.push_back({tests[g].pass_unqualified, 1.0 - tests[g].pass_unqualified, nthr[g]});
  }
  lines.push_back({1, 0, 0});
  lines.push_back({1, 0, 1});
  lines.push_back({0, 1, 0});
  lines.push_back({0, 1, 1});

  std::vector<std::pair<double, double>> pts = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      double det = lines[i].a * lines[j].b - lines[j].a * lines[i].b;
      if (std::fabs(det) < tol) continue;
      double x = (lines[i].c * lines[j].b - lines[j].c * lines[i].b) / det;
      double y = (lines[i].a * lines[j].c - lines[j].a * lines[i].c) / det;
      pts.push_back({x, y});
    }

  std::vector<std::pair<double, double>> feasible;
  for (auto [x, y] : pts) {
    if (x < -tol || x > 1 + tol || y < -tol || y > 1 + tol) continue;
    x = std::clamp(x, 0.0, 1.0);
    y = std::clamp(y, 0.0, 1.0);
    bool ok = true;
    for (std::size_t g = 0; g < tests.size() && ok; ++g) {
      double m = tests[g].pass_qualified * x + (1.0 - tests[g].pass_qualified) * y;
      double n = tests[g].pass_unqualified * x + (1.0 - tests[g].pass_unqualified) * y;
      if (m < mthr[g] - tol) ok = false;
      if (nthr[g] >= 0.0 && n > nthr[g] + tol) ok = false;
    }
    if (ok) feasible.push_back({x, y});
  }
  return feasible;
}

}  // namespace

OptimizerResult group_blind_dp(const Pipeline<double>& pipeline, const Population<double>& pop,
                               double alpha, double eps, ObjectiveKind objective) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("group_blind_dp: eps must lie in (0, 1)");
  if (!pipeline.strictly_effective())
    throw std::invalid_argument("group_blind_dp: pipeline must satisfy Minimal Effectiveness");
  const std::size_t groups = pipeline.group_count();
  const std::size_t k = pipeline.stage_count();
  const bool min_variant = objective == ObjectiveKind::reciprocal;
  if (groups == 1) return fptas_engine(pipeline, pop, alpha, eps, min_variant);

  auto bypass = PromotionPolicy<double>::bypass_all(k, groups);
  if (pop.negative_total() <= 0.0)
    return finalize(pipeline, pop, bypass, alpha, objective, Certificate::fptas, eps);

  FptasParams params = fptas_params(pipeline, pop, eps, min_variant);
  const std::size_t nt = static_cast<std::size_t>(params.ell_tpr) + 1;
  const std::size_t nf = static_cast<std::size_t>(params.ell_fpr) + 1;
  double state_count = std::pow(static_cast<double>(nt), static_cast<double>(groups)) *
                       std::pow(static_cast<double>(nf), static_cast<double>(groups));
  double delta_count = std::pow(static_cast<double>(nt), static_cast<double>(groups)) *
                       std::pow(static_cast<double>(nf), static_cast<double>(groups - 1));
  if (state_count > 2e6 || delta_count > 2e5)
    throw std::runtime_error("group_blind_dp: table budget exceeded; use a larger eps");

  std::vector<double> pw(static_cast<std::size_t>(std::max(params.ell_tpr, params.ell_fpr)) + 1);
  for (std::size_t j = 0; j < pw.size(); ++j) pw[j] = std::pow(1.0 - params.eps_bar, static_cast<double>(j));

  // State index: tpr exponents then fpr exponents, group-major.
  const std::size_t total_states = static_cast<std::size_t>(state_count);
  std::vector<std::size_t> t_stride(groups), f_stride(groups);
  {
    std::size_t s = 1;
    for (std::size_t g = groups; g-- > 0;) {
      f_stride[g] = s;
      s *= nf;
    }
    for (std::size_t g = groups; g-- > 0;) {
      t_stride[g] = s;
      s *= nt;
    }
  }

  // Stage corner sets.
  std::vector<std::vector<BlindCorner>> corners(k);
  std::vector<TestStats<double>> tests(groups);
  for (std::size_t i = 0; i < k; ++i) {
    for (GroupId g = 0; g < groups; ++g) tests[g] = pipeline.test(i, g);
    std::vector<int> dt(groups, 0);
    for (;;) {
      std::vector<double> mthr(groups);
      for (GroupId g = 0; g < groups; ++g) mthr[g] = pw[static_cast<std::size_t>(dt[g])];
      std::vector<int> df(groups - 1, 0);
      for (;;) {
        std::vector<double> nthr(groups, -1.0);
        for (std::size_t g = 0; g + 1 < groups; ++g) nthr[g] = pw[static_cast<std::size_t>(df[g])];
        auto verts = blind_vertices(tests, mthr, nthr);
        if (!verts.empty()) {
          double best_n = std::numeric_limits<double>::infinity();
          std::pair<double, double> best_pt = verts[0];
          const TestStats<double>& last = tests[groups - 1];
          for (auto& pt : verts) {
            double n = last.pass_unqualified * pt.first + (1.0 - last.pass_unqualified) * pt.second;
            if (n < best_n) {
              best_n = n;
              best_pt = pt;
            }
          }
          BlindCorner c;
          c.tpr_delta = dt;
          c.fpr_delta.assign(groups, 0);
          for (std::size_t g = 0; g + 1 < groups; ++g) c.fpr_delta[g] = df[g];
          c.fpr_delta[groups - 1] =
              best_n <= 0.0 ? params.ell_fpr : exponent_at_most(pw, params.ell_fpr, best_n);
          c.x = best_pt.first;
          c.y = best_pt.second;
          corners[i].push_back(std::move(c));
        }
        bool advanced = false;
        for (std::size_t g = groups - 1; g-- > 0;) {
          if (++df[g] <= params.ell_fpr) {
            advanced = true;
            break;
          }
          df[g] = 0;
        }
        if (!advanced) break;
      }
      bool advanced = false;
      for (std::size_t g = groups; g-- > 0;) {
        if (++dt[g] <= params.ell_tpr) {
          advanced = true;
          break;
        }
        dt[g] = 0;
      }
      if (!advanced) break;
    }
  }

  // DP over stages with provenance for witness reconstruction.
  std::vector<std::vector<int>> mark(k, std::vector<int>(total_states, -1));
  std::vector<std::vector<BlindProv>> prov(k);
  std::vector<std::vector<std::size_t>> marked(k);

  auto state_index = [&](const std::vector<int>& t, const std::vector<int>& f) {
    std::size_t idx = 0;
    for (std::size_t g = 0; g < groups; ++g)
      idx += static_cast<std::size_t>(t[g]) * t_stride[g] + static_cast<std::size_t>(f[g]) * f_stride[g];
    return idx;
  };
  auto decode_state = [&](std::size_t idx, std::vector<int>& t, std::vector<int>& f) {
    for (std::size_t g = 0; g < groups; ++g) {
      t[g] = static_cast<int>(idx / t_stride[g]);
      idx %= t_stride[g];
    }
    for (std::size_t g = 0; g < groups; ++g) {
      f[g] = static_cast<int>(idx / f_stride[g]);
      idx %= f_stride[g];
    }
  };

  for (const BlindCorner& c : corners[0]) {
    std::size_t idx = state_index(c.tpr_delta, c.fpr_delta);
    if (mark[0][idx] < 0) {
      mark[0][idx] = static_cast<int>(prov[0].size());
      prov[0].push_back({-1, c.x, c.y});
      marked[0].push_back(idx);
    }
  }
  std::vector<int> st(groups), sf(groups), ntv(groups), nfv(groups);
  for (std::size_t i = 1; i < k; ++i) {
    for (std::size_t sidx : marked[i - 1]) {
      decode_state(sidx, st, sf);
      for (const BlindCorner& c : corners[i]) {
        bool ok = true;
        for (std::size_t g = 0; g < groups; ++g) {
          int t2 = st[g] + c.tpr_delta[g];
          if (t2 > params.ell_tpr) {
            ok = false;
            break;
          }
          ntv[g] = t2;
          nfv[g] = std::min(sf[g] + c.fpr_delta[g], params.ell_fpr);
        }
        if (!ok) continue;
        std::size_t idx = state_index(ntv, nfv);
        if (mark[i][idx] < 0) {
          mark[i][idx] = static_cast<int>(prov[i].size());
          prov[i].push_back({static_cast<int>(sidx), c.x, c.y});
          marked[i].push_back(idx);
        }
      }
    }
  }

  // Candidate evaluation: reconstruct each final witness, repair it to exact
  // Equal Opportunity, filter, and keep the best actual value.
  PromotionPolicy<double> best_policy = bypass;
  double best_val = safe_value(pipeline, pop, bypass, alpha, objective);

  auto consider = [&](const PromotionPolicy<double>& cand) {
    if (!is_equal_opportunity(pipeline, cand, 1e-9)) return;
    double v = safe_value(pipeline, pop, cand, alpha, objective);
    if (improves(objective, v, best_val)) {
      best_val = v;
      best_policy = cand;
    }
  };

  auto repair_two_groups = [&](const PromotionPolicy<double>& cand) {
    // Move one stage's shared (x, y) onto the line equalizing the two recall
    // products; every stage is tried and the best exact repair kept.
    for (std::size_t i = 0; i < k; ++i) {
      double pa = 1.0, pb = 1.0;
      for (std::size_t j = 0; j < k; ++j) {
        if (j == i) continue;
        pa *= stage_rates(pipeline, cand, j, 0).promote_qualified;
        pb *= stage_rates(pipeline, cand, j, 1).promote_qualified;
      }
      const TestStats<double>& ta = pipeline.test(i, 0);
      const TestStats<double>& tb = pipeline.test(i, 1);
      double cx = pa * ta.pass_qualified - pb * tb.pass_qualified;
      double cy = pa * (1.0 - ta.pass_qualified) - pb * (1.0 - tb.pass_qualified);
      double nrm = std::hypot(cx, cy);
      if (nrm < 1e-15) continue;
      // Segment of {cx*x + cy*y = 0} inside the unit square, through (0,0).
      double dx = -cy / nrm, dy = cx / nrm;
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      auto bound = [&](double dir) {
        if (dir > 1e-15) {
          lo = std::max(lo, 0.0);
          hi = std::min(hi, 1.0 / dir);
        } else if (dir < -1e-15) {
          lo = std::max(lo, 1.0 / dir);
          hi = std::min(hi, 0.0);
        }
      };
      bound(dx);
      bound(dy);
      if (!(lo <= hi)) continue;
      const auto& cur = cand.entry(i, 0);
      double t_proj = std::clamp(cur.promote_pass * dx + cur.promote_fail * dy, lo, hi);
      for (double t : {lo, hi, t_proj}) {
        double x = std::clamp(t * dx, 0.0, 1.0);
        double y = std::clamp(t * dy, 0.0, 1.0);
        PromotionPolicy<double> repaired = cand;
        for (GroupId g = 0; g < groups; ++g)
          repaired.stages()[i][g] = PolicyEntry<double>{x, y};
        consider(repaired);
      }
    }
  };

  for (std::size_t sidx : marked[k - 1]) {
    std::vector<PolicyEntry<double>> shared(k);
    std::size_t cur = sidx;
    for (std::size_t i = k; i-- > 0;) {
      const BlindProv& p = prov[i][static_cast<std::size_t>(mark[i][cur])];
      shared[i] = PolicyEntry<double>{p.x, p.y};
      if (i > 0) cur = static_cast<std::size_t>(p.prev);
    }
    std::vector<std::vector<PolicyEntry<double>>> stages(k, std::vector<PolicyEntry<double>>(groups));
    for (std::size_t i = 0; i < k; ++i)
      for (GroupId g = 0; g < groups; ++g) stages[i][g] = shared[i];
    PromotionPolicy<double> cand{stages};
    consider(cand);
    if (groups == 2) repair_two_groups(cand);
  }

  return finalize(pipeline, pop, std::move(best_policy), alpha, objective, Certificate::fptas, eps);
}

}  // namespace fairscreen
