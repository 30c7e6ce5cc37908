#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairscreen/defense.hpp"
#include "fairscreen/optimizer.hpp"
#include "fairscreen/pipeline.hpp"
#include "fairscreen/policy.hpp"
#include "fairscreen/scenario.hpp"
#include "fairscreen/strategic.hpp"
#include "fairscreen/verify.hpp"

namespace {

using fairscreen::GroupRates;
using fairscreen::Halfspace;
using fairscreen::ManipulationPath;
using fairscreen::ObjectiveKind;
using fairscreen::OptimizerResult;
using fairscreen::ResponseMode;
using fairscreen::ScenarioSpec;
using nlohmann::json;

json policy_json(const fairscreen::PromotionPolicy<double>& policy,
                 const std::vector<std::string>& names) {
  json stages = json::array();
  for (std::size_t i = 0; i < policy.stage_count(); ++i) {
    json stage;
    for (std::size_t g = 0; g < policy.group_count(); ++g) {
      const auto& e = policy.entry(i, g);
      stage[names[g]] = {{"promote_pass", e.promote_pass}, {"promote_fail", e.promote_fail}};
    }
    stages.push_back(std::move(stage));
  }
  return stages;
}

json rates_json(const std::vector<double>& values, const std::vector<std::string>& names) {
  json out;
  for (std::size_t g = 0; g < values.size(); ++g) out[names[g]] = values[g];
  return out;
}

json result_json(const OptimizerResult& res, const ScenarioSpec& spec) {
  json out;
  out["policy"] = policy_json(res.policy, spec.group_names);
  out["value"] = res.value;
  out["certificate"] = fairscreen::certificate_name(res.certificate);
  if (res.certificate == fairscreen::Certificate::fptas) out["eps"] = res.eps;
  out["per_group_tpr"] = rates_json(res.rates.tpr, spec.group_names);
  out["per_group_fpr"] = rates_json(res.rates.fpr, spec.group_names);
  out["recall"] = res.recall;
  out["precision"] = res.precision;
  return out;
}

json path_json(const ManipulationPath& path) {
  json pts = json::array();
  for (const auto& p : path.points) pts.push_back(p);
  return {{"path", std::move(pts)}, {"cost", path.cost}, {"converged", path.converged}};
}

const fairscreen::StrategicSection& strategic_of(const ScenarioSpec& spec) {
  if (!spec.strategic)
    throw fairscreen::ScenarioError("scenario has no strategic section");
  return *spec.strategic;
}

int run(int argc, char** argv) {
  CLI::App app{"Screening-pipeline fairness and strategic-manipulation toolkit"};
  app.require_subcommand(1);

  std::string scenario_path, method = "exact", objective_flag, out_path, agent_mode = "seq";
  double eps = 0.05, alpha = -1.0, tau = -1.0, resolution = 0.1;
  double x_min = -2.0, x_max = 2.0, y_min = -2.0, y_max = 2.0;
  std::size_t agent_index = 0;
  std::string defend_mode;
  std::int64_t seed_override = -1;
  app.add_option("--seed", seed_override, "Override the scenario seed")->capture_default_str();

  auto* optimize = app.add_subcommand("optimize", "Optimize a promotion policy for a scenario");
  optimize->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  optimize->add_option("--method", method, "exact|fptas|two-approx|or|blind")
      ->check(CLI::IsMember({"exact", "fptas", "two-approx", "or", "blind"}));
  optimize->add_option("--eps", eps, "Accuracy parameter for fptas/blind");
  optimize->add_option("--alpha", alpha, "Objective weight override");
  optimize->add_option("--objective", objective_flag, "f|g")->check(CLI::IsMember({"f", "g"}));

  auto* agent = app.add_subcommand("agent", "Compute an agent's best response");
  agent->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  agent->add_option("--mode", agent_mode, "seq|conj|greedy|closed2d")
      ->check(CLI::IsMember({"seq", "conj", "greedy", "closed2d"}));
  agent->add_option("--index", agent_index, "Agent index within the scenario");

  auto* defend = app.add_subcommand("defend", "Evaluate the conservative defense");
  defend->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  defend->add_option("--tau", tau, "Manipulation budget override");
  defend->add_option("--mode", defend_mode, "seq|conj")->check(CLI::IsMember({"seq", "conj"}));

  auto* regions = app.add_subcommand("regions", "Export a manipulation-region map as CSV");
  regions->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  regions->add_option("--tau", tau, "Manipulation budget override");
  regions->add_option("--res", resolution, "Grid spacing");
  regions->add_option("--out", out_path, "Output CSV file")->required();
  regions->add_option("--xmin", x_min);
  regions->add_option("--xmax", x_max);
  regions->add_option("--ymin", y_min);
  regions->add_option("--ymax", y_max);

  auto* verify = app.add_subcommand("verify", "Run the bundled acceptance checks");

  CLI11_PARSE(app, argc, argv);

  if (verify->parsed()) {
    auto results = fairscreen::run_acceptance(&std::cout);
    std::size_t passed = 0;
    for (const auto& r : results) passed += r.passed ? 1 : 0;
    std::cout << passed << "/" << results.size() << " criteria passed\n";
    return passed == results.size() ? 0 : 1;
  }

  ScenarioSpec spec = fairscreen::load_scenario(scenario_path);
  if (seed_override >= 0) spec.seed = static_cast<std::uint64_t>(seed_override);

  if (optimize->parsed()) {
    double a = alpha >= 0.0 ? alpha : spec.alpha;
    ObjectiveKind kind = spec.objective;
    if (!objective_flag.empty())
      kind = objective_flag == "f" ? ObjectiveKind::linear : ObjectiveKind::reciprocal;
    auto pipeline = spec.pipeline();
    auto population = spec.population();

    OptimizerResult res = [&] {
      if (method == "exact") return fairscreen::exact_optimal(pipeline, population, a, kind);
      if (method == "fptas")
        return kind == ObjectiveKind::linear ? fairscreen::fptas_max(pipeline, population, a, eps)
                                             : fairscreen::fptas_min(pipeline, population, a, eps);
      if (method == "two-approx") return fairscreen::two_approx(pipeline, population, a);
      if (method == "blind") return fairscreen::group_blind_dp(pipeline, population, a, eps, kind);
      // method == "or": evaluate the closed-form Opportunity Ratio policy
      auto policy = fairscreen::opportunity_ratio_policy(pipeline);
      GroupRates<double> rates = fairscreen::pipeline_rates(pipeline, policy);
      double recall = fairscreen::recall_of(population, rates);
      double precision = fairscreen::interview_efficiency(population, rates);
      OptimizerResult r{policy,
                        kind == ObjectiveKind::linear
                            ? fairscreen::objective_f(a, recall, precision)
                            : fairscreen::objective_g(a, recall, precision),
                        fairscreen::Certificate::closed_form,
                        0.0,
                        rates,
                        recall,
                        precision};
      return r;
    }();
    std::cout << result_json(res, spec).dump(2) << '\n';
    return 0;
  }

  if (agent->parsed()) {
    const auto& strat = strategic_of(spec);
    if (agent_index >= strat.agents.size())
      throw fairscreen::ScenarioError("agent index out of range");
    const auto& x0 = strat.agents[agent_index];
    json out;
    if (agent_mode == "conj") {
      auto res = fairscreen::conjunction_best_response(x0, strat.halfspaces);
      out = {{"path", json::array({x0, res.point})}, {"cost", res.cost}, {"converged", true}};
    } else if (agent_mode == "greedy") {
      out = path_json(fairscreen::greedy_response(x0, strat.halfspaces));
    } else if (agent_mode == "closed2d") {
      if (strat.halfspaces.size() != 2)
        throw fairscreen::ScenarioError("closed2d requires exactly two classifiers");
      auto path = fairscreen::sequential_closed_form_2d(x0, strat.halfspaces[0], strat.halfspaces[1]);
      out = path_json(path);
      out["case"] = "R" + std::to_string(path.closed_form_case);
    } else {
      out = path_json(fairscreen::sequential_best_response(x0, strat.halfspaces,
                                                           fairscreen::CostSpec::l2(), spec.seed));
    }
    out["mode"] = agent_mode;
    std::cout << out.dump(2) << '\n';
    return 0;
  }

  if (defend->parsed()) {
    const auto& strat = strategic_of(spec);
    double budget = tau >= 0.0 ? tau : strat.tau;
    ResponseMode mode = strat.mode;
    if (!defend_mode.empty())
      mode = defend_mode == "seq" ? ResponseMode::sequential : ResponseMode::conjunction;
    auto deployed = fairscreen::conservative_shift(strat.halfspaces, budget);
    auto outcome = fairscreen::evaluate_defense(strat.halfspaces, deployed, strat.agents, budget, mode);
    json shifted = json::array();
    for (const Halfspace& h : deployed) shifted.push_back({{"w", h.normal}, {"b", h.offset}});
    json out{{"shifted_pipeline", std::move(shifted)},
             {"tpr", outcome.tpr},
             {"fpr", outcome.fpr},
             {"tau", budget},
             {"mode", mode == ResponseMode::sequential ? "seq" : "conj"}};
    std::cout << out.dump(2) << '\n';
    return 0;
  }

  if (regions->parsed()) {
    const auto& strat = strategic_of(spec);
    if (strat.halfspaces.size() != 2)
      throw fairscreen::ScenarioError("regions requires exactly two classifiers");
    double budget = tau >= 0.0 ? tau : strat.tau;
    auto map = fairscreen::region_map(strat.halfspaces[0], strat.halfspaces[1], budget,
                                      {x_min, x_max, y_min, y_max}, resolution);
    std::ofstream out(out_path);
    if (!out) throw fairscreen::ScenarioError(out_path + ": cannot open output file");
    map.to_csv(out);
    json summary{{"out", out_path},
                 {"grid", {map.xs.size(), map.ys.size()}},
                 {"tau", budget}};
    std::cout << summary.dump(2) << '\n';
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    nlohmann::json err{{"error", e.what()}};
    std::cerr << err.dump() << '\n';
    return 1;
  }
}
