#include "fairscreen/scenario.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fairscreen {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ScenarioError(where + ": " + what);
}

const json& require(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing required field '") + key + "'");
  return *it;
}

// Pipeline and population numbers are parsed through Rational so the exact
// mode sees precisely the written value. Plain JSON numbers are recovered via
// their shortest round-trip representation, which is the written literal.
Rational parse_exact(const json& j, const std::string& where) {
  try {
    if (j.is_string()) return Rational::parse(j.get<std::string>());
    if (j.is_number()) return Rational::parse(j.dump());
  } catch (const std::exception& e) {
    fail(where, std::string("cannot represent value exactly: ") + e.what());
  }
  fail(where, "expected a number or a fraction string");
}

double parse_double(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    try {
      return Rational::parse(j.get<std::string>()).to_double();
    } catch (const std::exception& e) {
      fail(where, std::string("bad numeric string: ") + e.what());
    }
  }
  fail(where, "expected a number");
}

}  // namespace

Pipeline<double> ScenarioSpec::pipeline(bool allow_uninformative_tests) const {
  std::vector<std::vector<TestStats<double>>> stages;
  stages.reserve(pipeline_stats.size());
  for (const auto& stage : pipeline_stats) {
    std::vector<TestStats<double>> row;
    row.reserve(stage.size());
    for (const auto& t : stage)
      row.push_back({t.pass_qualified.to_double(), t.pass_unqualified.to_double()});
    stages.push_back(std::move(row));
  }
  return Pipeline<double>(std::move(stages), allow_uninformative_tests);
}

Population<double> ScenarioSpec::population() const {
  std::vector<double> q, u;
  for (const Rational& v : positive_mass) q.push_back(v.to_double());
  for (const Rational& v : negative_mass) u.push_back(v.to_double());
  return Population<double>(std::move(q), std::move(u));
}

Pipeline<Rational> ScenarioSpec::pipeline_exact(bool allow_uninformative_tests) const {
  return Pipeline<Rational>(pipeline_stats, allow_uninformative_tests);
}

Population<Rational> ScenarioSpec::population_exact() const {
  return Population<Rational>(positive_mass, negative_mass);
}

ScenarioSpec parse_scenario(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw ScenarioError(origin + ":" + std::to_string(line) + ": " + e.what());
  }
  if (!root.is_object()) fail(origin, "top-level value must be an object");

  ScenarioSpec spec;
  spec.schema_version = require(root, "schema_version", origin).get<int>();
  if (spec.schema_version != 1)
    fail(origin, "unsupported schema_version " + std::to_string(spec.schema_version));
  if (root.contains("seed")) spec.seed = root["seed"].get<std::uint64_t>();
  if (root.contains("rational")) spec.rational_mode = root["rational"].get<bool>();

  const json& groups = require(root, "groups", origin);
  if (!groups.is_array() || groups.empty()) fail(origin + ".groups", "expected a nonempty array");
  for (const auto& g : groups) spec.group_names.push_back(g.get<std::string>());
  for (std::size_t i = 0; i < spec.group_names.size(); ++i)
    for (std::size_t j = i + 1; j < spec.group_names.size(); ++j)
      if (spec.group_names[i] == spec.group_names[j])
        fail(origin + ".groups", "duplicate group name '" + spec.group_names[i] + "'");

  const json& pipe = require(root, "pipeline", origin);
  if (!pipe.is_array() || pipe.empty()) fail(origin + ".pipeline", "expected a nonempty array of stages");
  for (std::size_t i = 0; i < pipe.size(); ++i) {
    const std::string where = origin + ".pipeline[" + std::to_string(i) + "]";
    std::vector<TestStats<Rational>> stage;
    for (const std::string& name : spec.group_names) {
      if (!pipe[i].contains(name)) fail(where, "missing group '" + name + "'");
      const json& cell = pipe[i][name];
      TestStats<Rational> t;
      t.pass_qualified = parse_exact(require(cell, "pass_qualified", where + "." + name),
                                     where + "." + name + ".pass_qualified");
      t.pass_unqualified = parse_exact(require(cell, "pass_unqualified", where + "." + name),
                                       where + "." + name + ".pass_unqualified");
      stage.push_back(t);
    }
    spec.pipeline_stats.push_back(std::move(stage));
  }

  const json& popj = require(root, "population", origin);
  for (const std::string& name : spec.group_names) {
    const std::string where = origin + ".population." + name;
    if (!popj.contains(name)) fail(origin + ".population", "missing group '" + name + "'");
    spec.positive_mass.push_back(parse_exact(require(popj[name], "positive_mass", where), where + ".positive_mass"));
    spec.negative_mass.push_back(parse_exact(require(popj[name], "negative_mass", where), where + ".negative_mass"));
  }

  const json& obj = require(root, "objective", origin);
  spec.alpha = parse_double(require(obj, "alpha", origin + ".objective"), origin + ".objective.alpha");
  std::string kind = require(obj, "kind", origin + ".objective").get<std::string>();
  if (kind == "f")
    spec.objective = ObjectiveKind::linear;
  else if (kind == "g")
    spec.objective = ObjectiveKind::reciprocal;
  else
    fail(origin + ".objective.kind", "expected \"f\" or \"g\"");

  if (root.contains("strategic") && !root["strategic"].is_null()) {
    const json& sj = root["strategic"];
    const std::string where = origin + ".strategic";
    StrategicSection s;
    const json& hj = require(sj, "halfspaces", where);
    if (!hj.is_array() || hj.empty()) fail(where + ".halfspaces", "expected a nonempty array");
    for (std::size_t i = 0; i < hj.size(); ++i) {
      const std::string hw = where + ".halfspaces[" + std::to_string(i) + "]";
      Vec w;
      for (const auto& c : require(hj[i], "w", hw)) w.push_back(parse_double(c, hw + ".w"));
      double b = parse_double(require(hj[i], "b", hw), hw + ".b");
      try {
        s.halfspaces.emplace_back(std::move(w), b);
      } catch (const std::invalid_argument& e) {
        fail(hw, e.what());
      }
    }
    const std::size_t dim = s.halfspaces[0].dim();
    for (const Halfspace& h : s.halfspaces)
      if (h.dim() != dim) fail(where + ".halfspaces", "inconsistent dimensions");
    if (sj.contains("agents"))
      for (std::size_t i = 0; i < sj["agents"].size(); ++i) {
        Vec x;
        for (const auto& c : sj["agents"][i])
          x.push_back(parse_double(c, where + ".agents[" + std::to_string(i) + "]"));
        if (x.size() != dim)
          fail(where + ".agents[" + std::to_string(i) + "]", "dimension mismatch with halfspaces");
        s.agents.push_back(std::move(x));
      }
    s.tau = sj.contains("tau") ? parse_double(sj["tau"], where + ".tau") : 0.0;
    if (s.tau < 0.0) fail(where + ".tau", "manipulation budget must be >= 0");
    if (sj.contains("mode")) {
      std::string m = sj["mode"].get<std::string>();
      if (m == "sequential")
        s.mode = ResponseMode::sequential;
      else if (m == "conjunction")
        s.mode = ResponseMode::conjunction;
      else
        fail(where + ".mode", "expected \"sequential\" or \"conjunction\"");
    }
    spec.strategic = std::move(s);
  }

  // Module-level invariants: constructing the typed objects runs the checks.
  try {
    spec.pipeline();
  } catch (const std::invalid_argument& e) {
    fail(origin + ".pipeline", e.what());
  }
  try {
    spec.population();
  } catch (const std::invalid_argument& e) {
    fail(origin + ".population", e.what());
  }
  if (spec.alpha < 0.0 || spec.alpha > 1.0) fail(origin + ".objective.alpha", "alpha must lie in [0,1]");
  return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path + ": cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

std::string save_scenario(const ScenarioSpec& spec) {
  json root;
  root["schema_version"] = spec.schema_version;
  root["seed"] = spec.seed;
  root["rational"] = spec.rational_mode;
  root["groups"] = spec.group_names;

  auto emit = [&](const Rational& v) -> json {
    if (spec.rational_mode) return v.str();
    return v.to_double();
  };

  json stages = json::array();
  for (const auto& stage : spec.pipeline_stats) {
    json row;
    for (std::size_t g = 0; g < spec.group_names.size(); ++g) {
      row[spec.group_names[g]] = {{"pass_qualified", emit(stage[g].pass_qualified)},
                                  {"pass_unqualified", emit(stage[g].pass_unqualified)}};
    }
    stages.push_back(std::move(row));
  }
  root["pipeline"] = std::move(stages);

  json pop;
  for (std::size_t g = 0; g < spec.group_names.size(); ++g)
    pop[spec.group_names[g]] = {{"positive_mass", emit(spec.positive_mass[g])},
                                {"negative_mass", emit(spec.negative_mass[g])}};
  root["population"] = std::move(pop);

  root["objective"] = {{"alpha", spec.alpha},
                       {"kind", spec.objective == ObjectiveKind::linear ? "f" : "g"}};

  if (spec.strategic) {
    json s;
    json hs = json::array();
    for (const Halfspace& h : spec.strategic->halfspaces)
      hs.push_back({{"w", h.normal}, {"b", h.offset}});
    s["halfspaces"] = std::move(hs);
    json agents = json::array();
    for (const Vec& x : spec.strategic->agents) agents.push_back(x);
    s["agents"] = std::move(agents);
    s["tau"] = spec.strategic->tau;
    s["mode"] = spec.strategic->mode == ResponseMode::sequential ? "sequential" : "conjunction";
    root["strategic"] = std::move(s);
  }
  return root.dump(2) + "\n";
}

}  // namespace fairscreen
