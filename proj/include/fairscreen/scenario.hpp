#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairscreen/defense.hpp"
#include "fairscreen/optimizer.hpp"
#include "fairscreen/pipeline.hpp"
#include "fairscreen/strategic.hpp"

namespace fairscreen {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StrategicSection {
  std::vector<Halfspace> halfspaces;
  std::vector<Vec> agents;
  double tau = 0.0;
  ResponseMode mode = ResponseMode::sequential;
};

// One experiment bundle: a screening pipeline with its population and
// objective, plus an optional strategic-manipulation section. In rational
// mode every pipeline/population number is carried exactly alongside the
// double view.
struct ScenarioSpec {
  int schema_version = 1;
  std::uint64_t seed = 0;
  bool rational_mode = false;
  std::vector<std::string> group_names;
  std::vector<std::vector<TestStats<Rational>>> pipeline_stats;  // exact master copy
  std::vector<Rational> positive_mass, negative_mass;
  double alpha = 0.5;
  ObjectiveKind objective = ObjectiveKind::linear;
  std::optional<StrategicSection> strategic;

  Pipeline<double> pipeline(bool allow_uninformative_tests = false) const;
  Population<double> population() const;
  Pipeline<Rational> pipeline_exact(bool allow_uninformative_tests = false) const;
  Population<Rational> population_exact() const;
};

ScenarioSpec parse_scenario(const std::string& text, const std::string& origin);
ScenarioSpec load_scenario(const std::string& path);

// Canonical serialization: sorted keys, two-space indent, trailing newline;
// rational mode emits exact "p/q" strings for pipeline and population values.
std::string save_scenario(const ScenarioSpec& spec);

}  // namespace fairscreen
