#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fairscreen {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
Vec vec_sub(const Vec& a, const Vec& b);
Vec vec_add(const Vec& a, const Vec& b);
Vec vec_scale(const Vec& a, double s);

// Linear classifier h(x) = 1 iff normal.x >= offset. Normalized to a unit
// normal at construction (the offset is rescaled accordingly).
struct Halfspace {
  Vec normal;
  double offset = 0.0;

  Halfspace(Vec w, double b);

  std::size_t dim() const { return normal.size(); }
  double margin(const Vec& x) const { return dot(normal, x) - offset; }
  bool passes(const Vec& x) const { return margin(x) >= 0.0; }
};

// Orthogonal projection onto the positive region and distance to it.
Vec project(const Vec& x, const Halfspace& h);
double distance(const Vec& x, const Halfspace& h);

// True iff every normal component is >= 0; for halfspaces this is equivalent
// to positive classifications being preserved under feature-wise increases.
bool is_feature_monotone(const Halfspace& h);

// Manipulation cost family. For `quadratic`, cost(x, y) = (y-x)' A (y-x) with
// A symmetric positive definite; the other kinds are the corresponding norms.
enum class CostKind { l2, l1, linf, quadratic };

struct CostSpec {
  CostKind kind = CostKind::l2;
  std::vector<std::vector<double>> quad_form;  // A, used only for quadratic

  static CostSpec l2() { return {}; }
  static CostSpec l1() { return {CostKind::l1, {}}; }
  static CostSpec linf() { return {CostKind::linf, {}}; }
  static CostSpec quadratic(std::vector<std::vector<double>> a) {
    return {CostKind::quadratic, std::move(a)};
  }
};

double step_cost(const Vec& a, const Vec& b, const CostSpec& cost);

struct ConjunctionResult {
  Vec point;
  double cost = 0.0;
};

// Cheapest single move into the intersection of all positive regions.
// l2/quadratic: exact active-set enumeration; l1/linf: linear program.
// Throws std::runtime_error if the intersection is empty.
ConjunctionResult conjunction_best_response(const Vec& x0, const std::vector<Halfspace>& hs,
                                            const CostSpec& cost = CostSpec::l2());

struct ManipulationPath {
  std::vector<Vec> points;  // x^(0) .. x^(k); points[i] passes hs[i-1] for i >= 1
  double cost = 0.0;
  bool converged = true;
  int closed_form_case = 0;  // 1..4 = R1..R4 when produced by the 2-d closed form

  double recompute_cost(const CostSpec& cost = CostSpec::l2()) const;
};

// Minimum-cost sequential manipulation through hs, one classifier at a time.
// l2/quadratic: multi-start alternating minimization with exact per-point
// updates; l1/linf: linear program. Deterministic for a fixed seed.
ManipulationPath sequential_best_response(const Vec& x0, const std::vector<Halfspace>& hs,
                                          const CostSpec& cost = CostSpec::l2(),
                                          std::uint64_t seed = 0);

// Closed-form best response for d = 2, k = 2 under l2 cost, with the region
// case label (R1: already past h1; R2: zig-zag; R3: go to the intersection
// point; R4: projecting onto h1 suffices). Throws std::invalid_argument for
// parallel classifiers or d != 2.
ManipulationPath sequential_closed_form_2d(const Vec& x0, const Halfspace& h1, const Halfspace& h2);

// Closed form when applicable, numeric solver otherwise.
double sequential_cost_2d(const Vec& x0, const Halfspace& h1, const Halfspace& h2);

// Myopic baseline: project onto each classifier in turn.
ManipulationPath greedy_response(const Vec& x0, const std::vector<Halfspace>& hs);

}  // namespace fairscreen
