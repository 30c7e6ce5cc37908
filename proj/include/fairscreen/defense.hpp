#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fairscreen/strategic.hpp"

namespace fairscreen {

enum class ResponseMode { sequential, conjunction };

// Replaces every classifier (w, b) by its tau-shifted version (w, b + tau).
std::vector<Halfspace> conservative_shift(const std::vector<Halfspace>& hs, double tau);

// d = 2 only: no three boundary lines concurrent (within 1e-9) and no
// classifier redundant (its boundary cut with the others' positive region
// must be a segment of positive length). Throws for other dimensions.
bool general_position_check_2d(const std::vector<Halfspace>& hs);

struct DefenseOutcome {
  double tpr = 0.0;
  double fpr = 0.0;
  std::size_t positives = 0, negatives = 0;
  std::size_t true_positives = 0, false_positives = 0;
};

// Each agent best-responds to the deployed pipeline with total budget tau and
// succeeds iff its optimal manipulation cost is within tau. Ground-truth
// labels come from the conjunction of the *true* pipeline on the unmanipulated
// feature vector.
DefenseOutcome evaluate_defense(const std::vector<Halfspace>& true_pipeline,
                                const std::vector<Halfspace>& deployed_pipeline,
                                const std::vector<Vec>& agents, double tau, ResponseMode mode);

struct RegionBounds {
  double x_min = -2, x_max = 2, y_min = -2, y_max = 2;
};

// Budget-tau manipulation regions of a two-classifier 2-d pipeline, sampled
// on a regular grid. passes_conjunction implies passes_sequential everywhere.
struct RegionMap {
  std::vector<double> xs, ys;
  std::vector<std::uint8_t> conj_pass;  // row-major: iy * xs.size() + ix
  std::vector<std::uint8_t> seq_pass;
  double resolution = 0.0;

  bool conj_at(std::size_t ix, std::size_t iy) const { return conj_pass[iy * xs.size() + ix] != 0; }
  bool seq_at(std::size_t ix, std::size_t iy) const { return seq_pass[iy * xs.size() + ix] != 0; }
  void to_csv(std::ostream& os) const;  // columns: x, y, conj_pass, seq_pass
};

RegionMap region_map(const Halfspace& h1, const Halfspace& h2, double tau,
                     const RegionBounds& bounds, double resolution);

// Worker count for grid/agent evaluation: FAIRSCREEN_THREADS caps it.
unsigned worker_count(std::size_t jobs);

}  // namespace fairscreen
