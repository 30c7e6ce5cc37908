#include "fairscreen/defense.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace fairscreen {

namespace {

constexpr double kMembershipSlack = 1e-9;  // grid/pass checks near cost == tau

bool passes_all(const std::vector<Halfspace>& hs, const Vec& x) {
  for (const Halfspace& h : hs)
    if (!h.passes(x)) return false;
  return true;
}

double response_cost(const Vec& x0, const std::vector<Halfspace>& hs, ResponseMode mode,
                     std::uint64_t seed) {
  if (mode == ResponseMode::conjunction) {
    try {
      return conjunction_best_response(x0, hs).cost;
    } catch (const std::runtime_error&) {  // empty intersection: unreachable target
      return std::numeric_limits<double>::infinity();
    }
  }
  double seq = sequential_best_response(x0, hs, CostSpec::l2(), seed).cost;
  // A one-shot move into the intersection is also a sequential strategy, so
  // the sequential cost never exceeds the conjunction cost.
  try {
    seq = std::min(seq, conjunction_best_response(x0, hs).cost);
  } catch (const std::runtime_error&) {
  }
  return seq;
}

}  // namespace

std::vector<Halfspace> conservative_shift(const std::vector<Halfspace>& hs, double tau) {
  if (tau < 0.0) throw std::invalid_argument("conservative_shift: tau must be >= 0");
  std::vector<Halfspace> out;
  out.reserve(hs.size());
  for (const Halfspace& h : hs) out.emplace_back(h.normal, h.offset + tau);
  return out;
}

bool general_position_check_2d(const std::vector<Halfspace>& hs) {
  for (const Halfspace& h : hs)
    if (h.dim() != 2)
      throw std::invalid_argument("general_position_check_2d: requires d = 2");
  const double tol = 1e-9;
  const std::size_t k = hs.size();

  // No three boundary lines through one point.
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      double det = hs[i].normal[0] * hs[j].normal[1] - hs[j].normal[0] * hs[i].normal[1];
      if (std::fabs(det) < tol) continue;
      Vec p{(hs[i].offset * hs[j].normal[1] - hs[j].offset * hs[i].normal[1]) / det,
            (hs[i].normal[0] * hs[j].offset - hs[j].normal[0] * hs[i].offset) / det};
      for (std::size_t l = 0; l < k; ++l) {
        if (l == i || l == j) continue;
        if (std::fabs(hs[l].margin(p)) < tol) return false;
      }
    }

  // No redundant classifier: the boundary of each h_i inside the other
  // classifiers' positive region must be a segment of positive length.
  for (std::size_t i = 0; i < k; ++i) {
    // Parametrize the boundary line: p(t) = p0 + t * dir.
    Vec p0 = vec_scale(hs[i].normal, hs[i].offset);
    Vec dir{-hs[i].normal[1], hs[i].normal[0]};
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool empty = false;
    for (std::size_t j = 0; j < k && !empty; ++j) {
      if (j == i) continue;
      double a = dot(hs[j].normal, dir);
      double b = hs[j].margin(p0);  // margin along the line: b + t * a >= 0
      if (std::fabs(a) < 1e-15) {
        if (b < 0.0) empty = true;
        continue;
      }
      if (a > 0.0)
        lo = std::max(lo, -b / a);
      else
        hi = std::min(hi, -b / a);
    }
    if (empty || hi - lo < tol) return false;
  }
  return true;
}

unsigned worker_count(std::size_t jobs) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FAIRSCREEN_THREADS")) {
    long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
  }
  return static_cast<unsigned>(std::min<std::size_t>(hw, std::max<std::size_t>(jobs, 1)));
}

namespace {

// Index-sharded parallel map; results land in preallocated slots, so the
// outcome is independent of the worker count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  unsigned workers = worker_count(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

DefenseOutcome evaluate_defense(const std::vector<Halfspace>& true_pipeline,
                                const std::vector<Halfspace>& deployed_pipeline,
                                const std::vector<Vec>& agents, double tau, ResponseMode mode) {
  if (tau < 0.0) throw std::invalid_argument("evaluate_defense: tau must be >= 0");
  std::vector<std::uint8_t> label(agents.size()), admitted(agents.size());
  parallel_for(agents.size(), [&](std::size_t i) {
    label[i] = passes_all(true_pipeline, agents[i]) ? 1 : 0;
    double cost = response_cost(agents[i], deployed_pipeline, mode, 0x5EEDULL + i);
    admitted[i] = cost <= tau ? 1 : 0;
  });
  DefenseOutcome out;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (label[i]) {
      ++out.positives;
      if (admitted[i]) ++out.true_positives;
    } else {
      ++out.negatives;
      if (admitted[i]) ++out.false_positives;
    }
  }
  out.tpr = out.positives ? static_cast<double>(out.true_positives) / out.positives : 0.0;
  out.fpr = out.negatives ? static_cast<double>(out.false_positives) / out.negatives : 0.0;
  return out;
}

void RegionMap::to_csv(std::ostream& os) const {
  os << "x,y,conj_pass,seq_pass\n";
  for (std::size_t iy = 0; iy < ys.size(); ++iy)
    for (std::size_t ix = 0; ix < xs.size(); ++ix)
      os << xs[ix] << ',' << ys[iy] << ',' << int(conj_pass[iy * xs.size() + ix]) << ','
         << int(seq_pass[iy * xs.size() + ix]) << '\n';
}

RegionMap region_map(const Halfspace& h1, const Halfspace& h2, double tau,
                     const RegionBounds& bounds, double resolution) {
  if (h1.dim() != 2 || h2.dim() != 2) throw std::invalid_argument("region_map: requires d = 2");
  if (resolution <= 0.0) throw std::invalid_argument("region_map: resolution must be > 0");
  RegionMap map;
  map.resolution = resolution;
  for (double x = bounds.x_min; x <= bounds.x_max + 1e-12; x += resolution) map.xs.push_back(x);
  for (double y = bounds.y_min; y <= bounds.y_max + 1e-12; y += resolution) map.ys.push_back(y);
  map.conj_pass.assign(map.xs.size() * map.ys.size(), 0);
  map.seq_pass.assign(map.xs.size() * map.ys.size(), 0);

  std::vector<Halfspace> both{h1, h2};
  parallel_for(map.ys.size(), [&](std::size_t iy) {
    for (std::size_t ix = 0; ix < map.xs.size(); ++ix) {
      Vec x0{map.xs[ix], map.ys[iy]};
      double conj;
      try {
        conj = conjunction_best_response(x0, both).cost;
      } catch (const std::runtime_error&) {
        conj = std::numeric_limits<double>::infinity();
      }
      double seq = std::min(sequential_cost_2d(x0, h1, h2), conj);
      std::size_t at = iy * map.xs.size() + ix;
      map.conj_pass[at] = conj <= tau + kMembershipSlack ? 1 : 0;
      map.seq_pass[at] = seq <= tau + kMembershipSlack ? 1 : 0;
    }
  });
  return map;
}

}  // namespace fairscreen
