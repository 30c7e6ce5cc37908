#include "fairscreen/lp.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace fairscreen {

namespace {

constexpr double kEps = 1e-9;

// Tableau layout: rows = constraints, columns = structural vars, surplus
// vars, artificial vars, rhs. Phase 1 drives the artificials to zero, phase 2
// minimizes the real objective.
struct Tableau {
  std::size_t rows, cols;           // cols excludes the rhs column
  std::vector<std::vector<double>> a;  // rows x (cols + 1)
  std::vector<std::size_t> basis;      // basic column per row

  double& at(std::size_t r, std::size_t c) { return a[r][c]; }
  double rhs(std::size_t r) const { return a[r][cols]; }

  void pivot(std::size_t pr, std::size_t pc) {
    double p = a[pr][pc];
    for (std::size_t c = 0; c <= cols; ++c) a[pr][c] /= p;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == pr) continue;
      double f = a[r][pc];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= cols; ++c) a[r][c] -= f * a[pr][c];
    }
    basis[pr] = pc;
  }
};

// Minimizes obj over the tableau. Returns false if unbounded.
bool run_simplex(Tableau& t, std::vector<double>& obj, double& obj_rhs) {
  for (;;) {
    // Reduced costs are kept directly in obj by eliminating basic columns.
    std::size_t pc = t.cols;
    for (std::size_t c = 0; c < t.cols; ++c) {
      if (obj[c] < -kEps) {  // Bland: first improving column
        pc = c;
        break;
      }
    }
    if (pc == t.cols) return true;  // optimal
    std::size_t pr = t.rows;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < t.rows; ++r) {
      if (t.a[r][pc] > kEps) {
        double ratio = t.rhs(r) / t.a[r][pc];
        if (ratio < best - kEps ||
            (ratio < best + kEps && (pr == t.rows || t.basis[r] < t.basis[pr]))) {
          best = ratio;
          pr = r;
        }
      }
    }
    if (pr == t.rows) return false;  // unbounded
    t.pivot(pr, pc);
    // Eliminate the entering column from the objective row.
    double f = obj[pc];
    if (f != 0.0) {
      for (std::size_t c = 0; c <= t.cols; ++c) {
        double v = (c == t.cols) ? t.rhs(pr) : t.a[pr][c];
        if (c == t.cols)
          obj_rhs -= f * v;
        else
          obj[c] -= f * v;
      }
    }
  }
}

}  // namespace

LpResult solve_lp_geq(const std::vector<double>& objective,
                      const std::vector<std::vector<double>>& constraints,
                      const std::vector<double>& rhs) {
  const std::size_t m = constraints.size();
  const std::size_t n = objective.size();
  if (rhs.size() != m) throw std::invalid_argument("solve_lp_geq: rhs size mismatch");

  // A v - s = b, s >= 0; rows with negative b are negated so rhs >= 0.
  // Artificials are added to every row; rows whose surplus has coefficient +1
  // could reuse it as the initial basis, but uniform artificials keep the
  // bookkeeping simple at these sizes.
  Tableau t;
  t.rows = m;
  t.cols = n + m + m;
  t.a.assign(m, std::vector<double>(t.cols + 1, 0.0));
  t.basis.assign(m, 0);
  for (std::size_t r = 0; r < m; ++r) {
    if (constraints[r].size() != n) throw std::invalid_argument("solve_lp_geq: constraint size mismatch");
    double sign = rhs[r] < 0 ? -1.0 : 1.0;
    for (std::size_t c = 0; c < n; ++c) t.a[r][c] = sign * constraints[r][c];
    t.a[r][n + r] = -sign;          // surplus
    t.a[r][n + m + r] = 1.0;        // artificial
    t.a[r][t.cols] = sign * rhs[r];
    t.basis[r] = n + m + r;
  }

  // Phase 1: minimize sum of artificials.
  std::vector<double> phase1(t.cols, 0.0);
  for (std::size_t r = 0; r < m; ++r) phase1[n + m + r] = 1.0;
  double p1_rhs = 0.0;
  for (std::size_t r = 0; r < m; ++r) {  // eliminate initial basis from objective
    for (std::size_t c = 0; c < t.cols; ++c) phase1[c] -= t.a[r][c];
    p1_rhs -= t.rhs(r);
  }
  if (!run_simplex(t, phase1, p1_rhs))
    return {LpResult::Status::unbounded, 0.0, {}};
  if (-p1_rhs > 1e-7) return {LpResult::Status::infeasible, 0.0, {}};

  // Drive any artificial still in the basis out (degenerate rows), then
  // freeze artificial columns at zero.
  for (std::size_t r = 0; r < m; ++r) {
    if (t.basis[r] >= n + m) {
      std::size_t pc = t.cols;
      for (std::size_t c = 0; c < n + m; ++c) {
        if (std::fabs(t.a[r][c]) > kEps) {
          pc = c;
          break;
        }
      }
      if (pc < t.cols) t.pivot(r, pc);
      // else: the row is all zeros, redundant constraint; leave it.
    }
  }
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = n + m; c < t.cols; ++c) t.a[r][c] = 0.0;

  // Phase 2.
  std::vector<double> phase2(t.cols, 0.0);
  for (std::size_t c = 0; c < n; ++c) phase2[c] = objective[c];
  double p2_rhs = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    double f = phase2[t.basis[r]];
    if (f != 0.0) {
      for (std::size_t c = 0; c < t.cols; ++c) phase2[c] -= f * t.a[r][c];
      p2_rhs -= f * t.rhs(r);
      phase2[t.basis[r]] = 0.0;
    }
  }
  for (std::size_t c = n + m; c < t.cols; ++c) phase2[c] = 0.0;
  if (!run_simplex(t, phase2, p2_rhs))
    return {LpResult::Status::unbounded, 0.0, {}};

  LpResult res;
  res.status = LpResult::Status::optimal;
  res.solution.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    if (t.basis[r] < n) res.solution[t.basis[r]] = t.rhs(r);
  res.value = 0.0;
  for (std::size_t c = 0; c < n; ++c) res.value += objective[c] * res.solution[c];
  return res;
}

}  // namespace fairscreen
