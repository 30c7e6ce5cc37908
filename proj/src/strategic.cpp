#include "fairscreen/strategic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "fairscreen/lp.hpp"
#include "fairscreen/rng.hpp"

namespace fairscreen {

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

Vec vec_sub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vec vec_add(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vec vec_scale(const Vec& a, double s) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
  return r;
}

Halfspace::Halfspace(Vec w, double b) : normal(std::move(w)), offset(b) {
  if (normal.empty()) throw std::invalid_argument("Halfspace: empty normal");
  double n = norm2(normal);
  if (n <= 0.0 || !std::isfinite(n)) throw std::invalid_argument("Halfspace: normal must be nonzero");
  for (double& c : normal) c /= n;
  offset /= n;
}

Vec project(const Vec& x, const Halfspace& h) {
  double m = h.margin(x);
  if (m >= 0.0) return x;
  return vec_add(x, vec_scale(h.normal, -m));
}

double distance(const Vec& x, const Halfspace& h) { return std::max(0.0, -h.margin(x)); }

bool is_feature_monotone(const Halfspace& h) {
  for (double c : h.normal)
    if (c < 0.0) return false;
  return true;
}

double step_cost(const Vec& a, const Vec& b, const CostSpec& cost) {
  Vec d = vec_sub(b, a);
  switch (cost.kind) {
    case CostKind::l2:
      return norm2(d);
    case CostKind::l1: {
      double s = 0.0;
      for (double v : d) s += std::fabs(v);
      return s;
    }
    case CostKind::linf: {
      double s = 0.0;
      for (double v : d) s = std::max(s, std::fabs(v));
      return s;
    }
    case CostKind::quadratic: {
      double s = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d.size(); ++j) s += d[i] * cost.quad_form[i][j] * d[j];
      return s;
    }
  }
  return 0.0;
}

double ManipulationPath::recompute_cost(const CostSpec& cost) const {
  double s = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) s += step_cost(points[i - 1], points[i], cost);
  return s;
}

namespace {

constexpr double kFeasTol = 1e-9;

// Moves z onto or inside the positive region: one projection, then ulp steps
// along the normal until the margin is nonnegative, plus two buffer steps so
// that fixing a neighboring constraint cannot knock this one back below zero.
// The ulp walk is needed because a sub-ulp nudge would round away on large
// coordinates.
void force_feasible(Vec& z, const Halfspace& h) {
  if (h.margin(z) >= 0.0) return;
  z = project(z, h);
  int buffer = 2;
  for (int round = 0; round < 256 && (h.margin(z) < 0.0 || buffer-- > 0); ++round) {
    for (std::size_t c = 0; c < z.size(); ++c) {
      if (h.normal[c] > 0.0)
        z[c] = std::nextafter(z[c], std::numeric_limits<double>::infinity());
      else if (h.normal[c] < 0.0)
        z[c] = std::nextafter(z[c], -std::numeric_limits<double>::infinity());
    }
  }
}

// Nudges each path point onto or inside its classifier's positive region.
// Points only ever move toward feasibility, so the recomputed cost stays an
// upper bound on the optimum.
void snap_path(std::vector<Vec>& points, const std::vector<Halfspace>& hs) {
  for (std::size_t i = 1; i < points.size(); ++i) force_feasible(points[i], hs[i - 1]);
}

// Clears residual (few-ulp) violations of z against every halfspace at once.
// Walking one normal at a time can ping-pong between two nearly anti-parallel
// active constraints, so instead all near-boundary constraints are pushed to
// a strictly positive margin of ~1e-13 in one combined step. The overshoot is
// orders of magnitude below every consumer tolerance, and the cost is always
// recomputed from the final point.
void snap_point(Vec& z, const std::vector<Halfspace>& hs) {
  double scale = 1.0;
  for (double c : z) scale = std::max(scale, std::fabs(c));
  const double target = 1e-13 * scale;
  for (int rounds = 0; rounds < 32; ++rounds) {
    std::vector<const Halfspace*> active;
    double worst = 0.0;
    const Halfspace* bad = nullptr;
    for (const Halfspace& h : hs) {
      double m = h.margin(z);
      if (m < target) active.push_back(&h);
      if (m < worst) {
        worst = m;
        bad = &h;
      }
    }
    if (!bad) return;
    Vec dir(z.size(), 0.0);
    for (const Halfspace* h : active) dir = vec_add(dir, h->normal);
    double dn = norm2(dir);
    double gain = 0.0;
    if (dn > 1e-8) {
      gain = std::numeric_limits<double>::infinity();
      for (const Halfspace* h : active) gain = std::min(gain, dot(h->normal, dir) / dn);
    }
    if (gain <= 1e-6) {
      // The normal sum does not enter the active cone (three or more nearly
      // opposing constraints); find an interior direction by a Chebyshev LP:
      // maximize delta s.t. n_i.v >= delta, |v|_1 <= 1.
      const std::size_t d = z.size();
      std::vector<double> obj(2 * d + 1, 0.0);
      obj[2 * d] = -1.0;
      std::vector<std::vector<double>> rows;
      std::vector<double> rhs;
      for (const Halfspace* h : active) {
        std::vector<double> row(2 * d + 1, 0.0);
        for (std::size_t c = 0; c < d; ++c) {
          row[c] = h->normal[c];
          row[d + c] = -h->normal[c];
        }
        row[2 * d] = -1.0;
        rows.push_back(std::move(row));
        rhs.push_back(0.0);
      }
      std::vector<double> cap(2 * d + 1, -1.0);
      cap[2 * d] = 0.0;
      rows.push_back(std::move(cap));
      rhs.push_back(-1.0);
      LpResult lp = solve_lp_geq(obj, rows, rhs);
      if (lp.status != LpResult::Status::optimal || -lp.value <= 1e-9) {
        force_feasible(z, *bad);  // degenerate cone: best effort on the worst
        continue;
      }
      Vec v(d);
      for (std::size_t c = 0; c < d; ++c) v[c] = lp.solution[c] - lp.solution[d + c];
      dn = norm2(v);
      gain = std::numeric_limits<double>::infinity();
      for (const Halfspace* h : active) gain = std::min(gain, dot(h->normal, v) / dn);
      if (gain <= 0.0) {
        force_feasible(z, *bad);
        continue;
      }
      dir = v;
    }
    z = vec_add(z, vec_scale(dir, (target - worst) / (gain * dn)));
  }
}

// --- small dense linear algebra for the quadratic-cost transform ---------

using Matrix = std::vector<std::vector<double>>;

// A = L L^T, returns lower-triangular L. Throws unless A is symmetric PD.
Matrix cholesky(const Matrix& a) {
  const std::size_t n = a.size();
  Matrix l(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != n) throw std::invalid_argument("quadratic cost: matrix must be square");
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::fabs(a[i][j] - a[j][i]) > 1e-12)
        throw std::invalid_argument("quadratic cost: matrix must be symmetric");
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      if (i == j) {
        if (s <= 0.0) throw std::invalid_argument("quadratic cost: matrix must be positive definite");
        l[i][i] = std::sqrt(s);
      } else {
        l[i][j] = s / l[j][j];
      }
    }
  }
  return l;
}

Vec lower_solve(const Matrix& l, const Vec& b) {  // L y = b
  const std::size_t n = l.size();
  Vec y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t j = 0; j < i; ++j) s -= l[i][j] * y[j];
    y[i] = s / l[i][i];
  }
  return y;
}

Vec upper_solve_t(const Matrix& l, const Vec& b) {  // L^T y = b
  const std::size_t n = l.size();
  Vec y(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= l[j][i] * y[j];
    y[i] = s / l[i][i];
  }
  return y;
}

Vec transform_point(const Matrix& l, const Vec& x) {  // x' = L^T x
  const std::size_t n = l.size();
  Vec y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) y[i] += l[j][i] * x[j];
  return y;
}

// In x' = L^T x coordinates the quadratic form is the squared Euclidean norm
// and the halfspace w.x >= b becomes (L^{-1} w).x' >= b.
struct QuadTransform {
  Matrix l;
  std::vector<Halfspace> hs;
  Vec to_prime(const Vec& x) const { return transform_point(l, x); }
  Vec from_prime(const Vec& xp) const { return upper_solve_t(l, xp); }
};

QuadTransform make_transform(const std::vector<Halfspace>& hs, const Matrix& a) {
  QuadTransform t;
  t.l = cholesky(a);
  t.hs.reserve(hs.size());
  for (const Halfspace& h : hs) t.hs.emplace_back(lower_solve(t.l, h.normal), h.offset);
  return t;
}

// --- exact Euclidean projection onto an intersection of halfspaces -------

// Enumerates candidate active sets of size <= d; the optimum's active set is
// among them, and any feasible candidate is an upper bound, so the feasible
// minimum is the exact projection. No feasible candidate means the
// intersection is empty.
std::optional<Vec> project_onto_intersection(const Vec& x, const std::vector<Halfspace>& hs) {
  const std::size_t k = hs.size();
  const std::size_t d = x.size();
  if (k > 20) throw std::invalid_argument("conjunction_best_response: too many classifiers (max 20)");

  std::optional<Vec> best;
  double best_dist = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> idx;
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    idx.clear();
    for (std::size_t i = 0; i < k; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    if (idx.size() > d) continue;

    Vec z = x;
    if (!idx.empty()) {
      // z = x + W^T lambda with W z = b  =>  (W W^T) lambda = b - W x.
      const std::size_t s = idx.size();
      Matrix g(s, std::vector<double>(s + 1, 0.0));
      for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = 0; j < s; ++j) g[i][j] = dot(hs[idx[i]].normal, hs[idx[j]].normal);
        g[i][s] = hs[idx[i]].offset - dot(hs[idx[i]].normal, x);
      }
      // Gaussian elimination with partial pivoting; singular -> skip subset.
      bool singular = false;
      for (std::size_t col = 0; col < s && !singular; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < s; ++r)
          if (std::fabs(g[r][col]) > std::fabs(g[piv][col])) piv = r;
        if (std::fabs(g[piv][col]) < 1e-12) {
          singular = true;
          break;
        }
        std::swap(g[col], g[piv]);
        for (std::size_t r = 0; r < s; ++r) {
          if (r == col) continue;
          double f = g[r][col] / g[col][col];
          if (f == 0.0) continue;
          for (std::size_t c = col; c <= s; ++c) g[r][c] -= f * g[col][c];
        }
      }
      if (singular) continue;
      for (std::size_t i = 0; i < s; ++i) {
        double lambda = g[i][s] / g[i][i];
        z = vec_add(z, vec_scale(hs[idx[i]].normal, lambda));
      }
    }

    bool feasible = true;
    for (const Halfspace& h : hs)
      if (h.margin(z) < -kFeasTol) {
        feasible = false;
        break;
      }
    if (!feasible) continue;
    double dist = norm2(vec_sub(z, x));
    if (dist < best_dist) {
      best_dist = dist;
      best = z;
    }
  }
  if (best) snap_point(*best, hs);
  return best;
}

// --- LP formulations for l1 / linf costs ----------------------------------

ConjunctionResult conjunction_lp(const Vec& x0, const std::vector<Halfspace>& hs, CostKind kind) {
  const std::size_t d = x0.size();
  const std::size_t k = hs.size();
  // Variables: delta_plus (d), delta_minus (d) [, t for linf].
  const std::size_t nvar = 2 * d + (kind == CostKind::linf ? 1 : 0);
  std::vector<double> obj(nvar, 0.0);
  if (kind == CostKind::l1)
    for (std::size_t j = 0; j < 2 * d; ++j) obj[j] = 1.0;
  else
    obj[2 * d] = 1.0;

  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> row(nvar, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      row[j] = hs[i].normal[j];
      row[d + j] = -hs[i].normal[j];
    }
    rows.push_back(std::move(row));
    rhs.push_back(hs[i].offset - dot(hs[i].normal, x0));
  }
  if (kind == CostKind::linf) {
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<double> row(nvar, 0.0);
      row[2 * d] = 1.0;
      row[j] = -1.0;
      row[d + j] = -1.0;
      rows.push_back(std::move(row));
      rhs.push_back(0.0);
    }
  }
  LpResult lp = solve_lp_geq(obj, rows, rhs);
  if (lp.status != LpResult::Status::optimal)
    throw std::runtime_error("conjunction_best_response: intersection of positive regions is empty");
  Vec z = x0;
  for (std::size_t j = 0; j < d; ++j) z[j] += lp.solution[j] - lp.solution[d + j];
  snap_point(z, hs);
  CostSpec cs;
  cs.kind = kind;
  return {z, step_cost(x0, z, cs)};
}

ManipulationPath sequential_lp(const Vec& x0, const std::vector<Halfspace>& hs, CostKind kind) {
  const std::size_t d = x0.size();
  const std::size_t k = hs.size();
  // Variables per step i: s_plus(i) (d), s_minus(i) (d) [, t_i last].
  const std::size_t per = 2 * d;
  const std::size_t nvar = k * per + (kind == CostKind::linf ? k : 0);
  std::vector<double> obj(nvar, 0.0);
  if (kind == CostKind::l1)
    for (std::size_t j = 0; j < k * per; ++j) obj[j] = 1.0;
  else
    for (std::size_t i = 0; i < k; ++i) obj[k * per + i] = 1.0;

  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (std::size_t i = 0; i < k; ++i) {
    // x^(i) = x0 + sum_{j<=i} (s_plus(j) - s_minus(j)) must pass hs[i].
    std::vector<double> row(nvar, 0.0);
    for (std::size_t j = 0; j <= i; ++j)
      for (std::size_t c = 0; c < d; ++c) {
        row[j * per + c] = hs[i].normal[c];
        row[j * per + d + c] = -hs[i].normal[c];
      }
    rows.push_back(std::move(row));
    rhs.push_back(hs[i].offset - dot(hs[i].normal, x0));
  }
  if (kind == CostKind::linf) {
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t c = 0; c < d; ++c) {
        std::vector<double> row(nvar, 0.0);
        row[k * per + i] = 1.0;
        row[i * per + c] = -1.0;
        row[i * per + d + c] = -1.0;
        rows.push_back(std::move(row));
        rhs.push_back(0.0);
      }
  }
  LpResult lp = solve_lp_geq(obj, rows, rhs);
  if (lp.status != LpResult::Status::optimal)
    throw std::runtime_error("sequential_best_response: linear program failed");

  ManipulationPath path;
  path.points.push_back(x0);
  Vec cur = x0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t c = 0; c < d; ++c)
      cur[c] += lp.solution[i * per + c] - lp.solution[i * per + d + c];
    path.points.push_back(cur);
  }
  snap_path(path.points, hs);
  CostSpec cs;
  cs.kind = kind;
  path.cost = path.recompute_cost(cs);
  path.converged = true;
  return path;
}

// --- alternating minimization for l2 / squared-l2 path costs --------------

// min |z-a| + |c-z| subject to w.z >= b, exactly.
Vec fermat_point_l2(const Vec& a, const Vec& c, const Halfspace& h) {
  double ma = h.margin(a), mc = h.margin(c);
  if (ma >= 0.0) return a;
  if (mc >= 0.0) {
    double t = -ma / (mc - ma);  // segment crossing
    return vec_add(a, vec_scale(vec_sub(c, a), t));
  }
  Vec cref = vec_add(c, vec_scale(h.normal, -2.0 * mc));  // mirror across boundary
  double mref = h.margin(cref);                           // = -mc > 0
  double t = -ma / (mref - ma);
  return vec_add(a, vec_scale(vec_sub(cref, a), t));
}

// min |z-a|^2 + |c-z|^2 subject to w.z >= b, exactly.
Vec fermat_point_sq(const Vec& a, const Vec& c, const Halfspace& h) {
  Vec mid = vec_scale(vec_add(a, c), 0.5);
  double m = h.margin(mid);
  if (m >= 0.0) return mid;
  return vec_add(mid, vec_scale(h.normal, -m));
}

double path_cost_euclid(const std::vector<Vec>& pts, bool squared) {
  double s = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    double step = norm2(vec_sub(pts[i], pts[i - 1]));
    s += squared ? step * step : step;
  }
  return s;
}

struct CdOutcome {
  std::vector<Vec> points;
  double cost = 0.0;
  bool converged = true;
};

CdOutcome coordinate_descent(std::vector<Vec> pts, const std::vector<Halfspace>& hs, bool squared) {
  const std::size_t k = hs.size();
  const int cap = 10000;
  double prev = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int sweep = 0; sweep < cap; ++sweep) {
    for (std::size_t i = 1; i < k; ++i)
      pts[i] = squared ? fermat_point_sq(pts[i - 1], pts[i + 1], hs[i - 1])
                       : fermat_point_l2(pts[i - 1], pts[i + 1], hs[i - 1]);
    pts[k] = project(pts[k - 1], hs[k - 1]);
    double cost = path_cost_euclid(pts, squared);
    if (prev - cost < 1e-13 * std::max(1.0, cost)) {
      converged = true;
      break;
    }
    prev = cost;
  }
  snap_path(pts, hs);
  return {pts, path_cost_euclid(pts, squared), converged};
}

std::vector<Vec> greedy_points(const Vec& x0, const std::vector<Halfspace>& hs) {
  std::vector<Vec> pts{x0};
  for (const Halfspace& h : hs) pts.push_back(project(pts.back(), h));
  return pts;
}

ManipulationPath sequential_euclidean(const Vec& x0, const std::vector<Halfspace>& hs,
                                      bool squared, std::uint64_t seed) {
  const std::size_t k = hs.size();
  ManipulationPath best;
  best.cost = std::numeric_limits<double>::infinity();

  if (k == 1) {
    best.points = {x0, project(x0, hs[0])};
    snap_path(best.points, hs);
    best.cost = path_cost_euclid(best.points, squared);
    best.converged = true;
    return best;
  }

  std::vector<std::vector<Vec>> starts;
  starts.push_back(greedy_points(x0, hs));
  std::optional<Vec> conj = project_onto_intersection(x0, hs);
  if (conj) starts.push_back(std::vector<Vec>(k + 1, *conj));
  if (conj) {
    // The one-shot move is itself a valid sequential strategy; keep it as a
    // candidate so the sequential cost can never exceed the conjunction cost.
    ManipulationPath oneshot;
    oneshot.points.assign(k + 1, *conj);
    oneshot.points[0] = x0;
    snap_path(oneshot.points, hs);
    oneshot.cost = path_cost_euclid(oneshot.points, squared);
    oneshot.converged = true;
    best = oneshot;
  }
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL);
  double scale = 0.25 * (1.0 + norm2(x0));
  while (starts.size() < 8) {
    std::vector<Vec> s = starts[starts.size() % 2 == 0 && conj ? 1 : 0];
    for (std::size_t i = 1; i < s.size(); ++i)
      for (double& c : s[i]) c += rng.uniform(-scale, scale);
    starts.push_back(std::move(s));
  }
  for (auto& start : starts) {
    start[0] = x0;  // the agent's initial features are fixed
    CdOutcome out = coordinate_descent(start, hs, squared);
    if (out.cost < best.cost) {
      best.points = out.points;
      best.cost = out.cost;
      best.converged = out.converged;
    }
  }
  return best;
}

}  // namespace

ConjunctionResult conjunction_best_response(const Vec& x0, const std::vector<Halfspace>& hs,
                                            const CostSpec& cost) {
  if (hs.empty()) return {x0, 0.0};
  for (const Halfspace& h : hs)
    if (h.dim() != x0.size())
      throw std::invalid_argument("conjunction_best_response: dimension mismatch");
  switch (cost.kind) {
    case CostKind::l2: {
      std::optional<Vec> z = project_onto_intersection(x0, hs);
      if (!z)
        throw std::runtime_error("conjunction_best_response: intersection of positive regions is empty");
      return {*z, norm2(vec_sub(*z, x0))};
    }
    case CostKind::quadratic: {
      QuadTransform t = make_transform(hs, cost.quad_form);
      std::optional<Vec> zp = project_onto_intersection(t.to_prime(x0), t.hs);
      if (!zp)
        throw std::runtime_error("conjunction_best_response: intersection of positive regions is empty");
      Vec z = t.from_prime(*zp);
      snap_point(z, hs);
      return {z, step_cost(x0, z, cost)};
    }
    case CostKind::l1:
    case CostKind::linf:
      return conjunction_lp(x0, hs, cost.kind);
  }
  throw std::invalid_argument("conjunction_best_response: unsupported cost");
}

ManipulationPath sequential_best_response(const Vec& x0, const std::vector<Halfspace>& hs,
                                          const CostSpec& cost, std::uint64_t seed) {
  if (hs.empty()) {
    ManipulationPath p;
    p.points = {x0};
    return p;
  }
  for (const Halfspace& h : hs)
    if (h.dim() != x0.size())
      throw std::invalid_argument("sequential_best_response: dimension mismatch");
  switch (cost.kind) {
    case CostKind::l2:
      return sequential_euclidean(x0, hs, false, seed);
    case CostKind::quadratic: {
      QuadTransform t = make_transform(hs, cost.quad_form);
      ManipulationPath prime = sequential_euclidean(t.to_prime(x0), t.hs, true, seed);
      ManipulationPath out;
      out.converged = prime.converged;
      for (const Vec& p : prime.points) out.points.push_back(t.from_prime(p));
      snap_path(out.points, hs);
      out.cost = out.recompute_cost(cost);
      return out;
    }
    case CostKind::l1:
    case CostKind::linf:
      return sequential_lp(x0, hs, cost.kind);
  }
  throw std::invalid_argument("sequential_best_response: unsupported cost");
}

ManipulationPath sequential_closed_form_2d(const Vec& x0, const Halfspace& h1, const Halfspace& h2) {
  if (x0.size() != 2 || h1.dim() != 2 || h2.dim() != 2)
    throw std::invalid_argument("sequential_closed_form_2d: requires d = 2");

  ManipulationPath path;
  if (h1.passes(x0)) {  // R1: stay for the first test, project onto the second
    path.points = {x0, x0, project(x0, h2)};
    path.closed_form_case = 1;
    snap_path(path.points, {h1, h2});
    path.cost = path.recompute_cost();
    return path;
  }
  Vec p1 = project(x0, h1);
  if (h2.passes(p1)) {  // R4: one projection passes both in sequence
    path.points = {x0, p1, p1};
    path.closed_form_case = 4;
    snap_path(path.points, {h1, h2});
    path.cost = path.recompute_cost();
    return path;
  }

  double cos_theta = -dot(h1.normal, h2.normal);
  double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
  if (sin_theta <= 1e-10)
    throw std::invalid_argument("sequential_closed_form_2d: classifiers are parallel");

  // Intersection point of the two boundary lines.
  double det = h1.normal[0] * h2.normal[1] - h1.normal[1] * h2.normal[0];
  Vec inter{(h1.offset * h2.normal[1] - h2.offset * h1.normal[1]) / det,
            (h1.normal[0] * h2.offset - h2.normal[0] * h1.offset) / det};

  Vec shifted = vec_sub(x0, inter);
  double d1 = distance(x0, h1);                    // > 0 here
  Vec foot = vec_sub(p1, inter);                   // P_{w1}(x') in shifted coordinates
  double foot_norm = norm2(foot);
  double tan_abs = std::fabs(cos_theta) < 1e-300 ? std::numeric_limits<double>::infinity()
                                                 : sin_theta / std::fabs(cos_theta);

  if (foot_norm == 0.0 || tan_abs >= foot_norm / d1) {
    // R3: travel straight to the intersection of the two boundaries.
    path.points = {x0, inter, inter};
    path.closed_form_case = 3;
    snap_path(path.points, {h1, h2});
    path.cost = norm2(shifted);
    return path;
  }

  // R2: zig-zag. First hop lands on h1's boundary short of the intersection.
  Vec x1 = vec_add(inter, vec_scale(foot, 1.0 - d1 * tan_abs / foot_norm));
  Vec x2 = project(x1, h2);
  path.points = {x0, x1, x2};
  path.closed_form_case = 2;
  snap_path(path.points, {h1, h2});
  path.cost = d1 * std::fabs(cos_theta) + foot_norm * sin_theta;
  return path;
}

double sequential_cost_2d(const Vec& x0, const Halfspace& h1, const Halfspace& h2) {
  try {
    return sequential_closed_form_2d(x0, h1, h2).cost;
  } catch (const std::invalid_argument&) {
    return sequential_best_response(x0, {h1, h2}).cost;
  }
}

ManipulationPath greedy_response(const Vec& x0, const std::vector<Halfspace>& hs) {
  ManipulationPath path;
  path.points = greedy_points(x0, hs);
  snap_path(path.points, hs);
  path.cost = path.recompute_cost();
  return path;
}

}  // namespace fairscreen
