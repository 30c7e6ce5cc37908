#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fairscreen/rng.hpp"
#include "fairscreen/strategic.hpp"

using namespace fairscreen;

namespace {

Halfspace zz_h1() { return Halfspace({-3.0, 4.0}, 1.0); }
Halfspace zz_h2() { return Halfspace({1.0, 0.0}, 1.0); }

bool path_feasible(const ManipulationPath& path, const std::vector<Halfspace>& hs) {
  if (path.points.size() != hs.size() + 1) return false;
  for (std::size_t i = 1; i < path.points.size(); ++i)
    if (!hs[i - 1].passes(path.points[i])) return false;
  return true;
}

}  // namespace

TEST_CASE("halfspace normalization, projection, distance") {
  Halfspace h({-3.0, 4.0}, 1.0);  // 4 x2 - 3 x1 >= 1, normalized
  CHECK(norm2(h.normal) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(h.offset == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(distance({0.0, 0.0}, h) == doctest::Approx(0.2).epsilon(1e-15));

  Halfspace axis({1.0, 0.0}, 1.0);
  Vec p = project({0.0, 0.0}, axis);
  CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p[1] == 0.0);
  CHECK(distance({0.0, 0.0}, axis) == doctest::Approx(1.0).epsilon(1e-15));

  Vec inside{2.0, 2.0};
  CHECK(project(inside, axis) == inside);
  CHECK(distance(inside, axis) == 0.0);
  CHECK_THROWS_AS(Halfspace({0.0, 0.0}, 1.0), std::invalid_argument);
}

TEST_CASE("feature monotonicity check") {
  CHECK(is_feature_monotone(Halfspace({1.0, 0.0}, 0.5)));
  CHECK(is_feature_monotone(Halfspace({0.6, 0.8}, -2.0)));
  CHECK_FALSE(is_feature_monotone(Halfspace({-3.0, 4.0}, 1.0)));
}

TEST_CASE("conjunction best response: zig-zag instance") {
  auto res = conjunction_best_response({0.0, 0.0}, {zz_h1(), zz_h2()});
  CHECK(res.cost == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(res.point[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(res.point[1] == doctest::Approx(1.0).epsilon(1e-9));

  Vec inside{2.0, 2.0};
  auto stay = conjunction_best_response(inside, {zz_h1(), zz_h2()});
  CHECK(stay.cost == 0.0);
  CHECK(stay.point == inside);
}

TEST_CASE("conjunction cost gap construction (gamma = 3)") {
  double gamma = 3.0;
  Halfspace h1({1.0 / gamma, 1.0}, 1.0), h2({1.0 / gamma, -1.0}, 1.0);
  auto res = conjunction_best_response({0.0, 0.0}, {h1, h2});
  CHECK(res.cost >= gamma - 1e-9);
  CHECK(res.point[0] >= gamma - 1e-9);

  ManipulationPath seq = sequential_best_response({0.0, 0.0}, {h1, h2});
  CHECK(seq.cost <= 3.0 + 1e-9);
  CHECK(path_feasible(seq, {h1, h2}));
}

TEST_CASE("conjunction: empty intersection raises") {
  Halfspace a({1.0, 0.0}, 1.0), b({-1.0, 0.0}, 0.0);  // x >= 1 and x <= 0
  CHECK_THROWS_AS(conjunction_best_response({0.0, 0.0}, {a, b}), std::runtime_error);
  CHECK_THROWS_AS(conjunction_best_response({0.0, 0.0}, {a, b}, CostSpec::l1()),
                  std::runtime_error);
}

TEST_CASE("sequential numeric solver on the zig-zag instance") {
  ManipulationPath path = sequential_best_response({0.0, 0.0}, {zz_h1(), zz_h2()});
  CHECK(path.cost == doctest::Approx(31.0 / 25.0).epsilon(1e-7));
  CHECK(path.converged);
  CHECK(path_feasible(path, {zz_h1(), zz_h2()}));
  CHECK(path.recompute_cost() == doctest::Approx(path.cost).epsilon(1e-9));

  // an agent already past every classifier stays put for free
  Vec inside{2.0, 2.0};
  ManipulationPath stay = sequential_best_response(inside, {zz_h1(), zz_h2()});
  CHECK(stay.cost == 0.0);
  for (const Vec& p : stay.points) CHECK(p == inside);
}

TEST_CASE("sequential closed form: cases and costs") {
  Halfspace h1 = zz_h1(), h2 = zz_h2();

  ManipulationPath r2 = sequential_closed_form_2d({0.0, 0.0}, h1, h2);
  CHECK(r2.closed_form_case == 2);
  CHECK(r2.cost == doctest::Approx(31.0 / 25.0).epsilon(1e-12));
  CHECK(path_feasible(r2, {h1, h2}));

  // already past h1: stay, then project
  Vec x0{0.0, 1.0};
  REQUIRE(h1.passes(x0));
  ManipulationPath r1 = sequential_closed_form_2d(x0, h1, h2);
  CHECK(r1.closed_form_case == 1);
  CHECK(r1.cost == doctest::Approx(distance(x0, h2)).epsilon(1e-12));
  CHECK(r1.points[1] == x0);

  // projection onto h1 already passes h2
  Vec far_right{3.0, -1.0};
  REQUIRE_FALSE(h1.passes(far_right));
  REQUIRE(h2.passes(project(far_right, h1)));
  ManipulationPath r4 = sequential_closed_form_2d(far_right, h1, h2);
  CHECK(r4.closed_form_case == 4);
  CHECK(r4.cost == doctest::Approx(distance(far_right, h1)).epsilon(1e-12));

  CHECK_THROWS_AS(sequential_closed_form_2d({0.0, 0.0}, Halfspace({1.0, 0.0}, 1.0),
                                            Halfspace({2.0, 0.0}, 3.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(sequential_closed_form_2d({0.0, 0.0, 0.0}, h1, h2), std::invalid_argument);
}

TEST_CASE("theta = pi/2: sequential equals conjunction") {
  Halfspace h1({1.0, 1.0}, 0.4), h2({-1.0, 1.0}, 0.3);
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    Vec x0{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    double seq = sequential_cost_2d(x0, h1, h2);
    double conj = conjunction_best_response(x0, {h1, h2}).cost;
    CHECK(seq == doctest::Approx(conj).epsilon(1e-10));
  }
}

TEST_CASE("greedy response") {
  Halfspace h1 = zz_h1(), h2 = zz_h2();
  ManipulationPath g = greedy_response({0.0, 0.0}, {h1, h2});
  CHECK(path_feasible(g, {h1, h2}));
  // greedy pays the cosine penalty over the optimal zig-zag: gap = (1 - cos t) * r
  double cos_t = -dot(h1.normal, h2.normal);
  double r = distance({0.0, 0.0}, h1);
  double opt = sequential_closed_form_2d({0.0, 0.0}, h1, h2).cost;
  CHECK(g.cost - opt == doctest::Approx((1.0 - cos_t) * r).epsilon(1e-9));
  CHECK(g.cost >= opt - 1e-12);

  Vec inside{2.0, 2.0};
  CHECK(greedy_response(inside, {h1, h2}).cost == 0.0);
}

TEST_CASE("monotone pipelines: no zig-zag advantage for any implemented norm") {
  Rng rng(41);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t d = 2 + static_cast<std::size_t>(rng.uniform_int(0, 1));
    std::size_t k = static_cast<std::size_t>(rng.uniform_int(2, 3));
    std::vector<Halfspace> hs;
    for (std::size_t i = 0; i < k; ++i) {
      Vec w(d);
      for (double& v : w) v = rng.uniform(0.1, 1.0);
      hs.emplace_back(w, rng.uniform(-0.5, 1.0));
    }
    Vec x0(d, -3.0);
    for (CostSpec cost : {CostSpec::l2(), CostSpec::l1(), CostSpec::linf()}) {
      double seq = sequential_best_response(x0, hs, cost, trial).cost;
      double conj = conjunction_best_response(x0, hs, cost).cost;
      CHECK(std::fabs(seq - conj) <= 1e-8);
    }
  }
}

TEST_CASE("sequential cost never exceeds conjunction cost") {
  Rng rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t d = 2 + static_cast<std::size_t>(rng.uniform_int(0, 1));
    std::size_t k = static_cast<std::size_t>(rng.uniform_int(1, 3));
    std::vector<Halfspace> hs;
    for (std::size_t i = 0; i < k; ++i) {
      Vec w(d);
      for (double& v : w) v = rng.uniform(-1.0, 1.0);
      if (norm2(w) < 1e-2) w[0] = 1.0;
      hs.emplace_back(w, rng.uniform(-1.0, 1.0));
    }
    Vec x0(d);
    for (double& v : x0) v = rng.uniform(-2.0, 2.0);
    double conj;
    try {
      conj = conjunction_best_response(x0, hs).cost;
    } catch (const std::runtime_error&) {
      continue;
    }
    double seq = sequential_best_response(x0, hs, CostSpec::l2(), trial).cost;
    CHECK(seq <= conj + 1e-12);
  }
}

TEST_CASE("quadratic-form costs through the generic solver") {
  std::vector<std::vector<double>> a{{2.0, 0.3}, {0.3, 1.0}};
  CostSpec cost = CostSpec::quadratic(a);
  Halfspace h1({1.0, 0.0}, 1.0), h2({0.0, 1.0}, 1.0);

  // single halfspace: KKT closed form z = x + (b - w.x) A^{-1} w / (w' A^{-1} w)
  Vec x0{0.0, 0.0};
  auto res = conjunction_best_response(x0, {h1}, cost);
  // A^{-1} = (1/1.91) [[1, -0.3], [-0.3, 2]]; lambda = b / (w' A^{-1} w)
  double lam = 1.0 / (1.0 / 1.91);
  Vec expect{lam * (1.0 / 1.91), lam * (-0.3 / 1.91)};
  CHECK(res.point[0] == doctest::Approx(expect[0]).epsilon(1e-9));
  CHECK(res.point[1] == doctest::Approx(expect[1]).epsilon(1e-9));

  double seq = sequential_best_response(x0, {h1, h2}, cost, 3).cost;
  double conj = conjunction_best_response(x0, {h1, h2}, cost).cost;
  CHECK(seq <= conj + 1e-9);  // squared costs: zig-zag can only help

  CHECK_THROWS_AS(conjunction_best_response(x0, {h1}, CostSpec::quadratic({{1.0, 2.0}, {0.0, 1.0}})),
                  std::invalid_argument);
}

TEST_CASE("conjunction points are feasible for every classifier exactly") {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t d = 2 + static_cast<std::size_t>(rng.uniform_int(0, 2));
    std::size_t k = static_cast<std::size_t>(rng.uniform_int(1, 4));
    std::vector<Halfspace> hs;
    for (std::size_t i = 0; i < k; ++i) {
      Vec w(d);
      for (double& v : w) v = rng.uniform(-1.0, 1.0);
      if (norm2(w) < 1e-2) w[0] = 1.0;
      hs.emplace_back(w, rng.uniform(-1.0, 1.0));
    }
    Vec x0(d);
    for (double& v : x0) v = rng.uniform(-2.0, 2.0);
    for (CostSpec cost : {CostSpec::l2(), CostSpec::l1(), CostSpec::linf()}) {
      try {
        ConjunctionResult res = conjunction_best_response(x0, hs, cost);
        for (const Halfspace& h : hs) CHECK(h.passes(res.point));
      } catch (const std::runtime_error&) {  // empty intersection
      }
    }
  }
}

TEST_CASE("paths recompute their cost and stay feasible after snapping") {
  Rng rng(47);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Halfspace> hs;
    std::size_t k = static_cast<std::size_t>(rng.uniform_int(1, 3));
    for (std::size_t i = 0; i < k; ++i) {
      Vec w{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      if (norm2(w) < 1e-2) w[0] = 1.0;
      hs.emplace_back(w, rng.uniform(-1.0, 1.0));
    }
    Vec x0{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    ManipulationPath path = sequential_best_response(x0, hs, CostSpec::l2(), trial);
    CHECK(path_feasible(path, hs));
    CHECK(path.recompute_cost() == doctest::Approx(path.cost).epsilon(1e-9));
    ManipulationPath greedy = greedy_response(x0, hs);
    CHECK(path_feasible(greedy, hs));
    CHECK(path.cost <= greedy.cost + 1e-12);
  }
}
