#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ordcut/hausdorff.hpp"

using namespace ordcut;

namespace {

IntervalFn degenerate(const Grid& g, const std::function<double(double)>& f) {
  IntervalFn out;
  out.grid = g;
  out.cells.resize(g.size());
  for (size_t i = 0; i < g.size(); ++i) out.cells[i] = Interval::point(f(g.coord(i)[0]));
  return out;
}

IntervalFn heaviside(const Grid& g, size_t k) {
  IntervalFn out;
  out.grid = g;
  out.cells.resize(g.size());
  for (size_t i = 0; i < g.size(); ++i) out.cells[i] = Interval::point(i < k ? 0.0 : 1.0);
  return out;
}

PiecewiseFn sampled(const Grid& g, const std::function<double(double)>& f) {
  PiecewiseFn u;
  u.grid = g;
  u.values.resize(g.size());
  u.mask = SingularMask(g.size());
  for (size_t i = 0; i < g.size(); ++i) u.values[i] = f(g.coord(i)[0]);
  return u;
}

}  // namespace

TEST_CASE("envelopes: examples") {
  Grid g({0.0}, {1.0}, {11});
  IntervalFn c = degenerate(g, [](double) { return 3.25; });
  CHECK(lower_envelope(c).cells == c.cells);
  CHECK(upper_envelope(c).cells == c.cells);

  IntervalFn h = heaviside(g, 5);
  CHECK(lower_envelope(h).cells[5].lo == doctest::Approx(0.0).epsilon(0));
  CHECK(upper_envelope(h).cells[5].hi == doctest::Approx(1.0).epsilon(0));
  CHECK(upper_envelope(h).cells[4].hi == doctest::Approx(1.0).epsilon(0));

  IntervalFn spike = degenerate(g, [](double) { return 0.0; });
  spike.cells[6] = Interval::point(5.0);
  CHECK(lower_envelope(spike).cells[6].lo == doctest::Approx(0.0).epsilon(0));
}

TEST_CASE("graph_complete: continuous samples unchanged") {
  Grid g({0.0}, {1.0}, {33});
  IntervalFn s = degenerate(g, [](double x) { return std::sin(6.0 * x); });
  IntervalFn fix = graph_complete(s);
  for (size_t i = 0; i < g.size(); ++i) {
    CHECK(fix.cells[i] == s.cells[i]);
    CHECK(fix.cells[i].degenerate());
  }
}

TEST_CASE("graph_complete: Heaviside widens exactly the jump node") {
  Grid g({0.0}, {1.0}, {11});
  IntervalFn h = heaviside(g, 5);
  IntervalFn fix = graph_complete(h);
  CHECK(fix.cells[5].lo == doctest::Approx(0.0).epsilon(0));
  CHECK(fix.cells[5].hi == doctest::Approx(1.0).epsilon(0));
  for (size_t i = 0; i < g.size(); ++i)
    if (i != 5) CHECK(fix.cells[i].degenerate());
  CHECK(is_hcontinuous(fix).ok);
}

TEST_CASE("graph_complete: idempotent on random inputs") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int iter = 0; iter < 25; ++iter) {
    Grid g({0.0}, {1.0}, {17});
    IntervalFn f;
    f.grid = g;
    f.cells.resize(g.size());
    for (auto& c : f.cells) {
      double a = dist(rng), b = dist(rng);
      c = {std::min(a, b), std::max(a, b)};
    }
    // Sprinkle degenerate nodes so the input resembles a sampled function.
    for (size_t i = 0; i < g.size(); i += 2) f.cells[i] = Interval::point(dist(rng));
    IntervalFn once = graph_complete(f);
    IntervalFn twice = graph_complete(once);
    CHECK(once.cells == twice.cells);
  }
}

TEST_CASE("is_hcontinuous: examples") {
  Grid g({0.0}, {1.0}, {9});
  IntervalFn s = degenerate(g, [](double x) { return x; });
  CHECK(is_hcontinuous(s).ok);

  IntervalFn wide;
  wide.grid = g;
  wide.cells.assign(g.size(), Interval{0.0, 1.0});
  HContinuityReport rep = is_hcontinuous(wide);
  CHECK(!rep.ok);
  CHECK(rep.witness == 0);

  CHECK(is_hcontinuous(graph_complete(heaviside(g, 4))).ok);
  // Pre-completion Heaviside is not a fixpoint.
  CHECK(!is_hcontinuous(heaviside(g, 4)).ok);
}

TEST_CASE("sup/inf family: examples") {
  Grid g({-1.0}, {1.0}, {21});
  PiecewiseFn zero = sampled(g, [](double) { return 0.0; });
  PiecewiseFn one = sampled(g, [](double) { return 1.0; });
  IntervalFn s = sup_family({zero, one});
  for (const auto& c : s.cells) {
    CHECK(c.degenerate());
    CHECK(c.lo == doctest::Approx(1.0).epsilon(0));
  }
  IntervalFn i = inf_family({zero, one});
  for (const auto& c : i.cells) CHECK(c.lo == doctest::Approx(0.0).epsilon(0));

  PiecewiseFn x = sampled(g, [](double t) { return t; });
  PiecewiseFn mx = sampled(g, [](double t) { return -t; });
  IntervalFn vee = sup_family({x, mx});
  for (size_t id = 0; id < g.size(); ++id)
    CHECK(vee.cells[id].hi == doctest::Approx(std::fabs(g.coord(id)[0])));

  // Singleton family = embedding of the piecewise function.
  PiecewiseFn masked = x;
  masked.mask.mark(10);
  IntervalFn emb = embed(masked);
  IntervalFn single = sup_family({masked});
  CHECK(emb.cells == single.cells);

  CHECK_THROWS_AS(sup_family({}), std::invalid_argument);
}

TEST_CASE("sup_family is an upper bound; lattice law on unions") {
  // Affine families with slopes in [1,2]: adjacent gap ratios stay below the
  // jump threshold, so the sup is the raw nodewise sup and the laws are exact.
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> slope(1.0, 2.0), icpt(-2.0, 2.0);
  Grid g({0.0}, {1.0}, {17});
  auto rand_fn = [&]() {
    double b = slope(rng), a = icpt(rng);
    return sampled(g, [a, b](double x) { return a + b * x; });
  };
  for (int iter = 0; iter < 20; ++iter) {
    std::vector<PiecewiseFn> A, B, AB;
    for (int i = 0; i < 3; ++i) A.push_back(rand_fn());
    for (int i = 0; i < 3; ++i) B.push_back(rand_fn());
    AB = A;
    AB.insert(AB.end(), B.begin(), B.end());
    IntervalFn sa = sup_family(A), sb = sup_family(B), sab = sup_family(AB);
    for (size_t id = 0; id < g.size(); ++id) {
      for (const auto& u : A) CHECK(u.values[id] <= sa.cells[id].lo);
      CHECK(sab.cells[id].hi ==
            doctest::Approx(std::max(sa.cells[id].hi, sb.cells[id].hi)).epsilon(0));
    }
  }
}
