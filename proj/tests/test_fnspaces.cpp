#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ordcut/expr.hpp"
#include "ordcut/fnspaces.hpp"

using namespace ordcut;

namespace {

PiecewiseFn constant_fn(const Grid& g, double c, int smooth = 2) {
  PiecewiseFn u;
  u.grid = g;
  u.values.assign(g.size(), c);
  u.mask = SingularMask(g.size());
  u.smoothness = smooth;
  return u;
}

}  // namespace

TEST_CASE("natural_leq examples") {
  Grid g({0.0}, {1.0}, {11});
  PiecewiseFn zero = constant_fn(g, 0.0);
  PiecewiseFn one = constant_fn(g, 1.0);
  CHECK(natural_leq(zero, one));
  CHECK(!natural_leq(one, zero));

  // u = v off the union of masks is reflexive even with different masks.
  PiecewiseFn a = sample_onto(g, [](std::span<const double> x) { return x[0]; }, 2);
  PiecewiseFn b = a;
  a.mask.mark(3);
  b.mask.mark(7);
  b.values[3] = 42.0;  // hidden under a's mask
  a.values[7] = -42.0;
  CHECK(natural_leq(a, b));
  CHECK(natural_leq(b, a));

  // x vs x^2 on [0,1]: 0.5 > 0.25.
  PiecewiseFn lin = sample_onto(g, [](std::span<const double> x) { return x[0]; }, 2);
  PiecewiseFn sq =
      sample_onto(g, [](std::span<const double> x) { return x[0] * x[0]; }, 2);
  CHECK(!natural_leq(lin, sq));
  CHECK(natural_leq(sq, lin));

  Grid g2({0.0}, {1.0}, {12});
  PiecewiseFn other = constant_fn(g2, 0.0);
  CHECK_THROWS_AS(natural_leq(zero, other), std::invalid_argument);
}

TEST_CASE("apply_operator: Laplacian exact on quadratics") {
  OperatorSpec lap = parse("dxx(u) + dyy(u) = f");
  Grid g({0.0, 0.0}, {1.0, 1.0}, {17, 17});
  PiecewiseFn u = sample_onto(
      g, [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; }, 2);
  PiecewiseFn Tu = apply_operator(lap, u);
  size_t defined = 0;
  for (size_t id = 0; id < g.size(); ++id) {
    if (!Tu.defined(id)) continue;
    ++defined;
    CHECK(std::fabs(Tu.values[id] - 4.0) <= 1e-9);
  }
  CHECK(defined == 15u * 15u);  // interior only: boundary collar is masked
}

TEST_CASE("apply_operator: Riccati truncation drops ~4x under grid halving") {
  OperatorSpec ric = parse("dt(u) = u^2");
  auto oracle = [](std::span<const double> x) { return 1.0 / (1.0 - x[0]); };
  auto max_resid = [&](int res) {
    Grid g({0.0}, {0.9}, {res});
    PiecewiseFn Tu = apply_operator(ric, sample_onto(g, oracle, 2));
    double worst = 0.0;
    for (size_t id = 0; id < g.size(); ++id)
      if (Tu.defined(id)) worst = std::max(worst, std::fabs(Tu.values[id]));
    return worst;
  };
  double coarse = max_resid(129);
  double fine = max_resid(257);
  CHECK(coarse > 0.0);
  double ratio = coarse / fine;
  CHECK(ratio > 3.0);  // O(h^2): ~4x, boundary effects allowed for
  CHECK(ratio < 5.0);
}

TEST_CASE("apply_operator: identity restricts to unmarked nodes") {
  OperatorSpec id = parse("u = f", {"x"});
  Grid g({0.0}, {1.0}, {9});
  PiecewiseFn u = sample_onto(g, [](std::span<const double> x) { return 3.0 * x[0]; }, 0);
  u.mask.mark(4);
  PiecewiseFn Tu = apply_operator(id, u);
  for (size_t i = 0; i < g.size(); ++i) {
    if (i == 4) {
      CHECK(!Tu.defined(i));
    } else {
      REQUIRE(Tu.defined(i));
      CHECK(Tu.values[i] == doctest::Approx(u.values[i]).epsilon(0));
    }
  }
}

TEST_CASE("apply_operator: mask dilation by stencil radius plus collar") {
  OperatorSpec dx = parse("dx(u) = f", {"x"});
  Grid g({0.0}, {1.0}, {11});
  PiecewiseFn u = sample_onto(g, [](std::span<const double> x) { return x[0]; }, 1);
  u.mask.mark(5);
  PiecewiseFn Tu = apply_operator(dx, u);
  // Stencil radius 1: nodes 4,5,6 masked; collar masks 0 and 10.
  for (size_t i : {0u, 4u, 5u, 6u, 10u}) CHECK(!Tu.defined(i));
  size_t masked = Tu.mask.count();
  CHECK(masked == 5);
  CHECK(Tu.mask.nowhere_dense(g));
}

TEST_CASE("apply_operator: evaluation fault joins the mask") {
  OperatorSpec op = parse("log(u) = f", {"x"});
  Grid g({0.0}, {1.0}, {5});
  PiecewiseFn u = constant_fn(g, 2.0, 0);
  u.values[2] = -1.0;
  ApplyStats stats;
  PiecewiseFn Tu = apply_operator(op, u, &stats);
  CHECK(!Tu.defined(2));
  CHECK(stats.faults == 1);
  CHECK(Tu.defined(1));
}

TEST_CASE("pullback_leq examples") {
  Grid g({0.0}, {1.0}, {21});
  OperatorSpec dx = parse("dx(u) = f", {"x"});
  PiecewiseFn u = sample_onto(g, [](std::span<const double> x) { return x[0]; }, 1);
  PiecewiseFn v = sample_onto(g, [](std::span<const double> x) { return 2.0 * x[0]; }, 1);
  CHECK(pullback_leq(dx, u, v));
  CHECK(!pullback_leq(dx, v, u));

  // d/dx kills constants: <=_T holds both ways (preorder, not antisymmetric).
  PiecewiseFn w =
      sample_onto(g, [](std::span<const double> x) { return x[0] + 100.0; }, 1);
  CHECK(pullback_leq(dx, u, w));
  CHECK(pullback_leq(dx, w, u));

  OperatorSpec lap = parse("dxx(u) + dyy(u) = f");
  Grid g2({0.0, 0.0}, {1.0, 1.0}, {9, 9});
  PiecewiseFn z2 = constant_fn(g2, 0.0);
  PiecewiseFn q2 = sample_onto(
      g2, [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; }, 2);
  CHECK(pullback_leq(lap, z2, q2));
}

TEST_CASE("SingularMask nowhere-density and fraction") {
  Grid g({0.0}, {1.0}, {9});
  SingularMask m(g.size());
  CHECK(m.nowhere_dense(g));
  CHECK(m.fraction() == doctest::Approx(0.0));
  m.mark(4);
  CHECK(m.nowhere_dense(g));
  CHECK(m.fraction() == doctest::Approx(1.0 / 9.0));
  // Mark a full distance-2 neighborhood: node 4 loses every unmarked witness.
  for (size_t i : {2u, 3u, 5u, 6u}) m.mark(i);
  auto bad = m.nowhere_dense_violation(g);
  REQUIRE(bad.has_value());
  CHECK(*bad == 4);
}

TEST_CASE("fd_derivative_at matches apply_operator jets") {
  Grid g({0.0}, {1.0}, {17});
  std::vector<double> vals(g.size());
  for (size_t i = 0; i < g.size(); ++i) {
    double x = g.coord(i)[0];
    vals[i] = x * x * x;
  }
  // Central first difference of x^3 at interior nodes: 3x^2 + h^2.
  double h = g.spacing(0);
  auto d = fd_derivative_at(g, vals, 8, MultiIndex({1}));
  REQUIRE(d.has_value());
  double x = g.coord(8)[0];
  CHECK(*d == doctest::Approx(3.0 * x * x + h * h).epsilon(1e-10));
  CHECK(!fd_derivative_at(g, vals, 0, MultiIndex({1})).has_value());
  vals[7] = std::numeric_limits<double>::quiet_NaN();
  CHECK(!fd_derivative_at(g, vals, 8, MultiIndex({1})).has_value());
}
