#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "ordcut/bench.hpp"
#include "ordcut/solver.hpp"

using namespace ordcut;

namespace {

MultiIndex mi(std::vector<int> e) { return MultiIndex(std::move(e)); }

const FieldFn kFive = [](std::span<const double>) { return 5.0; };
const FieldFn kZero = [](std::span<const double>) { return 0.0; };

}  // namespace

TEST_CASE("local patches: identity operator hits the band midpoint") {
  OperatorSpec op = parse("u = f", {"x"});
  const double eps = 0.1;
  SolverParams params;
  SeedJet seed = {{mi({0}), 4.0}};
  LocalPatch sub = local_subsolution(op, kFive, {0.5}, eps, seed, params, 1e-3);
  CHECK(sub.poly.coeff(mi({0})) == doctest::Approx(4.95).epsilon(1e-12));
  CHECK(sub.radius == doctest::Approx(params.radius_cap).epsilon(0));
  CHECK(sub.defect_min == doctest::Approx(-0.05).epsilon(1e-10));
  CHECK(sub.defect_max == doctest::Approx(-0.05).epsilon(1e-10));
  CHECK(sub.side == Side::Sub);

  LocalPatch sup = local_supersolution(op, kFive, {0.5}, eps, seed, params, 1e-3);
  CHECK(sup.poly.coeff(mi({0})) == doctest::Approx(5.05).epsilon(1e-12));
  CHECK(sup.defect_min == doctest::Approx(0.05).epsilon(1e-10));
}

TEST_CASE("local patches: bisection solves u^3 = f to full precision") {
  OperatorSpec op = parse("u^3 = f", {"x"});
  const double eps = 0.2;
  SolverParams params;
  FieldFn two = [](std::span<const double>) { return 2.0; };
  SeedJet seed = {{mi({0}), 1.0}};
  LocalPatch sub = local_subsolution(op, two, {0.0}, eps, seed, params, 1e-3);
  CHECK(std::fabs(sub.poly.coeff(mi({0})) - std::cbrt(1.9)) <= 1e-10);
  LocalPatch sup = local_supersolution(op, two, {0.0}, eps, seed, params, 1e-3);
  CHECK(std::fabs(sup.poly.coeff(mi({0})) - std::cbrt(2.1)) <= 1e-10);
}

TEST_CASE("local patches: Laplacian with constant f solves the head coefficient") {
  OperatorSpec op = parse("dxx(u) + dyy(u) = f");
  const double c = 3.0, eps = 0.1;
  FieldFn f = [c](std::span<const double>) { return c; };
  SolverParams params;
  SeedJet seed = {{mi({0, 2}), 0.0}};
  LocalPatch p = local_subsolution(op, f, {0.5, 0.5}, eps, seed, params, 1e-3);
  CHECK(p.solved_for == mi({2, 0}));
  CHECK(p.poly.coeff(mi({2, 0})) == doctest::Approx(c - eps / 2).epsilon(1e-12));
  // T P is constant, so the radius never shrinks from the cap.
  CHECK(p.radius == doctest::Approx(params.radius_cap).epsilon(0));
  Eval tp = eval_patch_operator(op, p.poly, std::vector<double>{0.6, 0.4});
  REQUIRE(tp.ok());
  CHECK(tp.value == doctest::Approx(c - eps / 2).epsilon(1e-12));
}

TEST_CASE("local patches: unreachable target raises NoBracketError") {
  OperatorSpec op = parse("u^2 = f", {"x"});
  FieldFn neg = [](std::span<const double>) { return -5.0; };
  SolverParams params;
  SeedJet seed = {{mi({0}), 1.0}};
  CHECK_THROWS_AS(local_subsolution(op, neg, {0.0}, 0.1, seed, params, 1e-3),
                  NoBracketError);
}

TEST_CASE("local patches: steep defect under tight eps raises RadiusUnderflowError") {
  // dt(u) = u^2 at u = 10: the defect slope ~2000 forces delta ~ eps/2000,
  // far below the requested minimum radius.
  OperatorSpec op = parse("dt(u) = u^2");
  SolverParams params;
  SeedJet seed = {{mi({0}), 10.0}, {mi({1}), 100.0}};
  CHECK_THROWS_AS(local_subsolution(op, kZero, {0.5}, 1e-4, seed, params, 1e-3),
                  RadiusUnderflowError);
}

TEST_CASE("local patches: accepted bands re-audit and nest") {
  OperatorSpec op = parse("dt(u) = u^2");
  SolverParams params;
  const double eps = 0.1;
  SeedJet seed = {{mi({0}), 2.0}, {mi({1}), 4.0}};
  LocalPatch p = local_subsolution(op, kZero, {0.3}, eps, seed, params, 1e-3);
  CHECK(p.radius > 0.0);
  // Denser audit at the construction tolerance, and nesting into the 2eps band.
  CHECK(patch_band_ok(op, kZero, p, eps, 10, 1e-9));
  LocalPatch wide = p;
  wide.epsilon = 2 * eps;
  CHECK(patch_band_ok(op, kZero, wide, 2 * eps, 10, 1e-9));
}

TEST_CASE("global_approx: identity with a generous cap is a single patch") {
  OperatorSpec op = parse("u = f", {"x"});
  Grid g({0.0}, {1.0}, {33});
  SolverParams params;
  params.radius_cap = 10.0;
  GlobalResult res = global_approx(op, kFive, 0.1, g, Side::Sub, {}, params);
  CHECK(res.stats.patches == 1);
  CHECK(res.stats.gamma_fraction == doctest::Approx(0.0).epsilon(0));
  CHECK(res.stats.pass_fraction == doctest::Approx(1.0).epsilon(0));
  for (size_t id = 0; id < g.size(); ++id) {
    REQUIRE(res.fn.defined(id));
    CHECK(res.fn.values[id] == doctest::Approx(4.95).epsilon(1e-12));
    CHECK(res.owner[id] == 0);
  }
}

TEST_CASE("global_approx: Riccati discrete band holds with pin at t=0") {
  OperatorSpec op = parse("dt(u) = u^2");
  Grid g({0.0}, {0.9}, {257});
  const double eps = 0.05;
  SolverParams params;
  std::vector<Pin> pins = {{{0.0}, 1.0}};
  GlobalResult res = global_approx(op, kZero, eps, g, Side::Sub, pins, params);
  CHECK(res.stats.pins_applied == 1);
  CHECK(std::fabs(res.fn.values[0] - 1.0) <= 0.5 * eps + 1e-12);

  PiecewiseFn Tu = apply_operator(op, res.fn);
  auto allow = truncation_allowance(g, res.fn, params.allow_factor, &op);
  size_t defined = 0, pass = 0;
  for (size_t id = 0; id < g.size(); ++id) {
    if (!Tu.defined(id)) continue;
    ++defined;
    double d = Tu.values[id];
    if (d >= -eps - allow[id] - 1e-9 && d <= allow[id] + 1e-9) ++pass;
  }
  REQUIRE(defined > 200);
  CHECK(pass == defined);
}

TEST_CASE("refine_cut: identity solution converges to the cut") {
  OperatorSpec op = parse("u = f", {"x"});
  Grid g({0.0}, {1.0}, {33});
  SolverParams params;
  CutSolution cut = refine_cut(op, kFive, g, 0.4, 3, {}, params);
  REQUIRE(cut.complete);
  REQUIRE(cut.epsilons.size() == 4);
  CHECK(cut.epsilons.back() == doctest::Approx(0.05).epsilon(0));
  CHECK(std::fabs(cut.image_defect - 0.025) <= 1e-12);
  for (size_t id = 0; id < g.size(); ++id) {
    CHECK(cut.lower.cells[id].degenerate());
    CHECK(cut.lower.cells[id].lo == doctest::Approx(4.975).epsilon(1e-12));
    CHECK(cut.upper.cells[id].hi == doctest::Approx(5.025).epsilon(1e-12));
  }
}

TEST_CASE("refine_cut: infeasible problems report failure without throwing") {
  OperatorSpec op = parse("u^2 = f", {"x"});
  FieldFn neg = [](std::span<const double>) { return -5.0; };
  Grid g({0.0}, {1.0}, {17});
  SolverParams params;
  CutSolution cut = refine_cut(op, neg, g, 0.4, 2, {}, params);
  CHECK(!cut.complete);
  CHECK(!cut.failure.empty());
}

TEST_CASE("global_approx is bitwise deterministic") {
  OperatorSpec op = parse("dt(u) = u^2");
  Grid g({0.0}, {0.9}, {129});
  SolverParams params;
  std::vector<Pin> pins = {{{0.0}, 1.0}};
  GlobalResult a = global_approx(op, kZero, 0.1, g, Side::Sub, pins, params);
  GlobalResult b = global_approx(op, kZero, 0.1, g, Side::Sub, pins, params);
  REQUIRE(a.fn.values.size() == b.fn.values.size());
  CHECK(std::memcmp(a.fn.values.data(), b.fn.values.data(),
                    a.fn.values.size() * sizeof(double)) == 0);
  CHECK(a.owner == b.owner);
  CHECK(a.stats.patches == b.stats.patches);
}
