// Microbenchmarks for the hot paths of the solver: operator evaluation,
// polynomial evaluation and jet extraction, one local patch construction, and
// a full finite-difference operator application.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "ordcut/fnspaces.hpp"
#include "ordcut/jets.hpp"
#include "ordcut/solver.hpp"

using namespace ordcut;

namespace {

MultiIndex mi(std::vector<int> e) { return MultiIndex(std::move(e)); }

void BM_EvalOperator(benchmark::State& state) {
  OperatorSpec op = parse("dt(u) + u*dx(u) = 0");
  std::vector<double> x = {0.3, -0.2};
  std::vector<double> jet = {1.5, 0.25, -0.75};
  for (auto _ : state) {
    Eval r = eval_operator(op, x, jet);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_EvalOperator);

void BM_PolyEval(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  JetPolynomial p(std::vector<double>(static_cast<size_t>(n), 0.1), 2);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (const auto& idx : enumerate_multi_indices(n, 2)) p.set_coeff(idx, dist(rng));
  std::vector<double> x(static_cast<size_t>(n), 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(p.eval(x));
}
BENCHMARK(BM_PolyEval)->Arg(1)->Arg(2)->Arg(3);

void BM_JetAt(benchmark::State& state) {
  JetPolynomial p({0.0, 0.0}, 2);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (const auto& idx : enumerate_multi_indices(2, 2)) p.set_coeff(idx, dist(rng));
  std::vector<double> x = {0.3, -0.1};
  for (auto _ : state) {
    auto jet = p.jet_at(x);
    benchmark::DoNotOptimize(jet.data());
  }
}
BENCHMARK(BM_JetAt);

void BM_LocalSubsolution(benchmark::State& state) {
  OperatorSpec op = parse("dt(u) = u^2");
  FieldFn zero = [](std::span<const double>) { return 0.0; };
  SolverParams params;
  SeedJet seed = {{mi({0}), 2.0}, {mi({1}), 4.0}};
  for (auto _ : state) {
    LocalPatch p = local_subsolution(op, zero, {0.3}, 0.1, seed, params, 1e-3);
    benchmark::DoNotOptimize(p.radius);
  }
}
BENCHMARK(BM_LocalSubsolution);

void BM_ApplyOperator(benchmark::State& state) {
  OperatorSpec op = parse("dxx(u) + dyy(u) = f");
  int res = static_cast<int>(state.range(0));
  Grid g({0.0, 0.0}, {1.0, 1.0}, {res, res});
  PiecewiseFn u = sample_onto(
      g,
      [](std::span<const double> x) {
        return std::sin(3.0 * x[0]) * std::cos(2.0 * x[1]);
      },
      2);
  for (auto _ : state) {
    PiecewiseFn Tu = apply_operator(op, u);
    benchmark::DoNotOptimize(Tu.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(g.size()));
}
BENCHMARK(BM_ApplyOperator)->Arg(33)->Arg(65)->Arg(129);

}  // namespace

BENCHMARK_MAIN();
