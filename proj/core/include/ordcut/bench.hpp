#ifndef ORDCUT_BENCH_HPP
#define ORDCUT_BENCH_HPP

#include <optional>
#include <string>
#include <vector>

#include "ordcut/solver.hpp"

namespace ordcut {

/// One benchmark problem: an operator, a right-hand field, a default grid,
/// pin constraints, and an independent oracle for the solution.
struct BenchmarkCase {
  std::string name;
  std::string equation;            // operator source text
  std::vector<std::string> coords; // declared coordinate names
  OperatorSpec op;
  FieldFn f;
  Grid default_grid;
  std::vector<Pin> pins;
  /// Regenerates the pin set for a non-default grid (data lines and boundary
  /// conditions are known everywhere, not just at default-grid nodes).
  std::function<std::vector<Pin>(const Grid&)> pin_generator;
  FieldFn oracle;                  // null when the case has no closed form
  std::string oracle_kind;         // "closed_form" | "characteristics" | "none"
  double eps0 = 0.4;
  int levels = 4;
  SolverParams params;
  bool fit_shock = false;          // extract a shock locus from Gamma
};

std::vector<BenchmarkCase> builtin_cases();
std::optional<BenchmarkCase> find_case(const std::string& name);

/// Glimm-scheme value predictor for 2-D conservation-form transport
/// (u_t + u u_x): exact evolution of the previous grid row, sampled at van
/// der Corput points. Used by the Burgers case; available to problem files
/// via `predictor = glimm`.
SeedValueHook glimm_predictor();

/// Per-node truncation allowance for second-order central differences.
/// With an operator given, only the derivative orders it actually uses
/// contribute: a first derivative along axis a adds factor * h_a^2 |D_a^3 u|/6,
/// a second derivative adds factor * h_a^2 |D_a^4 u|/12 (higher per-axis
/// orders fall back to the fourth-difference estimate). Without an operator,
/// both terms are summed on every axis. The higher differences are estimated
/// from u itself, clamped to the interior near the boundary.
std::vector<double> truncation_allowance(const Grid& g, const PiecewiseFn& u,
                                         double factor,
                                         const OperatorSpec* op = nullptr);

/// Nodewise min over the lattice ball of the given radius. Applied to a
/// truncation allowance before auditing untrusted candidates: an isolated
/// spike inflates its own difference-based allowance, but not that of nodes
/// a few steps away, so the minimum stays honest.
std::vector<double> min_window(const Grid& g, const std::vector<double>& v,
                               int radius);

struct CaseReport {
  std::string name;
  bool solver_complete = false;
  std::string failure;
  double eps_final = 0.0;
  double image_defect = 0.0;
  double pass_fraction = 0.0;        // min over sides at the finest level
  double gamma_fraction = 0.0;       // max over sides at the finest level
  size_t patches = 0;
  size_t singletons = 0;
  // Oracle checks (NaN when the case has no oracle).
  double oracle_residual_max = 0.0;  // max |T u* - f| off the collar
  bool oracle_self_consistent = false;
  double containment_fraction = 0.0; // T u* within f +- (eps_K + allow)
  // Grid-doubling check.
  double gamma_fraction_doubled = -1.0;
  bool gamma_nonincreasing = false;
  bool gamma_nowhere_dense = false;
  // Shock fit (Burgers only).
  double shock_speed = 0.0;
  size_t shock_rows = 0;
  CutSolution cut;
};

/// Run one case end to end: oracle self-consistency gate, refine_cut, band
/// and Gamma audits, oracle containment, one grid doubling for the Gamma
/// decay check. Solver errors land in the report, never escape.
CaseReport run_case(const BenchmarkCase& bc, const Grid* grid_override,
                    double eps0, int levels, double allow_factor,
                    bool with_doubling = true);

/// Per-case pass/fail thresholds used by the bench suite (named check,
/// passed). The suite passes iff every check of every case passes.
std::vector<std::pair<std::string, bool>> acceptance_checks(const CaseReport& rep);

}  // namespace ordcut

#endif
