#ifndef ORDCUT_SOLVER_HPP
#define ORDCUT_SOLVER_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ordcut/expr.hpp"
#include "ordcut/fnspaces.hpp"
#include "ordcut/hausdorff.hpp"
#include "ordcut/jets.hpp"

namespace ordcut {

enum class Side { Sub, Super };

/// Optional predictor for the value entry of a node's seed jet, given the
/// values assembled so far (NaN where not yet stamped). Lets a problem supply
/// a transport scheme for marching without touching the patch machinery.
using SeedValueHook = std::function<std::optional<double>(
    const Grid&, const std::vector<double>& /*values*/, size_t /*id*/)>;

struct SolverParams {
  double radius_cap = 0.25;       // patch radius cap, in domain units
  int samples_per_axis = 5;       // band samples per axis direction
  int retry_budget = 3;           // alternative solve-for coefficients to try
  double band_margin = 0.05;      // inner shrink of the band during delta search
  double comparison_tol = 1e-9;   // tolerance on band comparisons
  int bracket_doublings = 60;
  double jump_ratio = kDefaultJumpRatio;
  double allow_factor = 10.0;     // truncation allowance factor for FD audits
  bool singleton_fallback = true; // cover may keep center-only patches
  bool midpoint_seed = true;      // midpoint predictor when extrapolating seeds
  bool discrete_corrector = true; // march values onto the discrete band midpoint
  int polish_sweeps = 20000;      // relaxation sweep budget for the discrete band
  double polish_omega = 0.0;      // over-relaxation factor; 0 picks it from the grid
  double pin_tol_factor = 0.5;    // pin satisfied within pin_tol_factor * eps
  uint64_t seed = 0;              // audit sample jitter only
  SeedValueHook seed_value;       // problem-supplied value predictor
};

/// One accepted patch of Lemma 5.1 shape: on the ball of `radius` around
/// `center`, T(x,D)poly - f stays within the one-sided epsilon band.
struct LocalPatch {
  std::vector<double> center;
  double radius = 0.0;            // 0 marks a center-node-only patch
  JetPolynomial poly;
  double epsilon = 0.0;
  Side side = Side::Sub;
  double defect_min = 0.0;        // over construction samples
  double defect_max = 0.0;
  MultiIndex solved_for;
};

struct NoBracketError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RadiusUnderflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EvalFaultError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CoverIncompleteError : std::runtime_error {
  CoverIncompleteError(const std::string& msg, std::vector<size_t> nodes)
      : std::runtime_error(msg), nodes(std::move(nodes)) {}
  std::vector<size_t> nodes;
};

using SeedJet = std::vector<std::pair<MultiIndex, double>>;

/// Lemma 5.1 construction at one point: all jet coefficients fixed from the
/// seed except one, which is solved by bracketing bisection so the defect at
/// x0 sits at the band midpoint; the radius is then halved from the cap until
/// the sampled defect stays inside the band.
LocalPatch local_subsolution(const OperatorSpec& op, const FieldFn& f,
                             const std::vector<double>& x0, double eps,
                             const SeedJet& seed_jet, const SolverParams& params,
                             double min_radius);
LocalPatch local_supersolution(const OperatorSpec& op, const FieldFn& f,
                               const std::vector<double>& x0, double eps,
                               const SeedJet& seed_jet, const SolverParams& params,
                               double min_radius);

/// T(x,D) applied to the patch polynomial, evaluated analytically.
Eval eval_patch_operator(const OperatorSpec& op, const JetPolynomial& poly,
                         std::span<const double> x);

/// Re-audit a patch band on a denser, optionally jittered sample set.
bool patch_band_ok(const OperatorSpec& op, const FieldFn& f, const LocalPatch& patch,
                   double eps, int density_multiplier, double tol,
                   uint64_t jitter_seed = 0);

struct Pin {
  std::vector<double> point;
  double value;
};

struct GlobalStats {
  double gamma_fraction = 0.0;
  double pass_fraction = 1.0;     // analytic band audit, before demotions
  size_t patches = 0;
  size_t singletons = 0;
  size_t demoted = 0;
  size_t jump_marked = 0;
  size_t failed_nodes = 0;
  size_t pins_applied = 0;
  size_t pins_rejected = 0;
  size_t polish_sweeps = 0;       // relaxation sweeps spent on the discrete band
  size_t polish_moved = 0;        // node values moved by the polish
  size_t polish_violations = 0;   // nodes still outside the band at budget end
  std::vector<std::string> warnings;
};

struct GlobalResult {
  PiecewiseFn fn;
  std::vector<int> owner;          // patch index per node, -1 when none
  std::vector<LocalPatch> patches;
  GlobalStats stats;
};

/// Prop. 5.1 assembly: greedy row-major cover by local patches, seeded from
/// the nearest covered patch, with value pins and first-writer-wins stamping.
/// Gamma collects jump interfaces between patches, band-audit demotions and
/// unpatchable nodes.
GlobalResult global_approx(const OperatorSpec& op, const FieldFn& f, double eps,
                           const Grid& grid, Side side, const std::vector<Pin>& pins,
                           const SolverParams& params,
                           const PiecewiseFn* warm_start = nullptr);

struct LevelReport {
  double epsilon = 0.0;
  GlobalStats sub_stats, super_stats;
};

struct CutSolution {
  std::vector<double> epsilons;    // eps0 / 2^k, k = 0..K
  std::vector<GlobalResult> subs;
  std::vector<GlobalResult> supers;
  IntervalFn lower;                // graph-completed sup of the sub family
  IntervalFn upper;                // graph-completed inf of the super family
  double image_defect = 0.0;       // max |T U - f| off Gamma at the finest level
  bool complete = false;
  std::string failure;
};

/// Theorem 5.1* refinement: both one-sided families at eps0 / 2^k for
/// k = 0..K, each level warm-started from the previous, assembled into the
/// interval cut. Partial results carry a failure note instead of throwing.
CutSolution refine_cut(const OperatorSpec& op, const FieldFn& f, const Grid& grid,
                       double eps0, int levels, const std::vector<Pin>& pins,
                       const SolverParams& params);

}  // namespace ordcut

#endif
