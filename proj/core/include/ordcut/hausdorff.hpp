#ifndef ORDCUT_HAUSDORFF_HPP
#define ORDCUT_HAUSDORFF_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ordcut/fnspaces.hpp"
#include "ordcut/grid.hpp"

namespace ordcut {

/// Closed real interval, possibly unbounded.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static Interval point(double v) { return {v, v}; }
  static Interval whole() {
    return {-std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
  }
  bool degenerate() const { return lo == hi && std::isfinite(lo); }
  bool valid() const { return lo <= hi; }
  Interval hull(const Interval& o) const {
    return {std::min(lo, o.lo), std::max(hi, o.hi)};
  }
  /// Distance between two intervals; 0 when they intersect.
  double gap(const Interval& o) const {
    double g = std::max(lo, o.lo) - std::min(hi, o.hi);
    return g > 0.0 ? g : 0.0;
  }
  bool operator==(const Interval&) const = default;
};

/// Discrete element of H(Omega): one closed interval per node, total.
struct IntervalFn {
  Grid grid;
  std::vector<Interval> cells;
};

inline constexpr double kDefaultJumpRatio = 3.0;

/// Neighborhood min of lower endpoints (self plus axis neighbors).
IntervalFn lower_envelope(const IntervalFn& f);
/// Neighborhood max of upper endpoints, dually.
IntervalFn upper_envelope(const IntervalFn& f);

/// Adjacent node pairs whose interval gap exceeds `ratio` times the flanking
/// gaps along the same axis are jumps; the later node of the pair is flagged.
/// Gaps of `min_gap` or below are never flagged (callers auditing at defect
/// scale epsilon pass a fraction of it).
std::vector<char> detect_jump_nodes(const IntervalFn& f, double ratio,
                                    double min_gap = 0.0);

struct GraphCompleteStats {
  int passes = 0;        // widening passes until fixpoint
  size_t widened = 0;    // nodes that changed
};

/// Closure under the envelope of one-sided limits: nodes flagged as jumps
/// take [lower_envelope.lo, upper_envelope.hi], repeated to a fixpoint.
/// Degenerate samples of a (grid-resolved) continuous function are fixed.
IntervalFn graph_complete(const IntervalFn& f, double ratio = kDefaultJumpRatio,
                          GraphCompleteStats* stats = nullptr);

struct HContinuityReport {
  bool ok = true;
  size_t witness = 0;
  std::string why;
};

/// Hausdorff continuity, discretely: degenerate nodes dense (graph distance
/// <= 2) and f is a graph_complete fixpoint.
HContinuityReport is_hcontinuous(const IntervalFn& f,
                                 double ratio = kDefaultJumpRatio);

/// Nodewise sup over the family where defined ([-inf,inf] where nowhere
/// defined), then graph-completed. Empty families are an error.
IntervalFn sup_family(const std::vector<PiecewiseFn>& fs,
                      double ratio = kDefaultJumpRatio);
IntervalFn inf_family(const std::vector<PiecewiseFn>& fs,
                      double ratio = kDefaultJumpRatio);

/// Embed a piecewise function: degenerate where defined, whole-line on the
/// mask, graph-completed (the discrete C^0_nd into H inclusion).
IntervalFn embed(const PiecewiseFn& u, double ratio = kDefaultJumpRatio);

}  // namespace ordcut

#endif
