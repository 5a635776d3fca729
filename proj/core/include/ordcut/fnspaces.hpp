#ifndef ORDCUT_FNSPACES_HPP
#define ORDCUT_FNSPACES_HPP

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ordcut/expr.hpp"
#include "ordcut/grid.hpp"

namespace ordcut {

/// Discrete singular set Gamma: a marked node set that must stay nowhere
/// dense (every node sees an unmarked node within graph distance 2).
class SingularMask {
public:
  SingularMask() = default;
  explicit SingularMask(size_t n) : marked_(n, 0) {}

  bool marked(size_t id) const { return marked_[id] != 0; }
  void mark(size_t id) { marked_[id] = 1; }
  size_t size() const { return marked_.size(); }
  size_t count() const;
  double fraction() const;

  /// Discrete "closed, nowhere dense": unmarked node within graph distance 2
  /// of every node. Returns the first violating node on failure.
  std::optional<size_t> nowhere_dense_violation(const Grid& g) const;
  bool nowhere_dense(const Grid& g) const { return !nowhere_dense_violation(g); }

  bool operator==(const SingularMask&) const = default;

private:
  std::vector<char> marked_;
};

/// Discrete element of C^l_nd: grid values defined off the singular mask.
struct PiecewiseFn {
  Grid grid;
  std::vector<double> values;
  SingularMask mask;
  int smoothness = 0;  // l

  bool defined(size_t id) const { return !mask.marked(id); }
};

using FieldFn = std::function<double(std::span<const double>)>;

PiecewiseFn sample_onto(const Grid& g, const FieldFn& f, int smoothness);

/// Pointwise order at nodes unmarked in both masks.
bool natural_leq(const PiecewiseFn& u, const PiecewiseFn& v);

struct ApplyStats {
  size_t faults = 0;
  size_t defined = 0;
};

/// T(x,D)u by second-order central finite differences. The result is defined
/// only on nodes whose full stencil avoids u's mask and the boundary collar;
/// evaluation faults push the node into the result mask.
PiecewiseFn apply_operator(const OperatorSpec& op, const PiecewiseFn& u,
                           ApplyStats* stats = nullptr);

/// Pullback preorder <=_T : u <=_T v iff T u <= T v naturally.
bool pullback_leq(const OperatorSpec& op, const PiecewiseFn& u, const PiecewiseFn& v);

/// Per-axis stencil radius of the finite-difference form of op.
std::vector<int> stencil_radius(const OperatorSpec& op);

/// Central finite-difference stencil for D^p as (index offset, weight) pairs;
/// the weights already carry the 1/h^k factors.
std::vector<std::pair<std::vector<int>, double>> fd_stencil(
    const MultiIndex& p, const std::vector<double>& spacing);

/// Central finite-difference estimate of D^p u at one node from raw values
/// (NaN = undefined). Empty when the stencil leaves the grid or touches an
/// undefined node.
std::optional<double> fd_derivative_at(const Grid& g,
                                       const std::vector<double>& values,
                                       size_t id, const MultiIndex& p);

}  // namespace ordcut

#endif
