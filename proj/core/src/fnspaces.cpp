#include "ordcut/fnspaces.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ordcut {

size_t SingularMask::count() const {
  size_t c = 0;
  for (char m : marked_) c += (m != 0);
  return c;
}

double SingularMask::fraction() const {
  return marked_.empty() ? 0.0 : static_cast<double>(count()) / marked_.size();
}

std::optional<size_t> SingularMask::nowhere_dense_violation(const Grid& g) const {
  for (size_t id = 0; id < marked_.size(); ++id) {
    bool ok = false;
    for (size_t nb : g.ball(id, 2)) {
      if (!marked(nb)) {
        ok = true;
        break;
      }
    }
    if (!ok) return id;
  }
  return std::nullopt;
}

PiecewiseFn sample_onto(const Grid& g, const FieldFn& f, int smoothness) {
  PiecewiseFn u;
  u.grid = g;
  u.values.resize(g.size());
  u.mask = SingularMask(g.size());
  u.smoothness = smoothness;
  std::vector<double> x;
  for (size_t id = 0; id < g.size(); ++id) {
    g.coord_into(id, x);
    u.values[id] = f(x);
  }
  return u;
}

bool natural_leq(const PiecewiseFn& u, const PiecewiseFn& v) {
  if (!(u.grid == v.grid)) throw std::invalid_argument("natural_leq: grid mismatch");
  for (size_t id = 0; id < u.grid.size(); ++id) {
    if (!u.defined(id) || !v.defined(id)) continue;
    if (!(u.values[id] <= v.values[id])) return false;
  }
  return true;
}

namespace {

// Second-order central 1-D stencils for derivative orders 0..4, as
// (offset, coefficient) pairs; coefficient is divided by h^k by the caller.
const std::vector<std::pair<int, double>>& stencil_1d(int k) {
  static const std::vector<std::vector<std::pair<int, double>>> table = {
      {{0, 1.0}},
      {{-1, -0.5}, {1, 0.5}},
      {{-1, 1.0}, {0, -2.0}, {1, 1.0}},
      {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}},
      {{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}},
  };
  if (k < 0 || k > 4)
    throw std::invalid_argument("finite differences support derivative order <= 4 per axis");
  return table[static_cast<size_t>(k)];
}

int radius_1d(int k) { return k == 0 ? 0 : (k <= 2 ? 1 : 2); }

struct StencilPoint {
  std::vector<int> offset;
  double weight;
};

// Tensor product of the per-axis stencils for multi-index p.
std::vector<StencilPoint> tensor_stencil(const MultiIndex& p,
                                         const std::vector<double>& h) {
  std::vector<StencilPoint> pts = {{std::vector<int>(), 1.0}};
  for (int a = 0; a < p.dim(); ++a) {
    const auto& s1 = stencil_1d(p[a]);
    double hk = std::pow(h[static_cast<size_t>(a)], p[a]);
    std::vector<StencilPoint> next;
    for (const auto& pt : pts) {
      for (const auto& [off, w] : s1) {
        StencilPoint q = pt;
        q.offset.push_back(off);
        q.weight *= w / hk;
        next.push_back(std::move(q));
      }
    }
    pts = std::move(next);
  }
  return pts;
}

}  // namespace

std::vector<int> stencil_radius(const OperatorSpec& op) {
  std::vector<int> r(static_cast<size_t>(op.dimension), 0);
  for (const auto& p : op.jet_vars)
    for (int a = 0; a < op.dimension; ++a)
      r[static_cast<size_t>(a)] = std::max(r[static_cast<size_t>(a)], radius_1d(p[a]));
  return r;
}

std::vector<std::pair<std::vector<int>, double>> fd_stencil(
    const MultiIndex& p, const std::vector<double>& spacing) {
  std::vector<std::pair<std::vector<int>, double>> out;
  for (auto& pt : tensor_stencil(p, spacing))
    out.emplace_back(std::move(pt.offset), pt.weight);
  return out;
}

std::optional<double> fd_derivative_at(const Grid& g,
                                       const std::vector<double>& values,
                                       size_t id, const MultiIndex& p) {
  double acc = 0.0;
  for (const auto& pt : tensor_stencil(p, g.spacing())) {
    size_t nb = id;
    for (int a = 0; a < g.dim(); ++a)
      if (!g.shift(nb, a, pt.offset[static_cast<size_t>(a)], nb)) return std::nullopt;
    double v = values[nb];
    if (std::isnan(v)) return std::nullopt;
    acc += pt.weight * v;
  }
  return acc;
}

PiecewiseFn apply_operator(const OperatorSpec& op, const PiecewiseFn& u,
                           ApplyStats* stats) {
  const Grid& g = u.grid;
  if (op.dimension != g.dim())
    throw std::invalid_argument("apply_operator: dimension mismatch");
  if (u.smoothness < op.order)
    throw std::invalid_argument("apply_operator: candidate smoothness below operator order");

  std::vector<int> radius = stencil_radius(op);
  for (int a = 0; a < g.dim(); ++a)
    if (2 * radius[static_cast<size_t>(a)] + 1 > g.resolution()[static_cast<size_t>(a)])
      throw std::invalid_argument("apply_operator: stencil radius exceeds grid");

  std::vector<std::vector<StencilPoint>> stencils;
  stencils.reserve(op.jet_vars.size());
  for (const auto& p : op.jet_vars) stencils.push_back(tensor_stencil(p, g.spacing()));

  PiecewiseFn out;
  out.grid = g;
  out.values.assign(g.size(), std::numeric_limits<double>::quiet_NaN());
  out.mask = SingularMask(g.size());
  out.smoothness = std::max(0, u.smoothness - op.order);

  std::vector<double> jet(op.jet_vars.size());
  std::vector<double> x;
  std::vector<int> idx;
  for (size_t id = 0; id < g.size(); ++id) {
    idx = g.index_of(id);
    bool collar = false;
    for (int a = 0; a < g.dim(); ++a) {
      int r = radius[static_cast<size_t>(a)];
      if (idx[static_cast<size_t>(a)] < r ||
          idx[static_cast<size_t>(a)] >= g.resolution()[static_cast<size_t>(a)] - r)
        collar = true;
    }
    if (collar || u.mask.marked(id)) {
      out.mask.mark(id);
      continue;
    }

    bool usable = true;
    for (size_t v = 0; v < stencils.size() && usable; ++v) {
      double acc = 0.0;
      for (const auto& pt : stencils[v]) {
        size_t nb = id;
        bool in = true;
        for (int a = 0; a < g.dim() && in; ++a)
          in = g.shift(nb, a, pt.offset[static_cast<size_t>(a)], nb);
        if (!in || u.mask.marked(nb)) {
          usable = false;
          break;
        }
        acc += pt.weight * u.values[nb];
      }
      jet[v] = acc;
    }
    if (!usable) {
      out.mask.mark(id);
      continue;
    }

    g.coord_into(id, x);
    Eval r = eval_operator(op, x, jet);
    if (!r.ok()) {
      out.mask.mark(id);
      if (stats) ++stats->faults;
      continue;
    }
    out.values[id] = r.value;
    if (stats) ++stats->defined;
  }
  return out;
}

bool pullback_leq(const OperatorSpec& op, const PiecewiseFn& u, const PiecewiseFn& v) {
  return natural_leq(apply_operator(op, u), apply_operator(op, v));
}

}  // namespace ordcut
