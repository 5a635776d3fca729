#include "ordcut/hausdorff.hpp"

#include <cmath>
#include <stdexcept>

namespace ordcut {

namespace {

IntervalFn envelope(const IntervalFn& f, bool lower) {
  IntervalFn out = f;
  for (size_t id = 0; id < f.cells.size(); ++id) {
    double v = lower ? f.cells[id].lo : f.cells[id].hi;
    for (size_t nb : f.grid.neighbors(id)) {
      if (lower)
        v = std::min(v, f.cells[nb].lo);
      else
        v = std::max(v, f.cells[nb].hi);
    }
    if (lower)
      out.cells[id].lo = v;
    else
      out.cells[id].hi = v;
  }
  return out;
}

}  // namespace

IntervalFn lower_envelope(const IntervalFn& f) { return envelope(f, true); }
IntervalFn upper_envelope(const IntervalFn& f) { return envelope(f, false); }

std::vector<char> detect_jump_nodes(const IntervalFn& f, double ratio,
                                    double min_gap) {
  const Grid& g = f.grid;
  std::vector<char> flags(f.cells.size(), 0);
  for (size_t id = 0; id < f.cells.size(); ++id) {
    for (int a = 0; a < g.dim(); ++a) {
      size_t j;
      if (!g.shift(id, a, +1, j)) continue;
      double gap = f.cells[id].gap(f.cells[j]);
      if (gap <= 0.0 || gap <= min_gap) continue;
      double flank = 0.0;
      size_t k;
      if (g.shift(id, a, -1, k)) flank = std::max(flank, f.cells[k].gap(f.cells[id]));
      if (g.shift(j, a, +1, k)) flank = std::max(flank, f.cells[j].gap(f.cells[k]));
      if (gap > ratio * flank) flags[j] = 1;
    }
  }
  return flags;
}

IntervalFn graph_complete(const IntervalFn& f, double ratio,
                          GraphCompleteStats* stats) {
  const Grid& g = f.grid;
  IntervalFn cur = f;
  if (stats) *stats = {};
  // Intervals only grow toward existing endpoint values, so this terminates.
  while (true) {
    // Widen the later node of each jump pair by the hull of the pair: the
    // discrete envelope of the one-sided limits meeting at the jump.
    std::vector<Interval> next = cur.cells;
    size_t changed = 0;
    for (size_t id = 0; id < cur.cells.size(); ++id) {
      for (int a = 0; a < g.dim(); ++a) {
        size_t j;
        if (!g.shift(id, a, +1, j)) continue;
        double gap = cur.cells[id].gap(cur.cells[j]);
        if (gap <= 0.0) continue;
        double flank = 0.0;
        size_t k;
        if (g.shift(id, a, -1, k))
          flank = std::max(flank, cur.cells[k].gap(cur.cells[id]));
        if (g.shift(j, a, +1, k))
          flank = std::max(flank, cur.cells[j].gap(cur.cells[k]));
        if (gap > ratio * flank) {
          Interval w = next[j].hull(cur.cells[id]);
          if (!(w == next[j])) {
            next[j] = w;
            ++changed;
          }
        }
      }
    }
    if (changed == 0) break;
    cur.cells = std::move(next);
    if (stats) {
      ++stats->passes;
      stats->widened += changed;
    }
  }
  return cur;
}

HContinuityReport is_hcontinuous(const IntervalFn& f, double ratio) {
  for (size_t id = 0; id < f.cells.size(); ++id) {
    bool dense = false;
    for (size_t nb : f.grid.ball(id, 2)) {
      if (f.cells[nb].degenerate()) {
        dense = true;
        break;
      }
    }
    if (!dense)
      return {false, id, "no degenerate node within graph distance 2"};
  }
  IntervalFn fix = graph_complete(f, ratio);
  for (size_t id = 0; id < f.cells.size(); ++id)
    if (!(fix.cells[id] == f.cells[id]))
      return {false, id, "not a fixpoint of graph completion"};
  return {};
}

namespace {

IntervalFn extremum_family(const std::vector<PiecewiseFn>& fs, bool sup,
                           double ratio) {
  if (fs.empty()) throw std::invalid_argument("empty family");
  const Grid& g = fs.front().grid;
  for (const auto& u : fs)
    if (!(u.grid == g)) throw std::invalid_argument("family on mixed grids");
  IntervalFn out;
  out.grid = g;
  out.cells.resize(g.size());
  for (size_t id = 0; id < g.size(); ++id) {
    bool any = false;
    double v = 0.0;
    for (const auto& u : fs) {
      if (!u.defined(id)) continue;
      double w = u.values[id];
      v = any ? (sup ? std::max(v, w) : std::min(v, w)) : w;
      any = true;
    }
    out.cells[id] = any ? Interval::point(v) : Interval::whole();
  }
  return graph_complete(out, ratio);
}

}  // namespace

IntervalFn sup_family(const std::vector<PiecewiseFn>& fs, double ratio) {
  return extremum_family(fs, true, ratio);
}

IntervalFn inf_family(const std::vector<PiecewiseFn>& fs, double ratio) {
  return extremum_family(fs, false, ratio);
}

IntervalFn embed(const PiecewiseFn& u, double ratio) {
  return sup_family({u}, ratio);
}

}  // namespace ordcut
