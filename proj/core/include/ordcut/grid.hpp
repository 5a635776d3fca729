#ifndef ORDCUT_GRID_HPP
#define ORDCUT_GRID_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ordcut {

/// Axis-aligned box discretized with a fixed number of nodes per axis.
/// Nodes are addressed row-major with the last axis fastest.
class Grid {
public:
  Grid() = default;
  Grid(std::vector<double> lo, std::vector<double> hi, std::vector<int> res);

  int dim() const { return static_cast<int>(res_.size()); }
  size_t size() const { return size_; }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }
  const std::vector<int>& resolution() const { return res_; }
  double spacing(int axis) const { return h_[static_cast<size_t>(axis)]; }
  const std::vector<double>& spacing() const { return h_; }
  double min_spacing() const;

  std::vector<int> index_of(size_t id) const;
  size_t id_of(const std::vector<int>& idx) const;
  std::vector<double> coord(size_t id) const;
  void coord_into(size_t id, std::vector<double>& x) const;

  /// Node id offset by `delta` along `axis`; false when out of range.
  bool shift(size_t id, int axis, int delta, size_t& out) const;

  /// Axis neighbors (graph distance 1).
  std::vector<size_t> neighbors(size_t id) const;

  /// All nodes within lattice graph distance <= radius (L1 on indices).
  std::vector<size_t> ball(size_t id, int radius) const;

  bool operator==(const Grid& o) const {
    return lo_ == o.lo_ && hi_ == o.hi_ && res_ == o.res_;
  }

  /// Same box, 2x nodes per axis minus overlap (res -> 2*res - 1), so every
  /// coarse node is also a fine node.
  Grid refined() const;

private:
  std::vector<double> lo_, hi_, h_;
  std::vector<int> res_;
  std::vector<size_t> stride_;
  size_t size_ = 0;
};

}  // namespace ordcut

#endif
