#include "ordcut/grid.hpp"

#include <algorithm>

namespace ordcut {

Grid::Grid(std::vector<double> lo, std::vector<double> hi, std::vector<int> res)
    : lo_(std::move(lo)), hi_(std::move(hi)), res_(std::move(res)) {
  if (lo_.size() != hi_.size() || lo_.size() != res_.size() || res_.empty())
    throw std::invalid_argument("grid: axis count mismatch");
  size_ = 1;
  for (size_t a = 0; a < res_.size(); ++a) {
    if (res_[a] < 3) throw std::invalid_argument("grid: resolution must be >= 3 per axis");
    if (!(hi_[a] > lo_[a])) throw std::invalid_argument("grid: empty axis range");
    h_.push_back((hi_[a] - lo_[a]) / (res_[a] - 1));
    size_ *= static_cast<size_t>(res_[a]);
  }
  stride_.assign(res_.size(), 1);
  for (int a = static_cast<int>(res_.size()) - 2; a >= 0; --a)
    stride_[static_cast<size_t>(a)] =
        stride_[static_cast<size_t>(a) + 1] * static_cast<size_t>(res_[static_cast<size_t>(a) + 1]);
}

double Grid::min_spacing() const {
  return *std::min_element(h_.begin(), h_.end());
}

std::vector<int> Grid::index_of(size_t id) const {
  std::vector<int> idx(res_.size());
  for (size_t a = 0; a < res_.size(); ++a) {
    idx[a] = static_cast<int>(id / stride_[a]);
    id %= stride_[a];
  }
  return idx;
}

size_t Grid::id_of(const std::vector<int>& idx) const {
  size_t id = 0;
  for (size_t a = 0; a < res_.size(); ++a)
    id += static_cast<size_t>(idx[a]) * stride_[a];
  return id;
}

std::vector<double> Grid::coord(size_t id) const {
  std::vector<double> x(res_.size());
  coord_into(id, x);
  return x;
}

void Grid::coord_into(size_t id, std::vector<double>& x) const {
  x.resize(res_.size());
  for (size_t a = 0; a < res_.size(); ++a) {
    size_t i = id / stride_[a];
    id %= stride_[a];
    x[a] = lo_[a] + static_cast<double>(i) * h_[a];
  }
}

bool Grid::shift(size_t id, int axis, int delta, size_t& out) const {
  size_t a = static_cast<size_t>(axis);
  int i = static_cast<int>(id / stride_[a] % static_cast<size_t>(res_[a]));
  int j = i + delta;
  if (j < 0 || j >= res_[a]) return false;
  out = id - static_cast<size_t>(i) * stride_[a] + static_cast<size_t>(j) * stride_[a];
  return true;
}

std::vector<size_t> Grid::neighbors(size_t id) const {
  std::vector<size_t> out;
  for (int a = 0; a < dim(); ++a) {
    size_t nb;
    if (shift(id, a, -1, nb)) out.push_back(nb);
    if (shift(id, a, +1, nb)) out.push_back(nb);
  }
  return out;
}

std::vector<size_t> Grid::ball(size_t id, int radius) const {
  std::vector<size_t> frontier = {id}, out = {id};
  std::vector<size_t> seen = {id};
  for (int r = 0; r < radius; ++r) {
    std::vector<size_t> next;
    for (size_t v : frontier) {
      for (size_t nb : neighbors(v)) {
        if (std::find(seen.begin(), seen.end(), nb) == seen.end()) {
          seen.push_back(nb);
          next.push_back(nb);
          out.push_back(nb);
        }
      }
    }
    frontier = std::move(next);
  }
  return out;
}

Grid Grid::refined() const {
  std::vector<int> r2(res_.size());
  for (size_t a = 0; a < res_.size(); ++a) r2[a] = res_[a] * 2 - 1;
  return Grid(lo_, hi_, r2);
}

}  // namespace ordcut
