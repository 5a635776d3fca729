#ifndef ORDCUT_MULTI_INDEX_HPP
#define ORDCUT_MULTI_INDEX_HPP

#include <compare>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace ordcut {

/// Derivative orders per coordinate; the index p of D^p with |p| <= m.
class MultiIndex {
public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {}
  static MultiIndex zero(int n) { return MultiIndex(std::vector<int>(n, 0)); }

  int dim() const { return static_cast<int>(entries_.size()); }
  int degree() const { return std::accumulate(entries_.begin(), entries_.end(), 0); }
  int operator[](int i) const { return entries_[i]; }
  const std::vector<int>& entries() const { return entries_; }

  bool operator==(const MultiIndex&) const = default;

  // Plain lexicographic order on the entry vectors.
  bool lex_less(const MultiIndex& o) const { return entries_ < o.entries_; }

  // Canonical enumeration order: degree ascending, lexicographic within degree.
  bool canonical_less(const MultiIndex& o) const {
    if (degree() != o.degree()) return degree() < o.degree();
    return entries_ < o.entries_;
  }

  // p >= q componentwise (q is a valid derivative of the p-monomial).
  bool dominates(const MultiIndex& q) const {
    for (int i = 0; i < dim(); ++i)
      if (entries_[i] < q.entries_[i]) return false;
    return true;
  }
  MultiIndex minus(const MultiIndex& q) const {
    std::vector<int> e(entries_);
    for (int i = 0; i < dim(); ++i) e[i] -= q.entries_[i];
    return MultiIndex(std::move(e));
  }

  // Pad with trailing zeros to dimension n.
  MultiIndex padded(int n) const {
    std::vector<int> e(entries_);
    e.resize(static_cast<size_t>(n), 0);
    return MultiIndex(std::move(e));
  }

  double factorial() const {
    double r = 1.0;
    for (int e : entries_)
      for (int k = 2; k <= e; ++k) r *= k;
    return r;
  }

  std::string to_string() const {
    std::string s = "(";
    for (int i = 0; i < dim(); ++i) {
      if (i) s += ",";
      s += std::to_string(entries_[i]);
    }
    return s + ")";
  }

private:
  std::vector<int> entries_;
};

/// All multi-indices of dimension n with degree <= m, in canonical order.
std::vector<MultiIndex> enumerate_multi_indices(int n, int m);

}  // namespace ordcut

#endif
