#include "ordcut/jets.hpp"

#include <algorithm>
#include <cassert>

namespace ordcut {

JetPolynomial::JetPolynomial(std::vector<double> center, int order)
    : center_(std::move(center)), order_(order) {
  for (const auto& p : enumerate_multi_indices(dim(), order_))
    coeffs_.emplace_back(p, 0.0);
}

double JetPolynomial::coeff(const MultiIndex& p) const {
  for (const auto& [q, a] : coeffs_)
    if (q == p) return a;
  return 0.0;
}

void JetPolynomial::set_coeff(const MultiIndex& p, double a) {
  for (auto& [q, c] : coeffs_) {
    if (q == p) {
      c = a;
      return;
    }
  }
  assert(p.degree() <= order_ && "coefficient index exceeds jet order");
  coeffs_.emplace_back(p, a);
  std::sort(coeffs_.begin(), coeffs_.end(),
            [](const auto& l, const auto& r) { return l.first.canonical_less(r.first); });
}

double JetPolynomial::eval(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& [p, a] : coeffs_) {
    if (a == 0.0) continue;
    double mono = 1.0;
    for (int i = 0; i < dim(); ++i) {
      double d = x[static_cast<size_t>(i)] - center_[static_cast<size_t>(i)];
      for (int k = 0; k < p[i]; ++k) mono *= d;
    }
    sum += a * mono / p.factorial();
  }
  return sum;
}

double JetPolynomial::derivative_at(const MultiIndex& q,
                                    std::span<const double> x) const {
  // D^q of a_p (x-c)^p / p! is a_p (x-c)^{p-q} / (p-q)! for p >= q.
  double sum = 0.0;
  for (const auto& [p, a] : coeffs_) {
    if (a == 0.0 || !p.dominates(q)) continue;
    MultiIndex r = p.minus(q);
    double mono = 1.0;
    for (int i = 0; i < dim(); ++i) {
      double d = x[static_cast<size_t>(i)] - center_[static_cast<size_t>(i)];
      for (int k = 0; k < r[i]; ++k) mono *= d;
    }
    sum += a * mono / r.factorial();
  }
  return sum;
}

std::vector<std::pair<MultiIndex, double>> JetPolynomial::jet_at(
    std::span<const double> x) const {
  std::vector<std::pair<MultiIndex, double>> out;
  for (const auto& p : enumerate_multi_indices(dim(), order_))
    out.emplace_back(p, derivative_at(p, x));
  return out;
}

}  // namespace ordcut
