#ifndef ORDCUT_JETS_HPP
#define ORDCUT_JETS_HPP

#include <span>
#include <utility>
#include <vector>

#include "ordcut/multi_index.hpp"

namespace ordcut {

/// Local Taylor polynomial stored by its jet: coefficient a_p is the exact
/// derivative D^p P at the center, so
///   P(x) = sum_{|p|<=m} a_p (x - center)^p / p! .
class JetPolynomial {
public:
  JetPolynomial() = default;
  JetPolynomial(std::vector<double> center, int order);

  int dim() const { return static_cast<int>(center_.size()); }
  int order() const { return order_; }
  const std::vector<double>& center() const { return center_; }

  double coeff(const MultiIndex& p) const;
  void set_coeff(const MultiIndex& p, double a);
  /// Coefficients in canonical multi-index order (degree asc, lex).
  const std::vector<std::pair<MultiIndex, double>>& coeffs() const { return coeffs_; }

  double eval(std::span<const double> x) const;
  /// Exact closed-form derivative D^p P at x; at the center this is a_p.
  double derivative_at(const MultiIndex& p, std::span<const double> x) const;
  /// All derivatives |p| <= order at x, canonical order. Suitable as
  /// eval_operator input: composing the two gives (T P)(x).
  std::vector<std::pair<MultiIndex, double>> jet_at(std::span<const double> x) const;

private:
  std::vector<double> center_;
  int order_ = 0;
  std::vector<std::pair<MultiIndex, double>> coeffs_;
};

}  // namespace ordcut

#endif
