#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ordcut/jets.hpp"

using namespace ordcut;

namespace {

MultiIndex mi(std::vector<int> e) { return MultiIndex(std::move(e)); }

JetPolynomial random_poly(int n, int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  std::vector<double> center(static_cast<size_t>(n));
  for (auto& c : center) c = dist(rng) / 10.0;
  JetPolynomial p(center, m);
  for (const auto& idx : enumerate_multi_indices(n, m)) p.set_coeff(idx, dist(rng));
  return p;
}

}  // namespace

TEST_CASE("poly_eval examples") {
  JetPolynomial c({0.0, 0.0}, 0);
  c.set_coeff(mi({0, 0}), 4.95);
  CHECK(c.eval(std::vector<double>{3.0, -7.0}) == doctest::Approx(4.95).epsilon(0));

  JetPolynomial p({0.0}, 2);
  p.set_coeff(mi({0}), 1.0);
  p.set_coeff(mi({1}), 1.0);
  p.set_coeff(mi({2}), 2.0);
  CHECK(p.eval(std::vector<double>{0.5}) == doctest::Approx(1.75).epsilon(1e-15));

  JetPolynomial q({0.0, 0.0}, 2);
  q.set_coeff(mi({2, 0}), 2.0);
  CHECK(q.eval(std::vector<double>{1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("poly_derivative_at examples") {
  std::mt19937_64 rng(11);
  JetPolynomial p = random_poly(2, 3, rng);
  for (const auto& idx : enumerate_multi_indices(2, 3))
    CHECK(p.derivative_at(idx, p.center()) == doctest::Approx(p.coeff(idx)).epsilon(0));

  // P = x^2 via a_2 = 2 at center 0: P'(3) = 6.
  JetPolynomial sq({0.0}, 2);
  sq.set_coeff(mi({2}), 2.0);
  CHECK(sq.derivative_at(mi({1}), std::vector<double>{3.0}) ==
        doctest::Approx(6.0).epsilon(1e-15));

  // P = x^2 + y^2: the Laplacian jet entries are constant in x.
  JetPolynomial lap({0.0, 0.0}, 2);
  lap.set_coeff(mi({2, 0}), 2.0);
  lap.set_coeff(mi({0, 2}), 2.0);
  for (double xx : {-1.0, 0.3, 2.0}) {
    std::vector<double> x = {xx, 0.5 * xx};
    CHECK(lap.derivative_at(mi({2, 0}), x) == doctest::Approx(2.0).epsilon(0));
    CHECK(lap.derivative_at(mi({0, 2}), x) == doctest::Approx(2.0).epsilon(0));
  }
}

TEST_CASE("jet_of examples") {
  CHECK(enumerate_multi_indices(2, 2).size() == 6);

  std::mt19937_64 rng(5);
  JetPolynomial p = random_poly(2, 2, rng);
  auto jet = p.jet_at(p.center());
  REQUIRE(jet.size() == p.coeffs().size());
  for (size_t i = 0; i < jet.size(); ++i) {
    CHECK(jet[i].first == p.coeffs()[i].first);
    CHECK(jet[i].second == doctest::Approx(p.coeffs()[i].second).epsilon(0));
  }

  // P = x^2 + y^2 at (1,0).
  JetPolynomial q({0.0, 0.0}, 2);
  q.set_coeff(mi({2, 0}), 2.0);
  q.set_coeff(mi({0, 2}), 2.0);
  std::vector<double> x = {1.0, 0.0};
  CHECK(q.eval(x) == doctest::Approx(1.0));
  CHECK(q.derivative_at(mi({1, 0}), x) == doctest::Approx(2.0));
  CHECK(q.derivative_at(mi({0, 1}), x) == doctest::Approx(0.0));
  CHECK(q.derivative_at(mi({1, 1}), x) == doctest::Approx(0.0));
}

TEST_CASE("finite-difference agreement on random polynomials") {
  std::mt19937_64 rng(23);
  const double h = 1e-5;
  for (int iter = 0; iter < 50; ++iter) {
    int n = 1 + static_cast<int>(rng() % 3);
    JetPolynomial p = random_poly(n, 2, rng);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    std::vector<double> x(static_cast<size_t>(n));
    for (auto& c : x) c = dist(rng);
    for (int a = 0; a < n; ++a) {
      std::vector<int> e(static_cast<size_t>(n), 0);
      e[static_cast<size_t>(a)] = 1;
      std::vector<double> xp = x, xm = x;
      xp[static_cast<size_t>(a)] += h;
      xm[static_cast<size_t>(a)] -= h;
      double fd = (p.eval(xp) - p.eval(xm)) / (2.0 * h);
      double exact = p.derivative_at(MultiIndex(e), x);
      double scale = std::max(1.0, std::fabs(exact));
      CHECK(std::fabs(fd - exact) / scale <= 1e-6);
    }
  }
}

TEST_CASE("derivative is linear in the polynomial") {
  std::mt19937_64 rng(37);
  JetPolynomial p = random_poly(2, 2, rng);
  JetPolynomial q({p.center()}, 2);
  q = JetPolynomial(p.center(), 2);
  for (const auto& idx : enumerate_multi_indices(2, 2))
    q.set_coeff(idx, 3.0 * static_cast<double>(idx.degree()) - 1.0);
  const double alpha = 2.0, beta = -0.5;
  JetPolynomial r(p.center(), 2);
  for (const auto& idx : enumerate_multi_indices(2, 2))
    r.set_coeff(idx, alpha * p.coeff(idx) + beta * q.coeff(idx));
  std::vector<double> x = {0.7, -0.3};
  for (const auto& idx : enumerate_multi_indices(2, 2)) {
    double lhs = r.derivative_at(idx, x);
    double rhs = alpha * p.derivative_at(idx, x) + beta * q.derivative_at(idx, x);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}
