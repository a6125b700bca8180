#include <cmath>
#include <random>

#include "calibr/polynomial.hpp"
#include "doctest.h"

using namespace calibr;

namespace {

double factorial(int k) { return k <= 1 ? 1.0 : k * factorial(k - 1); }

// Dirichlet integral of t^a over the reference simplex, divided by its volume 1/p!.
double simplex_moment(const std::vector<int>& a) {
  const int p = static_cast<int>(a.size());
  double num = 1.0;
  int total = 0;
  for (int k : a) {
    num *= factorial(k);
    total += k;
  }
  return num / factorial(p + total) * factorial(p);
}

}  // namespace

TEST_CASE("polynomial evaluation and derivatives") {
  // f = 3 x0^2 x1 - x2 + 2
  Polynomial f(3);
  f.add_term({2, 1, 0}, 3.0);
  f.add_term({0, 0, 1}, -1.0);
  f.add_term({0, 0, 0}, 2.0);
  const Eigen::Vector3d x(1.5, -2.0, 0.25);
  CHECK(f(x) == doctest::Approx(3 * 2.25 * -2.0 - 0.25 + 2));
  CHECK(f.degree() == 3);
  const Eigen::VectorXd g = f.gradient(x);
  CHECK(g[0] == doctest::Approx(6 * 1.5 * -2.0));
  CHECK(g[1] == doctest::Approx(3 * 2.25));
  CHECK(g[2] == doctest::Approx(-1.0));
  const Eigen::MatrixXd h = f.hessian(x);
  CHECK(h(0, 0) == doctest::Approx(6 * -2.0));
  CHECK(h(0, 1) == doctest::Approx(6 * 1.5));
  CHECK(h(2, 2) == 0.0);
  CHECK((f - f).is_zero());
  const Polynomial sq = f * f;
  CHECK(sq(x) == doctest::Approx(f(x) * f(x)));
  CHECK_THROWS_AS(f.add_term({1, 0}, 1.0), DimensionError);
}

TEST_CASE("monomial enumeration counts") {
  CHECK(monomials_up_to(3, 2).size() == 10);
  CHECK(monomials_up_to(4, 3).size() == 35);
  CHECK(monomials_up_to(2, 0).size() == 1);
}

TEST_CASE("exterior derivative of polynomial forms") {
  const int n = 4;
  // d(x1 dx2) = dx1 ^ dx2
  PolyForm a(n, 1);
  a.add_term(Blade::from_indices(std::vector<int>{2}), Polynomial::coordinate(n, 0));
  const PolyForm da = a.d();
  const Eigen::VectorXd x = Eigen::VectorXd::Random(n);
  CHECK(da(x).coeff({1, 2}) == doctest::Approx(1.0));
  // d(x2 dx1) = -dx1 ^ dx2
  PolyForm b(n, 1);
  b.add_term(Blade::from_indices(std::vector<int>{1}), Polynomial::coordinate(n, 1));
  CHECK(b.d()(x).coeff({1, 2}) == doctest::Approx(-1.0));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int p = 0; p <= 2; ++p) {
    PolyForm f(n, p);
    for (const auto& bl : blades(n, p)) {
      Polynomial c(n);
      for (const auto& e : monomials_up_to(n, 3)) c.add_term(e, u(rng));
      f.add_term(bl, c);
    }
    CHECK(f.d().d()(x).norm() < 1e-12);
  }
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  for (int m = 1; m <= 8; ++m) {
    const auto r = gauss_legendre(m);
    for (int k = 0; k <= 2 * m - 1; ++k) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
      CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("simplex rules reproduce Dirichlet moments") {
  for (int p = 1; p <= 4; ++p) {
    for (int order = 0; order <= 6; ++order) {
      const auto rule = simplex_rule(p, order);
      double wsum = 0.0;
      for (double w : rule.weights) wsum += w;
      CHECK(wsum == doctest::Approx(1.0).epsilon(1e-13));
      // All monomials of total degree <= order.
      for (const auto& e : monomials_up_to(p, order)) {
        double s = 0.0;
        for (std::size_t q = 0; q < rule.weights.size(); ++q) {
          double m = rule.weights[q];
          for (int k = 0; k < p; ++k) m *= std::pow(rule.points(k, static_cast<Eigen::Index>(q)), e[k]);
          s += m;
        }
        CHECK(s == doctest::Approx(simplex_moment(e)).epsilon(1e-12));
      }
    }
  }
}
