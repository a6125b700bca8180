#pragma once

#include <map>
#include <vector>

#include "calibr/exterior.hpp"

namespace calibr {

/// Real polynomial in n variables, stored as exponent vector -> coefficient.
class Polynomial {
 public:
  using Exponents = std::vector<int>;
  using Terms = std::map<Exponents, double>;

  Polynomial() = default;
  explicit Polynomial(int n) : n_(n) {}

  static Polynomial constant(int n, double c);
  /// The coordinate x_i (0-based).
  static Polynomial coordinate(int n, int i);
  static Polynomial monomial(int n, const Exponents& e, double c = 1.0);

  int vars() const { return n_; }
  const Terms& terms() const { return terms_; }
  int degree() const;
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Exponents& e, double c);
  double operator()(const Eigen::VectorXd& x) const;
  Polynomial derivative(int i) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

 private:
  int n_ = 0;
  Terms terms_;
};

/// All exponent vectors in n variables with total degree <= d, graded then lexicographic.
std::vector<Polynomial::Exponents> monomials_up_to(int n, int d);

/// Degree-p differential form on R^n with polynomial coefficients.
class PolyForm {
 public:
  using Terms = std::map<Blade, Polynomial, BladeLess>;

  PolyForm() = default;
  PolyForm(int n, int p) : n_(n), p_(p) {}

  /// Constant form times a polynomial.
  static PolyForm from_constant(const ExteriorElement& form, const Polynomial& coeff);

  int dim() const { return n_; }
  int degree() const { return p_; }
  const Terms& terms() const { return terms_; }
  int poly_degree() const;

  void add_term(Blade b, const Polynomial& c);
  ExteriorElement operator()(const Eigen::VectorXd& x) const;
  /// Exterior derivative, computed on the coefficients.
  PolyForm d() const;

  PolyForm& operator+=(const PolyForm& o);
  PolyForm& operator*=(double s);
  friend PolyForm operator+(PolyForm a, const PolyForm& b) { return a += b; }
  friend PolyForm operator*(PolyForm a, double s) { return a *= s; }

 private:
  int n_ = 0;
  int p_ = 0;
  Terms terms_;
};

/// Gauss-Legendre nodes and weights on [0, 1].
struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Rule1D gauss_legendre(int points);

/// Quadrature on the reference p-simplex {t >= 0, sum t <= 1} by collapsed
/// (Duffy) tensor products; exact for polynomials of total degree <= order.
struct SimplexRule {
  /// Barycentric-free reference coordinates, one column per point (p rows).
  Eigen::MatrixXd points;
  /// Weights summing to 1 (the integral of 1 over the simplex, normalized to unit volume).
  std::vector<double> weights;
};
SimplexRule simplex_rule(int p, int order);

}  // namespace calibr
