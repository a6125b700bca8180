#include "calibr/polynomial.hpp"

#include <cmath>
#include <numeric>

namespace calibr {

namespace {

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

void check_vars(int a, int b) {
  if (a != b) throw DimensionError("polynomial variable count mismatch");
}

}  // namespace

Polynomial Polynomial::constant(int n, double c) {
  Polynomial q(n);
  q.add_term(Exponents(static_cast<std::size_t>(n), 0), c);
  return q;
}

Polynomial Polynomial::coordinate(int n, int i) {
  Exponents e(static_cast<std::size_t>(n), 0);
  e.at(static_cast<std::size_t>(i)) = 1;
  return monomial(n, e);
}

Polynomial Polynomial::monomial(int n, const Exponents& e, double c) {
  Polynomial q(n);
  q.add_term(e, c);
  return q;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
  return d;
}

void Polynomial::add_term(const Exponents& e, double c) {
  if (static_cast<int>(e.size()) != n_) throw DimensionError("exponent vector has wrong length");
  for (int k : e) {
    if (k < 0) throw InputError("negative exponent");
  }
  auto [it, inserted] = terms_.emplace(e, c);
  if (!inserted) it->second += c;
  if (it->second == 0.0) terms_.erase(it);
}

double Polynomial::operator()(const Eigen::VectorXd& x) const {
  if (x.size() != n_) throw DimensionError("point has wrong dimension");
  double s = 0.0;
  for (const auto& [e, c] : terms_) {
    double m = c;
    for (int i = 0; i < n_; ++i) m *= ipow(x[i], e[static_cast<std::size_t>(i)]);
    s += m;
  }
  return s;
}

Polynomial Polynomial::derivative(int i) const {
  Polynomial r(n_);
  for (const auto& [e, c] : terms_) {
    const int k = e.at(static_cast<std::size_t>(i));
    if (k == 0) continue;
    Exponents f = e;
    f[static_cast<std::size_t>(i)] = k - 1;
    r.add_term(f, c * k);
  }
  return r;
}

Eigen::VectorXd Polynomial::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g(n_);
  for (int i = 0; i < n_; ++i) g[i] = derivative(i)(x);
  return g;
}

Eigen::MatrixXd Polynomial::hessian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd h(n_, n_);
  for (int i = 0; i < n_; ++i) {
    const Polynomial di = derivative(i);
    for (int j = i; j < n_; ++j) h(i, j) = h(j, i) = di.derivative(j)(x);
  }
  return h;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (n_ == 0 && terms_.empty()) n_ = o.n_;
  check_vars(n_, o.n_);
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (n_ == 0 && terms_.empty()) n_ = o.n_;
  check_vars(n_, o.n_);
  for (const auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  check_vars(a.n_, b.n_);
  Polynomial r(a.n_);
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      Polynomial::Exponents e(ea.size());
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      r.add_term(e, ca * cb);
    }
  }
  return r;
}

std::vector<Polynomial::Exponents> monomials_up_to(int n, int d) {
  std::vector<Polynomial::Exponents> out;
  Polynomial::Exponents e(static_cast<std::size_t>(n), 0);
  for (int total = 0; total <= d; ++total) {
    // Enumerate compositions of `total` into n parts, lexicographically descending in the first slot.
    std::vector<Polynomial::Exponents> level;
    auto rec = [&](auto&& self, int i, int left) -> void {
      if (i == n - 1) {
        e[static_cast<std::size_t>(i)] = left;
        level.push_back(e);
        return;
      }
      for (int k = left; k >= 0; --k) {
        e[static_cast<std::size_t>(i)] = k;
        self(self, i + 1, left - k);
      }
    };
    if (n > 0) rec(rec, 0, total);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

PolyForm PolyForm::from_constant(const ExteriorElement& form, const Polynomial& coeff) {
  check_vars(form.dim(), coeff.vars());
  PolyForm r(form.dim(), form.degree());
  for (const auto& [b, c] : form.terms()) r.add_term(b, coeff * c);
  return r;
}

int PolyForm::poly_degree() const {
  int d = 0;
  for (const auto& [b, c] : terms_) d = std::max(d, c.degree());
  return d;
}

void PolyForm::add_term(Blade b, const Polynomial& c) {
  if (b.degree() != p_) throw DimensionError("blade degree does not match form degree");
  if (c.vars() != n_ && !c.is_zero()) throw DimensionError("coefficient has wrong variable count");
  auto it = terms_.find(b);
  if (it == terms_.end()) {
    if (!c.is_zero()) terms_.emplace(b, c);
    return;
  }
  it->second += c;
  if (it->second.is_zero()) terms_.erase(it);
}

ExteriorElement PolyForm::operator()(const Eigen::VectorXd& x) const {
  ExteriorElement r(n_, p_);
  for (const auto& [b, c] : terms_) r.add_term(b, c(x));
  return r;
}

PolyForm PolyForm::d() const {
  if (p_ >= n_) return PolyForm(n_, p_ + 1);
  PolyForm r(n_, p_ + 1);
  for (const auto& [b, c] : terms_) {
    for (int i = 0; i < n_; ++i) {
      if (b.contains(i)) continue;
      const Blade bi{std::uint64_t{1} << i};
      const Polynomial di = c.derivative(i);
      if (di.is_zero()) continue;
      r.add_term(Blade{b.bits | bi.bits}, di * static_cast<double>(wedge_sign(bi, b)));
    }
  }
  return r;
}

PolyForm& PolyForm::operator+=(const PolyForm& o) {
  if (n_ != o.n_ || p_ != o.p_) throw DimensionError("form dimension or degree mismatch");
  for (const auto& [b, c] : o.terms_) add_term(b, c);
  return *this;
}

PolyForm& PolyForm::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [b, c] : terms_) c *= s;
  return *this;
}

Rule1D gauss_legendre(int points) {
  if (points < 1) throw InputError("quadrature needs at least one point");
  // Golub-Welsch: eigen-decomposition of the Jacobi matrix of the Legendre recurrence.
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  Rule1D r;
  for (int k = 0; k < points; ++k) {
    r.nodes.push_back(0.5 * (es.eigenvalues()[k] + 1.0));
    const double v0 = es.eigenvectors()(0, k);
    r.weights.push_back(v0 * v0);
  }
  return r;
}

SimplexRule simplex_rule(int p, int order) {
  if (p < 0) throw InputError("negative simplex dimension");
  SimplexRule rule;
  if (p == 0) {
    rule.points = Eigen::MatrixXd(0, 1);
    rule.weights = {1.0};
    return rule;
  }
  const int m = std::max(1, (std::max(0, order) + p) / 2 + 1);
  const Rule1D g = gauss_legendre(m);
  double factorial = 1.0;
  for (int k = 2; k <= p; ++k) factorial *= k;

  std::vector<int> idx(static_cast<std::size_t>(p), 0);
  const std::size_t total = static_cast<std::size_t>(std::pow(m, p));
  rule.points.resize(p, static_cast<Eigen::Index>(total));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int k = 0; k < p; ++k) {
      idx[static_cast<std::size_t>(k)] = static_cast<int>(rem % static_cast<std::size_t>(m));
      rem /= static_cast<std::size_t>(m);
    }
    double scale = 1.0;
    double w = factorial;
    for (int k = 0; k < p; ++k) {
      const double u = g.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
      w *= g.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
      if (k + 1 < p) {
        rule.points(k, static_cast<Eigen::Index>(flat)) = scale * u;
        w *= ipow(1.0 - u, p - 1 - k);
        scale *= 1.0 - u;
      } else {
        rule.points(k, static_cast<Eigen::Index>(flat)) = scale * u;
      }
    }
    rule.weights.push_back(w);
  }
  return rule;
}

}  // namespace calibr
