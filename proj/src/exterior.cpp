#include "calibr/exterior.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace calibr {

namespace {

void require_dim(int n) {
  if (n <= 0 || n > kMaxDim) {
    throw DimensionError("ambient dimension must lie in [1, " + std::to_string(kMaxDim) + "], got " +
                         std::to_string(n));
  }
}

std::uint64_t low_mask(int k) { return k <= 0 ? 0 : ((std::uint64_t{1} << k) - 1); }

}  // namespace

int Blade::degree() const { return std::popcount(bits); }

std::vector<int> Blade::indices() const {
  std::vector<int> out;
  out.reserve(degree());
  for (std::uint64_t b = bits; b != 0; b &= b - 1) out.push_back(std::countr_zero(b) + 1);
  return out;
}

Blade Blade::from_indices(std::span<const int> one_based) {
  Blade b;
  int prev = 0;
  for (int i : one_based) {
    if (i <= prev || i > kMaxDim) throw InputError("multi-index must be strictly increasing and positive");
    b.bits |= std::uint64_t{1} << (i - 1);
    prev = i;
  }
  return b;
}

bool BladeLess::operator()(Blade a, Blade b) const {
  const int da = a.degree(), db = b.degree();
  if (da != db) return da < db;
  const std::uint64_t diff = a.bits ^ b.bits;
  if (diff == 0) return false;
  // The smallest index where the tuples first differ belongs to the smaller tuple.
  return (a.bits & (diff & (~diff + 1))) != 0;
}

int wedge_sign(Blade a, Blade b) {
  if (a.bits & b.bits) return 0;
  // Count inversions: pairs (i in a, j in b) with i > j.
  int inversions = 0;
  for (std::uint64_t bb = b.bits; bb != 0; bb &= bb - 1) {
    const int j = std::countr_zero(bb);
    inversions += std::popcount(a.bits & ~low_mask(j + 1));
  }
  return (inversions & 1) ? -1 : 1;
}

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  return r;
}

std::vector<Blade> blades(int n, int p) {
  require_dim(n);
  std::vector<Blade> out;
  if (p < 0 || p > n) return out;
  out.reserve(binomial(n, p));
  std::vector<int> c(p);
  for (int i = 0; i < p; ++i) c[i] = i;
  while (true) {
    Blade b;
    for (int i : c) b.bits |= std::uint64_t{1} << i;
    out.push_back(b);
    int k = p - 1;
    while (k >= 0 && c[k] == n - p + k) --k;
    if (k < 0) break;
    ++c[k];
    for (int i = k + 1; i < p; ++i) c[i] = c[i - 1] + 1;
  }
  return out;
}

std::size_t blade_rank(int n, Blade b) {
  const auto idx = b.indices();
  const int p = static_cast<int>(idx.size());
  std::size_t rank = 0;
  int prev = -1;
  for (int k = 0; k < p; ++k) {
    const int ck = idx[k] - 1;
    for (int j = prev + 1; j < ck; ++j) rank += binomial(n - 1 - j, p - k - 1);
    prev = ck;
  }
  return rank;
}

// ---------------------------------------------------------------------------

ExteriorElement::ExteriorElement(int n, int p) : n_(n), p_(p) {
  require_dim(n);
  if (p < 0 || p > n) throw DimensionError("degree must lie in [0, n]");
}

ExteriorElement ExteriorElement::scalar(int n, double c) {
  ExteriorElement e(n, 0);
  e.add_term(Blade{}, c);
  return e;
}

ExteriorElement ExteriorElement::basis(int n, std::span<const int> one_based, double coeff) {
  ExteriorElement e(n, static_cast<int>(one_based.size()));
  const Blade b = Blade::from_indices(one_based);
  if (!one_based.empty() && one_based.back() > n) throw InputError("multi-index exceeds ambient dimension");
  e.add_term(b, coeff);
  return e;
}

ExteriorElement ExteriorElement::basis(int n, std::initializer_list<int> one_based, double coeff) {
  return basis(n, std::span<const int>(one_based.begin(), one_based.size()), coeff);
}

ExteriorElement ExteriorElement::vector(const Eigen::VectorXd& v) {
  ExteriorElement e(static_cast<int>(v.size()), 1);
  for (int i = 0; i < v.size(); ++i) e.add_term(Blade{std::uint64_t{1} << i}, v[i]);
  return e;
}

ExteriorElement ExteriorElement::volume(int n) {
  ExteriorElement e(n, n);
  e.add_term(Blade{low_mask(n)}, 1.0);
  return e;
}

ExteriorElement ExteriorElement::from_dense(int n, int p, const Eigen::VectorXd& coeffs) {
  ExteriorElement e(n, p);
  const auto bl = blades(n, p);
  if (static_cast<std::size_t>(coeffs.size()) != bl.size()) throw DimensionError("dense coefficient length mismatch");
  for (std::size_t i = 0; i < bl.size(); ++i) e.add_term(bl[i], coeffs[static_cast<Eigen::Index>(i)]);
  return e;
}

bool ExteriorElement::is_zero(double tol) const {
  for (const auto& [b, c] : terms_) {
    if (std::abs(c) > tol) return false;
  }
  return true;
}

double ExteriorElement::coeff(Blade b) const {
  auto it = terms_.find(b);
  return it == terms_.end() ? 0.0 : it->second;
}

double ExteriorElement::coeff(std::initializer_list<int> one_based) const {
  return coeff(Blade::from_indices(std::span<const int>(one_based.begin(), one_based.size())));
}

void ExteriorElement::add_term(Blade b, double c) {
  if (b.degree() != p_) throw DimensionError("term degree does not match element degree");
  if (n_ < 64 && (b.bits >> n_) != 0) throw DimensionError("term index exceeds ambient dimension");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(b, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

Eigen::VectorXd ExteriorElement::to_dense() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(binomial(n_, p_)));
  for (const auto& [b, c] : terms_) v[static_cast<Eigen::Index>(blade_rank(n_, b))] = c;
  return v;
}

double ExteriorElement::norm() const {
  double s = 0.0;
  for (const auto& [b, c] : terms_) s += c * c;
  return std::sqrt(s);
}

double ExteriorElement::max_abs() const {
  double m = 0.0;
  for (const auto& [b, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

ExteriorElement& ExteriorElement::normalize(double drop_tol) {
  std::erase_if(terms_, [&](const auto& kv) { return std::abs(kv.second) < drop_tol; });
  return *this;
}

ExteriorElement& ExteriorElement::operator+=(const ExteriorElement& o) {
  if (o.n_ != n_ || o.p_ != p_) throw DimensionError("sum of elements with different (n, p)");
  for (const auto& [b, c] : o.terms_) add_term(b, c);
  return *this;
}

ExteriorElement& ExteriorElement::operator-=(const ExteriorElement& o) {
  if (o.n_ != n_ || o.p_ != p_) throw DimensionError("difference of elements with different (n, p)");
  for (const auto& [b, c] : o.terms_) add_term(b, -c);
  return *this;
}

ExteriorElement& ExteriorElement::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [b, c] : terms_) c *= s;
  return *this;
}

// ---------------------------------------------------------------------------

ExteriorElement wedge(const ExteriorElement& a, const ExteriorElement& b) {
  if (a.dim() != b.dim()) throw DimensionError("wedge: dimension mismatch");
  if (a.degree() + b.degree() > a.dim()) throw DimensionError("wedge: degree overflow");
  ExteriorElement out(a.dim(), a.degree() + b.degree());
  for (const auto& [ba, ca] : a.terms()) {
    for (const auto& [bb, cb] : b.terms()) {
      const int s = wedge_sign(ba, bb);
      if (s != 0) out.add_term(Blade{ba.bits | bb.bits}, s * ca * cb);
    }
  }
  return out.normalize();
}

ExteriorElement interior_product(const Eigen::VectorXd& v, const ExteriorElement& a) {
  if (v.size() != a.dim()) throw DimensionError("interior_product: dimension mismatch");
  if (a.degree() < 1) throw DimensionError("interior_product: cannot contract a degree-0 element");
  ExteriorElement out(a.dim(), a.degree() - 1);
  for (const auto& [b, c] : a.terms()) {
    for (std::uint64_t bb = b.bits; bb != 0; bb &= bb - 1) {
      const int k = std::countr_zero(bb);
      if (v[k] == 0.0) continue;
      const int pos = std::popcount(b.bits & low_mask(k));
      out.add_term(Blade{b.bits & ~(std::uint64_t{1} << k)}, ((pos & 1) ? -1.0 : 1.0) * v[k] * c);
    }
  }
  return out.normalize();
}

ExteriorElement derivation_extend(const Eigen::MatrixXd& A, const ExteriorElement& phi) {
  const int n = phi.dim();
  if (A.rows() != n || A.cols() != n) throw DimensionError("derivation_extend: matrix must be n x n");
  ExteriorElement out(n, phi.degree());
  for (const auto& [b, c] : phi.terms()) {
    // Replace dx_i (slot i) by A^* dx_i = sum_j A(i, j) dx_j.
    for (std::uint64_t bb = b.bits; bb != 0; bb &= bb - 1) {
      const int i = std::countr_zero(bb);
      const std::uint64_t rest = b.bits & ~(std::uint64_t{1} << i);
      const int pos_i = std::popcount(b.bits & low_mask(i));
      for (int j = 0; j < n; ++j) {
        const double aij = A(i, j);
        if (aij == 0.0) continue;
        if (j != i && (rest >> j) & 1u) continue;
        const int pos_j = std::popcount(rest & low_mask(j));
        const double sign = ((pos_i + pos_j) & 1) ? -1.0 : 1.0;
        out.add_term(Blade{rest | (std::uint64_t{1} << j)}, sign * aij * c);
      }
    }
  }
  return out.normalize();
}

double pairing(const ExteriorElement& a, const ExteriorElement& b) {
  if (a.dim() != b.dim() || a.degree() != b.degree()) throw DimensionError("pairing: (n, p) mismatch");
  const auto& small = a.terms().size() <= b.terms().size() ? a : b;
  const auto& large = &small == &a ? b : a;
  double s = 0.0;
  for (const auto& [bl, c] : small.terms()) s += c * large.coeff(bl);
  return s;
}

ExteriorElement hodge_star(const ExteriorElement& a) {
  const int n = a.dim();
  ExteriorElement out(n, n - a.degree());
  const std::uint64_t all = low_mask(n);
  for (const auto& [b, c] : a.terms()) {
    const Blade comp{all & ~b.bits};
    out.add_term(comp, wedge_sign(b, comp) * c);
  }
  return out;
}

ExteriorElement plucker(const Eigen::MatrixXd& frame) {
  const int n = static_cast<int>(frame.rows());
  const int p = static_cast<int>(frame.cols());
  ExteriorElement out(n, p);
  if (p == 0) {
    out.add_term(Blade{}, 1.0);
    return out;
  }
  Eigen::MatrixXd minor(p, p);
  for (Blade b : blades(n, p)) {
    int r = 0;
    for (std::uint64_t bb = b.bits; bb != 0; bb &= bb - 1, ++r) minor.row(r) = frame.row(std::countr_zero(bb));
    out.add_term(b, minor.determinant());
  }
  return out.normalize();
}

ExteriorElement restrict_to(const ExteriorElement& a, const Eigen::MatrixXd& basis) {
  if (basis.rows() != a.dim()) throw DimensionError("restrict_to: basis has wrong ambient dimension");
  const int m = static_cast<int>(basis.cols());
  const int p = a.degree();
  ExteriorElement out(m, p);
  Eigen::MatrixXd minor(p, p);
  for (Blade target : blades(m, p)) {
    const auto cols = target.indices();
    double v = 0.0;
    for (const auto& [b, c] : a.terms()) {
      int r = 0;
      for (std::uint64_t bb = b.bits; bb != 0; bb &= bb - 1, ++r) {
        for (int k = 0; k < p; ++k) minor(r, k) = basis(std::countr_zero(bb), cols[k] - 1);
      }
      v += c * (p == 0 ? 1.0 : minor.determinant());
    }
    out.add_term(target, v);
  }
  return out.normalize();
}

ExteriorElement extend_from(const ExteriorElement& a, const Eigen::MatrixXd& basis) {
  if (basis.cols() != a.dim()) throw DimensionError("extend_from: basis has wrong subspace dimension");
  const int n = static_cast<int>(basis.rows());
  ExteriorElement out(n, a.degree());
  for (const auto& [b, c] : a.terms()) {
    const auto idx = b.indices();
    Eigen::MatrixXd frame(n, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) frame.col(static_cast<Eigen::Index>(k)) = basis.col(idx[k] - 1);
    out += plucker(frame) * c;
  }
  return out.normalize();
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& frame, double rank_tol) {
  const Eigen::Index p = frame.cols();
  Eigen::MatrixXd q = frame;
  // Modified Gram-Schmidt twice; keeps the orientation of the input frame.
  for (Eigen::Index k = 0; k < p; ++k) {
    const double scale = frame.col(k).norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < k; ++j) q.col(k) -= q.col(j).dot(q.col(k)) * q.col(j);
    }
    const double nk = q.col(k).norm();
    if (!(nk > rank_tol * std::max(1.0, scale))) throw InputError("rank-deficient frame");
    q.col(k) /= nk;
  }
  return q;
}

SimplePlane::SimplePlane(Eigen::MatrixXd frame) : frame_(std::move(frame)) {
  const Eigen::Index p = frame_.cols();
  const Eigen::MatrixXd gram = frame_.transpose() * frame_;
  if ((gram - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff() > 1e-10) {
    throw InputError("SimplePlane frame is not orthonormal");
  }
}

ExteriorElement SimplePlane::pvector() const { return plucker(frame_); }

FrameResult simple_from_frame(const Eigen::MatrixXd& frame) {
  Eigen::MatrixXd q = orthonormalize(frame);
  SimplePlane plane(q);
  ExteriorElement xi = plane.pvector();
  return {std::move(plane), std::move(xi)};
}

FrameResult simple_from_frame(const std::vector<Eigen::VectorXd>& vectors) {
  if (vectors.empty()) throw InputError("empty frame");
  Eigen::MatrixXd m(vectors.front().size(), static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    if (vectors[k].size() != m.rows()) throw DimensionError("frame vectors of different length");
    m.col(static_cast<Eigen::Index>(k)) = vectors[k];
  }
  return simple_from_frame(m);
}

double simplicity_defect(const ExteriorElement& xi) {
  const double nrm = xi.norm();
  if (nrm == 0.0) throw InputError("is_simple: zero input");
  const int n = xi.dim();
  const int p = xi.degree();
  if (p <= 1 || p >= n - 1) return 0.0;
  double worst = 0.0;
  for (Blade j : blades(n, p - 1)) {
    ExteriorElement v = xi;
    // Contract successively with e_{j1}, ..., e_{j(p-1)}; the overall sign is irrelevant here.
    for (int idx : j.indices()) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e[idx - 1] = 1.0;
      v = interior_product(e, v);
    }
    if (v.is_zero()) continue;
    worst = std::max(worst, wedge(v, xi).norm());
  }
  return worst / (nrm * nrm);
}

bool is_simple(const ExteriorElement& xi, double tol) { return simplicity_defect(xi) <= tol; }

std::string to_string(const ExteriorElement& a) {
  std::ostringstream os;
  os.precision(10);
  bool first = true;
  for (const auto& [b, c] : a.terms()) {
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    first = false;
    os << std::abs(c) << "*e";
    for (int i : b.indices()) os << i;
  }
  if (first) os << "0";
  return os.str();
}

}  // namespace calibr

namespace calibr {

SimplePlane plane_from_pvector(const ExteriorElement& xi, double tol) {
  const int n = xi.dim();
  const int p = xi.degree();
  if (p < 1) throw InputError("plane_from_pvector: degree 0 has no plane");
  if (xi.is_zero() || simplicity_defect(xi) > tol) throw InputError("plane_from_pvector: not a simple p-vector");
  Eigen::MatrixXd frame;
  if (p == n) {
    frame = Eigen::MatrixXd::Identity(n, n);
  } else {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(binomial(n, p + 1)), n);
    for (int i = 0; i < n; ++i) {
      m.col(i) = wedge(ExteriorElement::vector(Eigen::VectorXd::Unit(n, i)), xi).to_dense();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    frame = svd.matrixV().rightCols(p);
  }
  frame = orthonormalize(frame);
  if (pairing(plucker(frame), xi) < 0.0) frame.col(0) *= -1.0;
  return SimplePlane(frame);
}

}  // namespace calibr
