#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace calibr {

/// Raised when operands live in different ambient dimensions or degrees.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for malformed user input (JSON specs, meshes, options).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDropTol = 1e-14;
inline constexpr int kMaxDim = 62;

/// A strictly increasing multi-index i1 < ... < ip stored as a bitmask
/// (bit k set means index k+1 is present).
struct Blade {
  std::uint64_t bits = 0;

  int degree() const;
  /// 1-based indices in increasing order.
  std::vector<int> indices() const;
  static Blade from_indices(std::span<const int> one_based);
  bool contains(int zero_based) const { return (bits >> zero_based) & 1u; }

  friend bool operator==(Blade a, Blade b) { return a.bits == b.bits; }
};

/// Lexicographic order on index tuples of equal length.
struct BladeLess {
  bool operator()(Blade a, Blade b) const;
};

/// Sign of e_a ^ e_b relative to e_{a|b}; 0 when the blades overlap.
int wedge_sign(Blade a, Blade b);

/// All degree-p blades over n indices in lexicographic order.
std::vector<Blade> blades(int n, int p);
/// Position of `b` within blades(n, b.degree()).
std::size_t blade_rank(int n, Blade b);
std::size_t binomial(int n, int k);

/// Degree-p alternating tensor on R^n in the orthonormal multi-index basis.
/// Serves both for p-forms and p-vectors (Euclidean identification).
class ExteriorElement {
 public:
  using Terms = std::map<Blade, double, BladeLess>;

  ExteriorElement() = default;
  ExteriorElement(int n, int p);

  static ExteriorElement scalar(int n, double c);
  static ExteriorElement basis(int n, std::span<const int> one_based, double coeff = 1.0);
  static ExteriorElement basis(int n, std::initializer_list<int> one_based, double coeff = 1.0);
  static ExteriorElement vector(const Eigen::VectorXd& v);
  static ExteriorElement volume(int n);
  /// Coefficients in the lexicographic order of blades(n, p).
  static ExteriorElement from_dense(int n, int p, const Eigen::VectorXd& coeffs);

  int dim() const { return n_; }
  int degree() const { return p_; }
  const Terms& terms() const { return terms_; }
  bool is_zero(double tol = 0.0) const;

  double coeff(Blade b) const;
  double coeff(std::initializer_list<int> one_based) const;
  void add_term(Blade b, double c);

  Eigen::VectorXd to_dense() const;
  double norm() const;
  double max_abs() const;

  /// Drops coefficients with magnitude below `drop_tol`.
  ExteriorElement& normalize(double drop_tol = kDropTol);

  ExteriorElement& operator+=(const ExteriorElement& o);
  ExteriorElement& operator-=(const ExteriorElement& o);
  ExteriorElement& operator*=(double s);

  friend ExteriorElement operator+(ExteriorElement a, const ExteriorElement& b) { return a += b; }
  friend ExteriorElement operator-(ExteriorElement a, const ExteriorElement& b) { return a -= b; }
  friend ExteriorElement operator*(ExteriorElement a, double s) { return a *= s; }
  friend ExteriorElement operator*(double s, ExteriorElement a) { return a *= s; }
  friend ExteriorElement operator-(ExteriorElement a) { return a *= -1.0; }

 private:
  int n_ = 0;
  int p_ = 0;
  Terms terms_;
};

ExteriorElement wedge(const ExteriorElement& a, const ExteriorElement& b);
/// v ⌟ a, contraction in the first slot.
ExteriorElement interior_product(const Eigen::VectorXd& v, const ExteriorElement& a);
/// Extension of the endomorphism A (acting on covectors as A^T) as a derivation.
ExteriorElement derivation_extend(const Eigen::MatrixXd& A, const ExteriorElement& phi);
double pairing(const ExteriorElement& a, const ExteriorElement& b);
ExteriorElement hodge_star(const ExteriorElement& a);
/// Restriction of a form to the subspace spanned by the orthonormal columns
/// of `basis`, written in that basis.
ExteriorElement restrict_to(const ExteriorElement& a, const Eigen::MatrixXd& basis);
/// Pull a form written in the orthonormal basis `basis` back to the ambient space
/// (extension by zero on the orthogonal complement).
ExteriorElement extend_from(const ExteriorElement& a, const Eigen::MatrixXd& basis);

/// Oriented p-plane represented by an orthonormal frame (columns).
class SimplePlane {
 public:
  SimplePlane() = default;
  /// Takes an already orthonormal frame; validated within 1e-10.
  explicit SimplePlane(Eigen::MatrixXd frame);

  int dim() const { return static_cast<int>(frame_.rows()); }
  int degree() const { return static_cast<int>(frame_.cols()); }
  const Eigen::MatrixXd& frame() const { return frame_; }
  ExteriorElement pvector() const;
  /// Orthogonal projector onto the span.
  Eigen::MatrixXd projector() const { return frame_ * frame_.transpose(); }

 private:
  Eigen::MatrixXd frame_;
};

struct FrameResult {
  SimplePlane plane;
  ExteriorElement pvector;
};

/// Orientation-preserving Gram-Schmidt of the given columns, plus the unit
/// Plücker p-vector. Throws on a rank-deficient frame.
FrameResult simple_from_frame(const Eigen::MatrixXd& frame);
FrameResult simple_from_frame(const std::vector<Eigen::VectorXd>& vectors);

/// Plücker test: max over (p-1)-blades J of |(e_J ⌟ xi) ^ xi| / |xi|^2 <= tol.
bool is_simple(const ExteriorElement& xi, double tol = 1e-10);
/// Oriented plane of a simple p-vector (1 <= p), recovered as the kernel of v -> v ^ xi.
/// Throws InputError if xi is zero or not simple at `tol`.
SimplePlane plane_from_pvector(const ExteriorElement& xi, double tol = 1e-8);
double simplicity_defect(const ExteriorElement& xi);

/// Plücker coordinates of v1 ^ ... ^ vp for the columns of `frame`.
ExteriorElement plucker(const Eigen::MatrixXd& frame);

/// Orientation-preserving orthonormalization (QR with positive diagonal).
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& frame, double rank_tol = 1e-12);

std::string to_string(const ExteriorElement& a);

}  // namespace calibr
