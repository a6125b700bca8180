#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "calibr/hessian.hpp"
#include "calibr/polynomial.hpp"

namespace calibr {

/// An oriented p-simplex given by p+1 vertex indices, with a real multiplicity.
struct Simplex {
  std::vector<int> vertices;
  double multiplicity = 1.0;
};

/// Weighted oriented p-simplices in R^n sharing a vertex table.
class PolyhedralCurrent {
 public:
  PolyhedralCurrent() = default;
  /// `vertices` holds one point per column. Validates indices and non-degeneracy.
  PolyhedralCurrent(int p, Eigen::MatrixXd vertices, std::vector<Simplex> simplices);

  int dim() const { return static_cast<int>(vertices_.rows()); }
  int degree() const { return p_; }
  const Eigen::MatrixXd& vertices() const { return vertices_; }
  const std::vector<Simplex>& simplices() const { return simplices_; }
  std::size_t size() const { return simplices_.size(); }
  Eigen::VectorXd vertex(int i) const { return vertices_.col(i); }

  /// p-volume of simplex k.
  double volume(std::size_t k) const;
  /// Unit p-vector of simplex k, oriented by (v1 - v0, ..., vp - v0).
  ExteriorElement tangent(std::size_t k) const;
  SimplePlane tangent_plane(std::size_t k) const;
  /// Edge vectors v_i - v_0 as columns.
  Eigen::MatrixXd edges(std::size_t k) const;

  PolyhedralCurrent scaled(double s) const;
  /// Same vertices, reversed orientation.
  PolyhedralCurrent reversed() const;

 private:
  int p_ = 0;
  Eigen::MatrixXd vertices_;
  std::vector<Simplex> simplices_;
};

/// Sum of currents, identifying vertices that coincide within `merge_tol`.
PolyhedralCurrent add(const PolyhedralCurrent& a, const PolyhedralCurrent& b, double merge_tol = 1e-12);

/// Alternating-sign faces with multiplicities combined; faces whose total is
/// below `cancel_tol` in magnitude are dropped.
PolyhedralCurrent boundary(const PolyhedralCurrent& t, double cancel_tol = 1e-12);
double mass(const PolyhedralCurrent& t);

/// Integral of a form field over the current; the field is sampled at the
/// points of a degree-`order` simplex rule on every simplex.
double evaluate(const PolyhedralCurrent& t, const std::function<ExteriorElement(const Eigen::VectorXd&)>& alpha,
                int order, int threads = 0);
double evaluate(const PolyhedralCurrent& t, const PolyForm& alpha, int order = -1, int threads = 0);

struct PositivityViolation {
  std::size_t simplex = 0;
  double phi_value = 0.0;
  double multiplicity = 0.0;
};

struct PositiveCheck {
  bool positive = true;
  std::vector<PositivityViolation> violations;
  std::vector<double> phi_values;
};

PositiveCheck phi_positive_check(const PolyhedralCurrent& t, const ExteriorElement& phi, double tol = 1e-9);

struct CalibrationGap {
  double tphi = 0.0;
  double mass = 0.0;
  double gap = 0.0;
  bool positive = true;
};

CalibrationGap calibration_gap(const PolyhedralCurrent& t, const ExteriorElement& phi, double tol = 1e-9);

/// A current whose tangent planes are phi-planes within `flatness_tol`, with
/// the combinatorial data used by the discrete Laplacian.
struct MeshedSubmanifold {
  PolyhedralCurrent current;
  ExteriorElement phi;
  double flatness_tol = 1e-9;
  std::vector<bool> on_boundary;
  std::vector<std::vector<int>> neighbors;
  double min_phi = 1.0;

  static MeshedSubmanifold build(PolyhedralCurrent t, const ExteriorElement& phi, double flatness_tol = 1e-9);
  std::vector<int> interior_vertices() const;
  std::vector<int> boundary_vertices() const;
};

/// Deterministic mesh generators. Discs use a hexagonal lattice with 6k vertices
/// on ring k = 1..K, K = ceil(1/h): the rim is spaced evenly on the unit circle and
/// interior vertices are placed by a uniform Tutte solve. Vertex 0 is the centre.
/// Coordinates in R^4 are (x1, y1, x2, y2).
PolyhedralCurrent disc_mesh(double h);
/// Unit disc in the plane span(e_x1, cos(theta) e_y1 + sin(theta) e_x2).
PolyhedralCurrent tilted_disc_mesh(double theta, double h);
/// Graph of z2 = z1^2 over the unit disc.
PolyhedralCurrent graph_curve_mesh(double h);
/// Spherical cap of height `height` over the unit circle, bulging into the x2 direction.
PolyhedralCurrent cap_mesh(double height, double h);
/// Flat disc mesh embedded by an orthonormal n x 2 frame around `center`.
PolyhedralCurrent embedded_disc_mesh(const Eigen::MatrixXd& frame, const Eigen::VectorXd& center, double radius,
                                     double h);

/// Line-oriented format: header `n p`, `v x1 ... xn`, `s i0 ... ip mult` (0-based indices), '#' comments.
PolyhedralCurrent read_mesh(std::istream& in);
PolyhedralCurrent read_mesh_file(const std::string& path);
void write_mesh(std::ostream& out, const PolyhedralCurrent& t);

struct GreenTerm {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

struct GreenReport {
  /// Exact disc Green's function (true) or discrete cotangent solve (false).
  bool exact = false;
  int x_index = 0;
  std::vector<GreenTerm> terms;
  std::vector<int> mu_vertices;
  std::vector<double> mu_weights;
  double mu_sum = 0.0;
  double mu_min = 0.0;
  double g_min = 0.0;
  double max_residual = 0.0;
};

struct GreenOptions {
  /// Use the exact log profile when the rim is a circle about x.
  bool allow_exact = true;
  int order = 8;
  double plane_tol = 1e-9;
};

/// Weak form of the current equation for G_x [M] on a flat p = 2 mesh inside one phi-plane.
GreenReport green_check(const MeshedSubmanifold& m, int x_index, const std::vector<ScalarField>& tests,
                        const GreenOptions& opts = {});

enum class MaxPrincipleMode { Bounds, Lemma58 };

struct MaxPrincipleReport {
  MaxPrincipleMode mode = MaxPrincipleMode::Bounds;
  bool precondition_ok = false;
  std::string precondition;
  bool holds = false;
  double boundary_min = 0.0;
  double boundary_max = 0.0;
  /// Bounds: largest excursion of interior values outside [min, max] (<= 0 when inside).
  /// Lemma58: largest |d^phi f| on boundary tangents.
  double worst = 0.0;
};

struct MaxPrincipleOptions {
  double tol = 1e-9;
  /// Mod-d residual accepted for the bounds precondition.
  double modd_tol = 1e-8;
  int probes = 12;
};

/// `span` describes Lambda(phi) for the mod-d precondition; unused in Lemma58 mode.
MaxPrincipleReport max_principle_check(const MeshedSubmanifold& m, const ScalarField& f, MaxPrincipleMode mode,
                                       const LambdaSpan& span, const MaxPrincipleOptions& opts = {});

struct SubharmonicReport {
  bool precondition_ok = false;
  std::string precondition;
  bool holds = false;
  double min_laplacian = 0.0;
  double max_laplacian = 0.0;
  std::vector<double> laplacian;
  std::vector<int> vertices;
};

struct SubharmonicOptions {
  double mesh_tol = 1e-6;
  int probes = 8;
  PshOptions psh{};
};

/// Cotangent Laplace-Beltrami of f at interior vertices, after a psh check on sampled vertices.
SubharmonicReport restriction_subharmonicity(const MeshedSubmanifold& m, const ScalarField& f,
                                             const PlaneSampleSet& samples, const SubharmonicOptions& opts = {});

/// Cotangent Laplace-Beltrami of vertex values at each interior vertex (mixed Voronoi areas).
std::vector<double> cotangent_laplacian(const MeshedSubmanifold& m, const Eigen::VectorXd& values,
                                        std::vector<int>* vertices = nullptr);

}  // namespace calibr
