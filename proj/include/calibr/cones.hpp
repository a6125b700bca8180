#pragma once

#include <optional>
#include <string>
#include <vector>

#include "calibr/calibration.hpp"
#include "calibr/grassmann.hpp"

namespace calibr {

enum class ConeStatus { Interior, Boundary, Outside };

const char* to_string(ConeStatus s);

struct ConeReport {
  ConeStatus status = ConeStatus::Outside;
  /// Membership: depth along the mean atom direction, or -(L1 residual) when outside.
  /// Positivity: min of alpha over G(phi).
  double margin = 0.0;
  std::vector<double> weights;
  std::vector<SimplePlane> planes;
  std::optional<SimplePlane> witness;
  /// Separating form for an Outside membership answer: positive on xi, <= 0 on all atoms.
  std::optional<ExteriorElement> separator;
  double residual = 0.0;
  double tol = 0.0;
  double boundary_tol = 1e-6;
  std::size_t sample_count = 0;
  int augmented = 0;
};

/// Orthonormal basis (dense lexicographic coordinates, columns) for the span of sampled p-vectors.
struct LambdaSpan {
  int n = 0;
  int p = 0;
  Eigen::MatrixXd basis;

  int dim() const { return static_cast<int>(basis.cols()); }
  Eigen::MatrixXd complement() const;
  /// Orthogonal projection of a p-vector or p-form onto the span.
  ExteriorElement project(const ExteriorElement& a) const;
};

LambdaSpan lambda_span(const PlaneSampleSet& samples, double cutoff = 1e-8);

struct ConeOptions {
  /// Residual accepted as membership, relative to max(1, |xi|).
  double tol = 1e-9;
  double boundary_tol = 1e-6;
  int max_rounds = 30;
  /// Require sum of weights = 1 (membership in the convex hull instead of the cone).
  bool convex = false;
  ExtremumOptions extremum{};
};

ConeReport cone_membership(const ExteriorElement& xi, const PlaneSampleSet& samples, const ConeOptions& opts = {});

struct MassOptions {
  /// Stop once upper - lower <= tol * max(1, upper), or when no dual constraint is violated by more than tol.
  double tol = 1e-6;
  int max_rounds = 60;
  /// Values converge quadratically in the gradient norm, so a loose gradient tolerance suffices.
  ComassOptions comass{.multistarts = 24, .max_iter = 2000, .tol = 1e-9};
};

struct MassBracket {
  double upper = 0.0;
  double lower = 0.0;
  /// Dual form attaining the lower bound, scaled to comass 1.
  ExteriorElement dual;
  std::vector<double> weights;
  std::vector<SimplePlane> planes;
  int generators = 0;
  int rounds = 0;
};

/// Brackets the mass norm by a signed decomposition into unit simple p-vectors (upper)
/// and a comass-normalized dual form (lower). Coordinate blades are always included.
MassBracket mass_norm_estimate(const ExteriorElement& xi, const std::vector<SimplePlane>& generators = {},
                               const MassOptions& opts = {});

struct PositivityOptions {
  double tol = 1e-6;
  ExtremumOptions extremum{};
};

ConeReport positivity_classify(const ExteriorElement& alpha, const PlaneSampleSet& samples,
                               const PositivityOptions& opts = {});

struct ContractionReport {
  ExteriorElement phi_e;
  ConeReport report;
  /// max over G(phi) of |proj_xi e|^2, via the symbol e ^ (e -| phi).
  double max_projection = 0.0;
  bool span_criterion_boundary = false;
  bool consistent = true;
  std::string discrepancy;
};

ContractionReport contraction_boundary(const Eigen::VectorXd& e, const PlaneSampleSet& samples,
                                       const PositivityOptions& opts = {});

struct Lemma25Report {
  double mass_lower = 0.0;
  double mass_upper = 0.0;
  bool in_cone = false;
  bool in_hull = false;
  bool unit_value = false;
  double phi_value = 0.0;
  ConeReport cone;
  ConeReport hull;
  bool agree = false;
};

/// The three equivalent conditions for unit-mass p-vectors: cone membership,
/// convex-hull membership, and phi(xi) = 1. Throws InputError when the mass
/// bracket does not contain 1.
Lemma25Report lemma_2_5_check(const ExteriorElement& xi, const PlaneSampleSet& samples, double tol = 1e-6,
                              const std::vector<SimplePlane>& generators = {});

struct PositiveBasis {
  std::vector<ExteriorElement> elements;
  std::vector<double> margins;
  double epsilon = 0.0;
  int rank = 0;
};

PositiveBasis positive_basis(const PlaneSampleSet& samples, double epsilon = 0.1, const PositivityOptions& opts = {});

}  // namespace calibr
