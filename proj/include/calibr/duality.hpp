#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "calibr/calibration.hpp"
#include "calibr/currents.hpp"
#include "calibr/grassmann.hpp"
#include "calibr/polynomial.hpp"

namespace calibr {

struct DualityTolerances {
  /// Feasible weights must reproduce the constraints within this.
  double feasibility = 1e-7;
  /// Smallest separation accepted for a dual certificate (coefficients normalized to sup-norm 1).
  double margin = 1e-6;
  /// Dictionary planes need phi(xi) >= 1 - plane.
  double plane = 1e-6;
  double lp = 1e-9;
};

struct DualityModelOptions {
  /// Planes drawn from the sampled phi-Grassmannian, per site.
  int dictionary = 12;
  /// Also put every coordinate p-plane calibrated by phi into the dictionary.
  bool coordinate_planes = true;
  std::uint64_t seed = 7;
  int threads = 0;
  DualityTolerances tol{};
};

/// Point sites, each carrying a dictionary of phi-planes, with a bounding box for the test families.
struct FiniteDualityModel {
  Calibration calibration;
  std::vector<Eigen::VectorXd> sites;
  std::vector<std::vector<SimplePlane>> dictionary;
  Eigen::VectorXd box_center;
  Eigen::VectorXd box_half_width;
  DualityTolerances tol;

  static FiniteDualityModel build(const Calibration& cal, std::vector<Eigen::VectorXd> sites,
                                  const DualityModelOptions& opts = {});
  /// Model with an explicit dictionary (validated against phi).
  static FiniteDualityModel with_dictionary(const Calibration& cal, std::vector<Eigen::VectorXd> sites,
                                            std::vector<std::vector<SimplePlane>> dictionary,
                                            const DualityTolerances& tol = {});

  int dim() const { return calibration.dim(); }
  std::size_t atom_count() const;
  /// Tensor Legendre polynomials of total degree <= d, orthonormal over the box.
  std::vector<Polynomial> scalar_family(int degree) const;
  /// Scalar family times each basis (p-1)-form.
  std::vector<PolyForm> form_family(int degree) const;
};

struct AtomRef {
  int site = 0;
  int plane = 0;
};

/// S = boundary of (weight * delta_point * xi).
struct BoundaryAtom {
  Eigen::VectorXd point;
  SimplePlane plane;
  double weight = 1.0;
};

/// Rows: test forms beta_k. Columns: atoms delta_{x_i} xi_ij, entries d(beta_k)(x_i)(xi_ij).
struct BoundaryModel {
  int family_degree = 0;
  std::vector<PolyForm> tests;
  std::vector<AtomRef> atoms;
  Eigen::MatrixXd matrix;
  Eigen::VectorXd atom_phi;
};

BoundaryModel assemble_boundary_model(const FiniteDualityModel& model, int degree);
/// Values S(beta_k) of a boundary of atoms.
Eigen::VectorXd boundary_values(const BoundaryModel& bm, const std::vector<BoundaryAtom>& atoms);
/// Values S(beta_k) of a polyhedral (p-1)-current.
Eigen::VectorXd boundary_values(const BoundaryModel& bm, const PolyhedralCurrent& s, int threads = 0);

struct AlternativeResult {
  bool feasible = false;
  /// Atom weights (boundary and Jensen models).
  Eigen::VectorXd weights;
  /// Probability weights on K (Jensen model only).
  Eigen::VectorXd mu;
  double primal_residual = 0.0;
  double primal_mass = 0.0;

  bool certificate = false;
  /// Coefficients of the separating test element in the model's family.
  Eigen::VectorXd coefficients;
  /// Homogenizing scale: the phi weight (bounded boundary model) or the separating level (Jensen).
  double scale = 0.0;
  double margin = 0.0;

  bool consistent = false;
  /// Neither side succeeds within tolerance: a tie, excluded from the alternative count.
  bool boundary_tie = false;
  std::optional<double> lambda;
  int family_degree = 0;
  int family_size = 0;
  int dictionary_size = 0;
  int lp_iterations = 0;
};

/// Finite alternative for S = boundary of a positive atom combination, with mass bound `lambda` if given.
AlternativeResult boundary_alternative(const BoundaryModel& bm, const Eigen::VectorXd& s,
                                       std::optional<double> lambda, const DualityTolerances& tol = {});

/// Least mass of a positive atom combination with boundary S, or nullopt when none exists.
std::optional<double> min_mass(const BoundaryModel& bm, const Eigen::VectorXd& s, const DualityTolerances& tol = {});

/// Smallest lambda with a feasible bounded primal, found by bisection on boundary_alternative.
std::optional<double> lambda_threshold(const BoundaryModel& bm, const Eigen::VectorXd& s, double rel_tol = 1e-10,
                                       const DualityTolerances& tol = {});

/// Rows: family f_k. B holds (dd^phi f_k)(x_i)(xi_ij); F holds f_k on K.
struct JensenModel {
  int family_degree = 0;
  std::vector<Polynomial> family;
  std::vector<AtomRef> atoms;
  std::vector<int> k_sites;
  int x_site = 0;
  Eigen::MatrixXd hessian_rows;
  Eigen::MatrixXd k_values;
  Eigen::VectorXd x_values;
  /// f_k at every site (columns).
  Eigen::MatrixXd site_values;
};

JensenModel assemble_jensen_model(const FiniteDualityModel& model, const std::vector<int>& k_sites, int x_site,
                                  int degree);

AlternativeResult jensen_alternative(const JensenModel& jm, const DualityTolerances& tol = {});
AlternativeResult jensen_alternative(const FiniteDualityModel& model, const std::vector<int>& k_sites, int x_site,
                                     int degree);

struct SupportDiagnostic {
  /// Per weighted atom site: largest f(x_i) - max_K f over finite-psh f with sup-norm coefficients <= 1.
  std::vector<int> sites;
  std::vector<double> excess;
  double worst = 0.0;
  bool consistent = true;
};

/// Finite shadow of the support lemma for a feasible Jensen primal.
SupportDiagnostic support_diagnostic(const JensenModel& jm, const AlternativeResult& primal,
                                     const DualityTolerances& tol = {});

/// One instance of a seeded random batch.
struct BatchInstance {
  int index = 0;
  AlternativeResult result;
  /// Jensen batches: whether x was drawn as a convex combination of K.
  bool in_hull_draw = false;
};

struct BatchSummary {
  int instances = 0;
  int consistent = 0;
  int ties = 0;
  int feasible = 0;
  int certificates = 0;
  /// Consistency over the non-tie instances.
  bool all_consistent() const { return consistent + ties == instances; }
};

BatchSummary summarize(const std::vector<BatchInstance>& batch);

/// S = A c for sparse c with three random signed entries; instance i uses stream (seed, i).
std::vector<BatchInstance> random_boundary_batch(const BoundaryModel& bm, int count, std::uint64_t seed,
                                                 std::optional<double> lambda = std::nullopt, int threads = 0,
                                                 const DualityTolerances& tol = {});

/// Four Gaussian K sites in R^n (n = calibration dimension) and a target x. Even
/// instances draw x as a convex combination of K, odd ones as a Gaussian point.
std::vector<BatchInstance> random_jensen_batch(const Calibration& cal, int count, int degree, std::uint64_t seed,
                                               const DualityModelOptions& opts = {});

struct LambdaSweep {
  std::optional<double> min_mass;
  std::optional<double> threshold;
  /// (lambda, feasible) on a grid of multiples of min_mass.
  std::vector<std::pair<double, bool>> samples;
  bool monotone = false;
  bool threshold_matches = false;
};

/// Feasibility along lambda in {0.5, 0.9, 0.999, 1.001, 1.1, 2} * min_mass,
/// and the bisected threshold against min_mass within `match_tol`.
LambdaSweep lambda_sweep(const BoundaryModel& bm, const Eigen::VectorXd& s, double match_tol = 1e-7,
                         const DualityTolerances& tol = {});

}  // namespace calibr
