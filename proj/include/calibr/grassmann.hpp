#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "calibr/calibration.hpp"
#include "calibr/exterior.hpp"

namespace calibr {

/// A constant p-form compiled for repeated evaluation on n x p frames:
/// phi(V) = sum_I c_I det(V[I, :]).
class CompiledForm {
 public:
  explicit CompiledForm(const ExteriorElement& form);

  int dim() const { return n_; }
  int degree() const { return p_; }
  double value(const Eigen::MatrixXd& frame) const;
  /// Value and Euclidean gradient with respect to the frame entries.
  double value_and_gradient(const Eigen::MatrixXd& frame, Eigen::MatrixXd& grad) const;

 private:
  int n_ = 0;
  int p_ = 0;
  std::vector<int> rows_;  // p row indices per term
  std::vector<double> coeffs_;
};

struct AscentOptions {
  int max_iter = 4000;
  double grad_tol = 1e-12;
};

struct AscentResult {
  Eigen::MatrixXd frame;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Projected-gradient ascent of a form over oriented p-planes, starting from
/// `start`. The gradient is projected to the horizontal space (I - V V^T) G and
/// each step is retracted by orientation-preserving re-orthonormalization.
AscentResult ascend(const CompiledForm& form, const Eigen::MatrixXd& start, const AscentOptions& opts = {});

/// Random orthonormal n x p frame (Gaussian, then Gram-Schmidt).
Eigen::MatrixXd random_frame(int n, int p, std::mt19937_64& rng);

struct ComassOptions {
  int multistarts = 64;
  int max_iter = 4000;
  double tol = 1e-12;
  std::uint64_t seed = 7;
  int threads = 0;
  /// Number of top starts that must agree within 1e-6 for `saturated`.
  int saturation_k = 5;
};

struct ComassResult {
  double value = 0.0;
  SimplePlane maximizer;
  bool saturated = false;
  int converged_starts = 0;
  int starts = 0;
  /// Distinct local maxima found by the starts, best first.
  std::vector<SimplePlane> local_maxima;
  std::vector<double> local_values;
};

/// Best phi(xi) over unit simple p-vectors found by multistart ascent. The
/// value is a lower bound for the comass; degrees 0, 1, n-1, n are exact.
ComassResult comass(const ExteriorElement& phi, const ComassOptions& opts = {});
/// Same, with additional start frames ascended before the random ones.
ComassResult comass(const ExteriorElement& phi, const ComassOptions& opts, const std::vector<Eigen::MatrixXd>& warm_starts);

/// Largest principal angle between the spans; pi when the orientations differ.
double plane_distance(const SimplePlane& a, const SimplePlane& b);
/// Largest principal angle between spans, ignoring orientation.
double subspace_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Finite surrogate for G(phi): deduplicated local maximizers with phi >= 1 - tol.
struct PlaneSampleSet {
  ExteriorElement form;
  std::vector<SimplePlane> planes;
  std::vector<double> values;
  double tolerance = 1e-6;
  double dedup_angle = 1e-3;
  std::uint64_t seed = 7;
  int requested = 0;
  int multistart_count = 0;
  int raw_accepted = 0;
  /// True when fewer than `requested` distinct planes exist after all attempts.
  bool exhausted = false;

  std::size_t size() const { return planes.size(); }
  bool empty() const { return planes.empty(); }
  std::vector<ExteriorElement> pvectors() const;
};

struct SampleOptions {
  double tol = 1e-6;
  int count = 50;
  std::uint64_t seed = 7;
  double dedup_angle = 1e-3;
  /// Attempt budget as a multiple of `count`.
  int attempt_factor = 4;
  int max_iter = 6000;
  int threads = 0;
};

/// Samples G(phi). Throws if the calibration's comass cannot be confirmed as 1.
PlaneSampleSet sample_grassmannian(const Calibration& cal, const SampleOptions& opts = {});
/// Same, for a bare form whose comass is taken to be 1 without confirmation.
PlaneSampleSet sample_form_grassmannian(const ExteriorElement& phi, const SampleOptions& opts = {});
/// Appends the plane unless it duplicates an existing one; returns whether it was added.
bool add_sample(PlaneSampleSet& set, const SimplePlane& plane, double value);

enum class ExtremumMode { Min, Max };

struct ExtremumOptions {
  std::vector<double> penalties{1e1, 1e2, 1e3, 1e4, 1e5, 1e6};
  int max_iter_per_stage = 400;
  int projection_iter = 4000;
  int threads = 0;
  /// When positive, refine only this many samples (those with the best objective).
  int max_starts = 0;
};

struct ExtremumResult {
  double value = 0.0;
  SimplePlane witness;
  /// phi(witness) after the final projection onto {phi = 1}.
  double phi_value = 0.0;
  int refined = 0;
};

/// Extremum of alpha over the sampled G(phi), refined by penalty ascent of
/// +-alpha - rho (1 - phi) with increasing rho, then projected back to the
/// phi-maximizer set. Extra start frames may be supplied.
ExtremumResult constrained_extremum(const ExteriorElement& alpha, const PlaneSampleSet& samples, ExtremumMode mode,
                                    const ExtremumOptions& opts = {},
                                    const std::vector<Eigen::MatrixXd>& extra_starts = {});

struct Reduction {
  /// Orthonormal basis of W (columns), canonicalized from the coordinate axes.
  Eigen::MatrixXd basis;
  /// phi restricted to W, written in `basis`.
  ExteriorElement psi;
  bool elliptic = false;
  std::optional<Eigen::VectorXd> witness;
  /// max over samples of |u ⌟ xi| for the witness.
  double witness_defect = 0.0;
};

/// W = span of the sampled plane spans; elliptic iff W is the whole space.
Reduction reduce_calibration(const PlaneSampleSet& samples, double cutoff = 1e-8);

/// Orthonormal basis for the span of the columns with relative singular-value
/// cutoff, canonicalized by Gram-Schmidt of the projected coordinate axes.
Eigen::MatrixXd canonical_span(const Eigen::MatrixXd& columns, double cutoff = 1e-8);

}  // namespace calibr
