#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "calibr/cones.hpp"
#include "calibr/grassmann.hpp"
#include "calibr/polynomial.hpp"

namespace calibr {

/// A smooth function on R^n with value, gradient and Hessian suppliers.
/// Missing derivative suppliers fall back to central differences with step
/// h * max(1, |x|_inf).
class ScalarField {
 public:
  using ValueFn = std::function<double(const Eigen::VectorXd&)>;
  using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using HessianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

  ScalarField() = default;
  ScalarField(std::string name, int n, ValueFn value, GradientFn gradient = {}, HessianFn hessian = {},
              double h = 1e-4);

  static ScalarField from_polynomial(std::string name, const Polynomial& poly);

  const std::string& name() const { return name_; }
  int dim() const { return n_; }
  double step() const { return h_; }
  bool analytic_gradient() const { return static_cast<bool>(gradient_); }
  bool analytic_hessian() const { return static_cast<bool>(hessian_); }
  /// Set when the field is a polynomial, so symbolic derivatives are available.
  const std::optional<Polynomial>& polynomial() const { return poly_; }

  double operator()(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;
  Eigen::VectorXd fd_gradient(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd fd_hessian(const Eigen::VectorXd& x) const;

  /// Largest discrepancy between analytic and finite-difference derivatives on
  /// the probes. Throws InputError above `tol`.
  double validate(const std::vector<Eigen::VectorXd>& probes, double tol = 1e-5) const;

  /// chi o f, given chi and its first two derivatives.
  ScalarField compose(std::string name, std::function<double(double)> chi, std::function<double(double)> dchi,
                      std::function<double(double)> ddchi) const;

 private:
  std::string name_;
  int n_ = 0;
  double h_ = 1e-4;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
  std::optional<Polynomial> poly_;
};

/// Named fields: normsq (|x|^2), half_normsq, neg_normsq, abs_z1_sq, re_z1,
/// re_z1_sq, coord:k (x_k, 1-based) and neg_coord_sq:k (-x_k^2).
ScalarField builtin_field(const std::string& name, int n);
std::vector<std::string> builtin_field_names();

/// d^phi f = grad f -| phi.
ExteriorElement d_phi(const ScalarField& f, const Eigen::VectorXd& x, const ExteriorElement& phi);
/// H^phi f = lambda_phi(Hess f).
ExteriorElement hessian_form(const ScalarField& f, const Eigen::VectorXd& x, const ExteriorElement& phi);

struct HessianCrossCheck {
  ExteriorElement form;
  /// |H^phi f - d(d^phi f)| with d taken by central differences of d^phi f.
  double discrepancy = 0.0;
  bool step_warning = false;
};
HessianCrossCheck hessian_form_checked(const ScalarField& f, const Eigen::VectorXd& x, const ExteriorElement& phi,
                                       double h = 1e-4);

struct TraceCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
};
/// (H^phi f)(xi) against the trace of Hess f over the frame of xi.
TraceCheck trace_check(const ScalarField& f, const Eigen::VectorXd& x, const SimplePlane& xi,
                       const ExteriorElement& phi);

enum class PshStatus { StrictlyPsh, Psh, NotPsh };
const char* to_string(PshStatus s);

struct PshPoint {
  Eigen::VectorXd x;
  PshStatus status = PshStatus::NotPsh;
  double margin = 0.0;
  SimplePlane witness;
};

struct PshReport {
  std::vector<PshPoint> points;
  /// Weakest status over all points.
  PshStatus overall = PshStatus::StrictlyPsh;
  double min_margin = 0.0;
};

struct PshOptions {
  double tol = 1e-6;
  ExtremumOptions extremum{};
};

PshReport psh_classify(const ScalarField& f, const std::vector<Eigen::VectorXd>& points,
                       const PlaneSampleSet& samples, const PshOptions& opts = {});

struct ModDResult {
  double residual = 0.0;
  ExteriorElement alpha;
  ExteriorElement sigma;
  double grad_norm = 0.0;
};

/// Least-squares split of H^phi f over df ^ Lambda^{p-1} + Lambda(phi)^perp at x.
ModDResult pluriharmonic_mod_d_residual(const ScalarField& f, const Eigen::VectorXd& x, const LambdaSpan& span,
                                        const ExteriorElement& phi);

struct FlatOptions {
  double tol = 1e-6;
  /// Tangential phi-planes exist iff the comass of phi on the level hyperplane is >= 1 - tangency_tol.
  double tangency_tol = 1e-6;
  int samples = 24;
  std::uint64_t seed = 7;
  ExtremumOptions extremum{};
};

struct FlatResult {
  bool flat = true;
  /// No phi-plane is tangent to the level set at x.
  bool vacuous = false;
  double worst_value = 0.0;
  std::optional<SimplePlane> worst_plane;
  double tangential_comass = 0.0;
  std::size_t tangential_samples = 0;
};

/// Max |H^phi f (xi)| over phi-planes tangent to the level set of f through x.
FlatResult phi_flat_check(const ScalarField& f, const Eigen::VectorXd& x, const ExteriorElement& phi,
                          const FlatOptions& opts = {});

struct NormalityOptions {
  double tol = 1e-6;
  double mismatch_tol = 1e-8;
  std::uint64_t seed = 7;
  int threads = 0;
};

struct NormalityFailure {
  Eigen::VectorXd normal;
  double mismatch = 0.0;
  int left_dim = 0;
  int right_dim = 0;
};

struct NormalityReport {
  bool normal = true;
  int trials = 0;
  int degenerate = 0;
  double max_mismatch = 0.0;
  int lambda_dim = 0;
  std::vector<NormalityFailure> failures;
};

/// Compares Lambda(phi|W)^perp with Lambda(phi)^perp|W on random hyperplanes W.
NormalityReport normality_check(const ExteriorElement& phi, int trials, const NormalityOptions& opts = {});

/// Samples G(phi) in batches until the span of the sampled p-vectors stops growing.
LambdaSpan saturated_lambda_span(const ExteriorElement& phi, std::uint64_t seed, int threads = 0);

/// u ^ (u -| phi).
ExteriorElement symbol(const Eigen::VectorXd& u, const ExteriorElement& phi);

/// H^phi f projected onto Lambda(phi).
ExteriorElement reduced_hessian(const ScalarField& f, const Eigen::VectorXd& x, const LambdaSpan& span,
                                const ExteriorElement& phi);

struct SymbolEllipticity {
  /// Lower bound for min over unit u of max over samples of symbol(u)(xi).
  double lower = 0.0;
  /// Value of that max at the minimizing direction of the lower bound.
  double upper = 0.0;
  Eigen::VectorXd direction;
};
SymbolEllipticity symbol_ellipticity(const PlaneSampleSet& samples);

/// Orthonormal basis of the hyperplane u^perp (columns).
Eigen::MatrixXd hyperplane_basis(const Eigen::VectorXd& u);

}  // namespace calibr
