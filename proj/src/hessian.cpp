#include "calibr/hessian.hpp"

#include <cmath>
#include <random>

#include "calibr/lp.hpp"
#include "calibr/parallel.hpp"

namespace calibr {

namespace {

double fd_step(double h, const Eigen::VectorXd& x) { return h * std::max(1.0, x.lpNorm<Eigen::Infinity>()); }

void check_point(const ScalarField& f, const Eigen::VectorXd& x) {
  if (x.size() != f.dim()) throw DimensionError("point dimension does not match the field");
}

void check_form(const ScalarField& f, const ExteriorElement& phi) {
  if (phi.dim() != f.dim()) throw DimensionError("form dimension does not match the field");
}

// Lexicographic dense vector of df ^ e_J for every (p-1)-blade J.
Eigen::MatrixXd df_wedge_columns(const Eigen::VectorXd& g, int n, int p) {
  const auto rows = static_cast<Eigen::Index>(binomial(n, p));
  const auto lower = blades(n, p - 1);
  Eigen::MatrixXd cols(rows, static_cast<Eigen::Index>(lower.size()));
  const ExteriorElement df = ExteriorElement::vector(g);
  for (std::size_t j = 0; j < lower.size(); ++j) {
    ExteriorElement e(n, p - 1);
    e.add_term(lower[j], 1.0);
    cols.col(static_cast<Eigen::Index>(j)) = wedge(df, e).to_dense();
  }
  return cols;
}

// Orthonormal basis for the column span, absolute singular-value cutoff.
Eigen::MatrixXd span_basis(const Eigen::MatrixXd& cols, double cutoff) {
  if (cols.cols() == 0) return Eigen::MatrixXd(cols.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cols, Eigen::ComputeThinU);
  int r = 0;
  while (r < svd.singularValues().size() && svd.singularValues()[r] > cutoff) ++r;
  return svd.matrixU().leftCols(r);
}

double projector_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd d = a * a.transpose() - b * b.transpose();
  if (d.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(d).singularValues()[0];
}

}  // namespace

ScalarField::ScalarField(std::string name, int n, ValueFn value, GradientFn gradient, HessianFn hessian, double h)
    : name_(std::move(name)),
      n_(n),
      h_(h),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      hessian_(std::move(hessian)) {
  if (n_ < 1) throw InputError("scalar field needs a positive dimension");
  if (!value_) throw InputError("scalar field needs a value function");
  if (!(h_ > 0.0)) throw InputError("finite-difference step must be positive");
}

ScalarField ScalarField::from_polynomial(std::string name, const Polynomial& poly) {
  ScalarField f(
      std::move(name), poly.vars(), [poly](const Eigen::VectorXd& x) { return poly(x); },
      [poly](const Eigen::VectorXd& x) { return poly.gradient(x); },
      [poly](const Eigen::VectorXd& x) { return poly.hessian(x); });
  f.poly_ = poly;
  return f;
}

double ScalarField::operator()(const Eigen::VectorXd& x) const {
  check_point(*this, x);
  return value_(x);
}

Eigen::VectorXd ScalarField::gradient(const Eigen::VectorXd& x) const {
  check_point(*this, x);
  return gradient_ ? gradient_(x) : fd_gradient(x);
}

Eigen::MatrixXd ScalarField::hessian(const Eigen::VectorXd& x) const {
  check_point(*this, x);
  return hessian_ ? hessian_(x) : fd_hessian(x);
}

Eigen::VectorXd ScalarField::fd_gradient(const Eigen::VectorXd& x) const {
  const double h = fd_step(h_, x);
  Eigen::VectorXd g(n_);
  for (int i = 0; i < n_; ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (value_(xp) - value_(xm)) / (2 * h);
  }
  return g;
}

Eigen::MatrixXd ScalarField::fd_hessian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd hs(n_, n_);
  if (gradient_) {
    const double h = fd_step(h_, x);
    for (int i = 0; i < n_; ++i) {
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      hs.col(i) = (gradient_(xp) - gradient_(xm)) / (2 * h);
    }
    return 0.5 * (hs + hs.transpose());
  }
  // Second differences of values need a larger step to stay above roundoff.
  const double h = fd_step(std::sqrt(h_) * 1e-1, x);
  const double f0 = value_(x);
  for (int i = 0; i < n_; ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    hs(i, i) = (value_(xp) - 2 * f0 + value_(xm)) / (h * h);
    for (int j = i + 1; j < n_; ++j) {
      Eigen::VectorXd a = x, b = x, c = x, d = x;
      a[i] += h, a[j] += h;
      b[i] += h, b[j] -= h;
      c[i] -= h, c[j] += h;
      d[i] -= h, d[j] -= h;
      hs(i, j) = hs(j, i) = (value_(a) - value_(b) - value_(c) + value_(d)) / (4 * h * h);
    }
  }
  return hs;
}

double ScalarField::validate(const std::vector<Eigen::VectorXd>& probes, double tol) const {
  double worst = 0.0;
  for (const auto& x : probes) {
    check_point(*this, x);
    const double scale = 1.0 + std::abs(value_(x));
    if (gradient_) worst = std::max(worst, (gradient_(x) - fd_gradient(x)).lpNorm<Eigen::Infinity>() / scale);
    if (hessian_) {
      // Compare against differences of the gradient supplier when present.
      worst = std::max(worst, (hessian_(x) - fd_hessian(x)).lpNorm<Eigen::Infinity>() / scale);
    }
  }
  if (worst > tol) {
    throw InputError("scalar field '" + name_ + "': analytic and finite-difference derivatives disagree by " +
                     std::to_string(worst));
  }
  return worst;
}

ScalarField ScalarField::compose(std::string name, std::function<double(double)> chi,
                                 std::function<double(double)> dchi, std::function<double(double)> ddchi) const {
  const ScalarField inner = *this;
  return ScalarField(
      std::move(name), n_, [inner, chi](const Eigen::VectorXd& x) { return chi(inner(x)); },
      [inner, dchi](const Eigen::VectorXd& x) -> Eigen::VectorXd { return dchi(inner(x)) * inner.gradient(x); },
      [inner, dchi, ddchi](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
        const double t = inner(x);
        const Eigen::VectorXd g = inner.gradient(x);
        return dchi(t) * inner.hessian(x) + ddchi(t) * g * g.transpose();
      },
      h_);
}

std::vector<std::string> builtin_field_names() {
  return {"normsq", "half_normsq", "neg_normsq", "abs_z1_sq", "re_z1", "re_z1_sq", "coord:k", "neg_coord_sq:k"};
}

ScalarField builtin_field(const std::string& name, int n) {
  if (n < 1) throw InputError("builtin field needs a positive dimension");
  auto sq = [n](int i) { return Polynomial::coordinate(n, i) * Polynomial::coordinate(n, i); };
  auto normsq = [&] {
    Polynomial q(n);
    for (int i = 0; i < n; ++i) q += sq(i);
    return q;
  };
  auto need = [&](int m) {
    if (n < m) throw InputError("builtin field '" + name + "' needs dimension >= " + std::to_string(m));
  };
  auto index_arg = [&](const std::string& prefix) {
    int k = 0;
    try {
      std::size_t used = 0;
      k = std::stoi(name.substr(prefix.size()), &used);
      if (used != name.size() - prefix.size()) throw InputError("");
    } catch (...) {
      throw InputError("builtin field '" + name + "': bad coordinate index");
    }
    if (k < 1 || k > n) throw InputError("builtin field '" + name + "': coordinate index out of range");
    return k - 1;
  };
  if (name == "normsq") return ScalarField::from_polynomial(name, normsq());
  if (name == "half_normsq") return ScalarField::from_polynomial(name, normsq() * 0.5);
  if (name == "neg_normsq") return ScalarField::from_polynomial(name, normsq() * -1.0);
  if (name == "abs_z1_sq") {
    need(2);
    return ScalarField::from_polynomial(name, sq(0) + sq(1));
  }
  if (name == "re_z1") return ScalarField::from_polynomial(name, Polynomial::coordinate(n, 0));
  if (name == "re_z1_sq") {
    need(2);
    return ScalarField::from_polynomial(name, sq(0) - sq(1));
  }
  if (name.rfind("coord:", 0) == 0) return ScalarField::from_polynomial(name, Polynomial::coordinate(n, index_arg("coord:")));
  if (name.rfind("neg_coord_sq:", 0) == 0) return ScalarField::from_polynomial(name, sq(index_arg("neg_coord_sq:")) * -1.0);
  throw InputError("unknown builtin field '" + name + "'");
}

ExteriorElement d_phi(const ScalarField& f, const Eigen::VectorXd& x, const ExteriorElement& phi) {
  check_form(f, phi);
  if (phi.degree() < 1) throw DimensionError("d_phi needs a form of degree >= 1");
  return interior_product(f.gradient(x), phi).normalize();
}

ExteriorElement hessian_form(const ScalarField& f, const Eigen::VectorXd& x, const ExteriorElement& phi) {
  check_form(f, phi);
  return derivation_extend(f.hessian(x), phi).normalize();
}

HessianCrossCheck hessian_form_checked(const ScalarField& f, const Eigen::VectorXd& x, const ExteriorElement& phi,
                                       double h) {
  HessianCrossCheck out;
  out.form = hessian_form(f, x, phi);
  const int n = f.dim();
  const double step = fd_step(h, x);
  ExteriorElement ddf(n, phi.degree());
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    const ExteriorElement diff = (d_phi(f, xp, phi) - d_phi(f, xm, phi)) * (1.0 / (2 * step));
    ddf += wedge(ExteriorElement::vector(Eigen::VectorXd::Unit(n, i)), diff);
  }
  out.discrepancy = (out.form - ddf).norm();
  const double hess_norm = f.hessian(x).norm();
  out.step_warning = out.discrepancy > 1e-3 * (1.0 + hess_norm);
  return out;
}

TraceCheck trace_check(const ScalarField& f, const Eigen::VectorXd& x, const SimplePlane& xi,
                       const ExteriorElement& phi) {
  if (xi.dim() != f.dim() || xi.degree() != phi.degree()) throw DimensionError("trace_check: plane has wrong (n, p)");
  TraceCheck t;
  t.lhs = pairing(hessian_form(f, x, phi), xi.pvector());
  const Eigen::MatrixXd hs = f.hessian(x);
  const Eigen::MatrixXd& v = xi.frame();
  for (Eigen::Index k = 0; k < v.cols(); ++k) t.rhs += v.col(k).dot(hs * v.col(k));
  t.gap = std::abs(t.lhs - t.rhs);
  return t;
}

const char* to_string(PshStatus s) {
  switch (s) {
    case PshStatus::StrictlyPsh:
      return "StrictlyPsh";
    case PshStatus::Psh:
      return "Psh";
    case PshStatus::NotPsh:
      return "NotPsh";
  }
  return "?";
}

PshReport psh_classify(const ScalarField& f, const std::vector<Eigen::VectorXd>& points, const PlaneSampleSet& samples,
                       const PshOptions& opts) {
  if (samples.empty()) throw InputError("psh_classify: empty sample set");
  PshReport rep;
  rep.min_margin = kInf;
  for (const auto& x : points) {
    const ExteriorElement h = hessian_form(f, x, samples.form);
    PshPoint pt;
    pt.x = x;
    if (h.is_zero()) {
      pt.margin = 0.0;
      pt.witness = samples.planes.front();
    } else {
      const auto r = constrained_extremum(h, samples, ExtremumMode::Min, opts.extremum);
      pt.margin = r.value;
      pt.witness = r.witness;
    }
    pt.status = pt.margin > opts.tol ? PshStatus::StrictlyPsh
                                     : (pt.margin >= -opts.tol ? PshStatus::Psh : PshStatus::NotPsh);
    rep.min_margin = std::min(rep.min_margin, pt.margin);
    if (static_cast<int>(pt.status) > static_cast<int>(rep.overall)) rep.overall = pt.status;
    rep.points.push_back(std::move(pt));
  }
  if (points.empty()) rep.min_margin = 0.0;
  return rep;
}

ModDResult pluriharmonic_mod_d_residual(const ScalarField& f, const Eigen::VectorXd& x, const LambdaSpan& span,
                                        const ExteriorElement& phi) {
  check_form(f, phi);
  if (span.n != phi.dim() || span.p != phi.degree()) throw DimensionError("mod-d residual: span has wrong (n, p)");
  const int n = phi.dim(), p = phi.degree();
  if (p < 1) throw DimensionError("mod-d residual needs a form of degree >= 1");
  const Eigen::VectorXd h = hessian_form(f, x, phi).to_dense();
  const Eigen::VectorXd g = f.gradient(x);
  const Eigen::MatrixXd dfw = df_wedge_columns(g, n, p);
  const Eigen::MatrixXd perp = span.complement();
  Eigen::MatrixXd m(h.size(), dfw.cols() + perp.cols());
  m << dfw, perp;
  ModDResult out;
  out.grad_norm = g.norm();
  const Eigen::VectorXd coef = m.completeOrthogonalDecomposition().solve(h);
  out.residual = (h - m * coef).norm();
  out.alpha = ExteriorElement::from_dense(n, p - 1, coef.head(dfw.cols())).normalize();
  out.sigma = ExteriorElement::from_dense(n, p, perp * coef.tail(perp.cols())).normalize();
  return out;
}

Eigen::MatrixXd hyperplane_basis(const Eigen::VectorXd& u) {
  const double nu = u.norm();
  if (!(nu > 0.0)) throw InputError("hyperplane normal must be nonzero");
  const Eigen::Index n = u.size();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(u / nu);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return q.rightCols(n - 1);
}

FlatResult phi_flat_check(const ScalarField& f, const Eigen::VectorXd& x, const ExteriorElement& phi,
                          const FlatOptions& opts) {
  check_form(f, phi);
  const Eigen::VectorXd g = f.gradient(x);
  if (g.norm() < 1e-12) throw InputError("phi_flat_check: gradient vanishes at the probe point");
  FlatResult out;
  const int n = phi.dim(), p = phi.degree();
  if (p > n - 1) {
    out.vacuous = true;
    return out;
  }
  // Tangential phi-planes are exactly the phi-planes inside the level hyperplane.
  const Eigen::MatrixXd w = hyperplane_basis(g);
  const ExteriorElement phi_w = restrict_to(phi, w).normalize(1e-13);
  if (phi_w.is_zero()) {
    out.vacuous = true;
    return out;
  }
  ComassOptions copts;
  copts.seed = opts.seed;
  copts.multistarts = 32;
  out.tangential_comass = comass(phi_w, copts).value;
  if (out.tangential_comass < 1.0 - opts.tangency_tol) {
    out.vacuous = true;
    return out;
  }
  SampleOptions sopts;
  sopts.count = opts.samples;
  sopts.seed = opts.seed;
  sopts.tol = opts.tangency_tol;
  const PlaneSampleSet tangential = sample_form_grassmannian(phi_w, sopts);
  out.tangential_samples = tangential.size();
  if (tangential.empty()) {
    out.vacuous = true;
    return out;
  }
  const ExteriorElement h_w = restrict_to(hessian_form(f, x, phi), w).normalize();
  if (h_w.is_zero()) {
    out.worst_plane = SimplePlane(w * tangential.planes.front().frame());
    return out;
  }
  const auto hi = constrained_extremum(h_w, tangential, ExtremumMode::Max, opts.extremum);
  const auto lo = constrained_extremum(h_w, tangential, ExtremumMode::Min, opts.extremum);
  const bool use_hi = std::abs(hi.value) >= std::abs(lo.value);
  const auto& best = use_hi ? hi : lo;
  out.worst_value = best.value;
  out.worst_plane = SimplePlane(w * best.witness.frame());
  out.flat = std::abs(out.worst_value) <= opts.tol;
  return out;
}

LambdaSpan saturated_lambda_span(const ExteriorElement& phi, std::uint64_t seed, int threads) {
  const int n = phi.dim(), p = phi.degree();
  const int batch = std::min(80, static_cast<int>(binomial(n, p)) + 4);
  PlaneSampleSet all;
  all.form = phi;
  int last_dim = -1;
  LambdaSpan span;
  for (int round = 0; round < 8; ++round) {
    SampleOptions sopts;
    sopts.count = batch;
    sopts.seed = seed + 7919ull * static_cast<std::uint64_t>(round);
    sopts.threads = threads;
    const PlaneSampleSet s = sample_form_grassmannian(phi, sopts);
    for (std::size_t i = 0; i < s.size(); ++i) add_sample(all, s.planes[i], s.values[i]);
    if (all.empty()) break;
    span = lambda_span(all);
    if (span.dim() == last_dim || span.dim() == static_cast<int>(binomial(n, p))) break;
    last_dim = span.dim();
  }
  if (all.empty()) {
    span.n = n;
    span.p = p;
    span.basis = Eigen::MatrixXd(static_cast<Eigen::Index>(binomial(n, p)), 0);
  }
  return span;
}

NormalityReport normality_check(const ExteriorElement& phi, int trials, const NormalityOptions& opts) {
  const int n = phi.dim(), p = phi.degree();
  if (n < 2 || p < 1) throw InputError("normality_check needs n >= 2 and p >= 1");
  if (trials < 1) throw InputError("normality_check needs at least one trial");
  NormalityReport rep;
  rep.trials = trials;
  const LambdaSpan full = saturated_lambda_span(phi, opts.seed, opts.threads);
  rep.lambda_dim = full.dim();
  const Eigen::MatrixXd perp = full.complement();
  const auto sub_total = static_cast<Eigen::Index>(binomial(n - 1, p));

  struct Trial {
    bool degenerate = false;
    NormalityFailure result;
  };
  std::vector<Trial> out(static_cast<std::size_t>(trials));
  parallel_for(out.size(), opts.threads, [&](std::size_t t) {
    auto rng = stream_rng(opts.seed ^ 0x5bd1e995ull, t);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd u(n);
    for (auto& c : u) c = gauss(rng);
    u.normalize();
    Trial& tr = out[t];
    tr.result.normal = u;
    const Eigen::MatrixXd w = hyperplane_basis(u);
    const ExteriorElement phi_w = restrict_to(phi, w).normalize(1e-13);
    if (p > n - 1 || phi_w.is_zero()) {
      tr.degenerate = true;
      return;
    }
    ComassOptions copts;
    copts.seed = opts.seed + t;
    copts.multistarts = 32;
    copts.threads = 1;
    if (comass(phi_w, copts).value < 1.0 - opts.tol) {
      tr.degenerate = true;
      return;
    }
    const LambdaSpan left_span = saturated_lambda_span(phi_w, opts.seed + 31 * t, 1);
    const Eigen::MatrixXd left = left_span.complement();
    Eigen::MatrixXd restricted(sub_total, perp.cols());
    for (Eigen::Index k = 0; k < perp.cols(); ++k) {
      restricted.col(k) = restrict_to(ExteriorElement::from_dense(n, p, perp.col(k)), w).to_dense();
    }
    const Eigen::MatrixXd right = span_basis(restricted, 1e-8);
    tr.result.left_dim = static_cast<int>(left.cols());
    tr.result.right_dim = static_cast<int>(right.cols());
    tr.result.mismatch = left.cols() == right.cols() ? projector_gap(left, right) : 1.0;
  });
  for (const auto& tr : out) {
    if (tr.degenerate) {
      ++rep.degenerate;
      continue;
    }
    rep.max_mismatch = std::max(rep.max_mismatch, tr.result.mismatch);
    if (tr.result.mismatch >= opts.mismatch_tol) rep.failures.push_back(tr.result);
  }
  rep.normal = rep.failures.empty();
  return rep;
}

ExteriorElement symbol(const Eigen::VectorXd& u, const ExteriorElement& phi) {
  if (u.size() != phi.dim()) throw DimensionError("symbol: vector has wrong dimension");
  if (phi.degree() < 1) throw DimensionError("symbol needs a form of degree >= 1");
  return wedge(ExteriorElement::vector(u), interior_product(u, phi)).normalize();
}

ExteriorElement reduced_hessian(const ScalarField& f, const Eigen::VectorXd& x, const LambdaSpan& span,
                                const ExteriorElement& phi) {
  return span.project(hessian_form(f, x, phi)).normalize();
}

SymbolEllipticity symbol_ellipticity(const PlaneSampleSet& samples) {
  if (samples.empty()) throw InputError("symbol_ellipticity: empty sample set");
  const int n = samples.form.dim();
  // max_i u^T P_i u >= u^T (mean P_i) u, with equality to zero exactly on the common kernel.
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(n, n);
  for (const auto& pl : samples.planes) mean += pl.projector();
  mean /= static_cast<double>(samples.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mean);
  SymbolEllipticity out;
  out.lower = std::max(0.0, es.eigenvalues()[0]);
  out.direction = es.eigenvectors().col(0);
  for (const auto& pl : samples.planes) {
    out.upper = std::max(out.upper, pairing(symbol(out.direction, samples.form), pl.pvector()));
  }
  return out;
}

}  // namespace calibr
