#include "calibr/cones.hpp"

#include <algorithm>
#include <cmath>

#include "calibr/lp.hpp"

namespace calibr {

const char* to_string(ConeStatus s) {
  switch (s) {
    case ConeStatus::Interior:
      return "Interior";
    case ConeStatus::Boundary:
      return "Boundary";
    case ConeStatus::Outside:
      return "Outside";
  }
  return "unknown";
}

Eigen::MatrixXd LambdaSpan::complement() const {
  const auto total = static_cast<Eigen::Index>(binomial(n, p));
  if (basis.cols() == 0) return Eigen::MatrixXd::Identity(total, total);
  const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(total, total) - basis * basis.transpose();
  return canonical_span(proj, 1e-8);
}

ExteriorElement LambdaSpan::project(const ExteriorElement& a) const {
  if (a.dim() != n || a.degree() != p) throw DimensionError("lambda_span: projection of wrong (n, p)");
  const Eigen::VectorXd v = a.to_dense();
  return ExteriorElement::from_dense(n, p, basis * (basis.transpose() * v));
}

LambdaSpan lambda_span(const PlaneSampleSet& samples, double cutoff) {
  if (samples.empty()) throw InputError("lambda_span: empty sample set");
  LambdaSpan span;
  span.n = samples.form.dim();
  span.p = samples.form.degree();
  Eigen::MatrixXd cols(static_cast<Eigen::Index>(binomial(span.n, span.p)), static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i)
    cols.col(static_cast<Eigen::Index>(i)) = samples.planes[i].pvector().to_dense();
  span.basis = canonical_span(cols, cutoff);
  return span;
}

namespace {

SimplePlane flipped(const SimplePlane& pl) {
  Eigen::MatrixXd f = pl.frame();
  f.col(0) *= -1.0;
  return SimplePlane(f);
}

bool already_present(const std::vector<SimplePlane>& atoms, const SimplePlane& pl) {
  for (const auto& a : atoms)
    if (plane_distance(a, pl) < 1e-9) return true;
  return false;
}

// Atoms of G(phi) with LP column generation through constrained maximization of the dual form.
class AtomPool {
 public:
  AtomPool(const PlaneSampleSet& samples, const ExtremumOptions& ext) : samples_(samples), ext_(ext) {
    for (const auto& pl : samples.planes) push(pl);
  }

  void push(const SimplePlane& pl) {
    planes.push_back(pl);
    dense.push_back(pl.pvector().to_dense());
  }

  // Adds the G(phi) maximizer of y^T a when it beats -y0; returns whether an atom was added.
  bool generate(const Eigen::VectorXd& y, double y0, double tol) {
    const int n = samples_.form.dim();
    const int p = samples_.form.degree();
    const ExteriorElement yf = ExteriorElement::from_dense(n, p, y);
    if (yf.is_zero()) return false;
    // A cheap pass from the best few samples, then every sample before giving up.
    ExtremumOptions quick = ext_;
    quick.max_starts = 4;
    for (const ExtremumOptions* o : {&quick, &ext_}) {
      const auto r = constrained_extremum(yf, samples_, ExtremumMode::Max, *o);
      if (r.phi_value >= 1.0 - samples_.tolerance && r.value + y0 > tol && !already_present(planes, r.witness)) {
        push(r.witness);
        return true;
      }
    }
    return false;
  }

  std::vector<SimplePlane> planes;
  std::vector<Eigen::VectorXd> dense;

 private:
  const PlaneSampleSet& samples_;
  ExtremumOptions ext_;
};

}  // namespace

ConeReport cone_membership(const ExteriorElement& xi, const PlaneSampleSet& samples, const ConeOptions& opts) {
  if (samples.empty()) throw InputError("cone_membership: empty sample set");
  if (xi.dim() != samples.form.dim() || xi.degree() != samples.form.degree()) {
    throw DimensionError("cone_membership: xi and phi differ in (n, p)");
  }
  const int n = xi.dim();
  const int p = xi.degree();
  const auto rows = static_cast<Eigen::Index>(binomial(n, p));
  const Eigen::VectorXd target = xi.to_dense();
  const double scale = std::max(1.0, target.norm());
  const double tol = opts.tol * scale;

  AtomPool pool(samples, opts.extremum);
  if (p >= 1 && !xi.is_zero() && simplicity_defect(xi) <= 1e-10) {
    const SimplePlane own = plane_from_pvector(xi);
    if (CompiledForm(samples.form).value(own.frame()) >= 1.0 - samples.tolerance && !already_present(pool.planes, own))
      pool.push(own);
  }

  ConeReport rep;
  rep.tol = tol;
  rep.boundary_tol = opts.boundary_tol;
  const int base_atoms = static_cast<int>(pool.planes.size());
  const Eigen::Index m = rows + (opts.convex ? 1 : 0);
  Eigen::VectorXd rhs(m);
  rhs.head(rows) = target;
  if (opts.convex) rhs[rows] = 1.0;

  auto atom_column = [&](std::size_t k) {
    Eigen::VectorXd col(m);
    col.head(rows) = pool.dense[k];
    if (opts.convex) col[rows] = 1.0;
    return col;
  };

  // Phase A: least L1 residual.
  LpResult res;
  for (int round = 0;; ++round) {
    LinearProgram lp = LinearProgram::with_rows(rhs);
    for (std::size_t k = 0; k < pool.planes.size(); ++k) lp.add_column(atom_column(k), 0.0);
    for (Eigen::Index r = 0; r < rows; ++r) {
      lp.add_column(Eigen::VectorXd::Unit(m, r), 1.0);
      lp.add_column(-Eigen::VectorXd::Unit(m, r), 1.0);
    }
    res = solve_lp(lp);
    if (!res.optimal()) throw InputError(std::string("cone_membership: LP ") + to_string(res.status));
    if (res.objective <= tol || round >= opts.max_rounds) break;
    if (!pool.generate(res.y.head(rows), opts.convex ? res.y[rows] : 0.0, 1e-10)) break;
  }
  rep.residual = res.objective;
  rep.sample_count = samples.size();

  if (rep.residual > tol) {
    rep.status = ConeStatus::Outside;
    rep.margin = -rep.residual;
    rep.separator = ExteriorElement::from_dense(n, p, res.y.head(rows));
    rep.augmented = static_cast<int>(pool.planes.size()) - base_atoms;
    return rep;
  }
  for (std::size_t k = 0; k < pool.planes.size(); ++k) {
    if (res.x[static_cast<Eigen::Index>(k)] > 1e-12) {
      rep.weights.push_back(res.x[static_cast<Eigen::Index>(k)]);
      rep.planes.push_back(pool.planes[k]);
    }
  }

  // Phase B: depth along a fixed interior direction of the atom cone (or hull).
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(rows);
  for (const auto& d : pool.dense) mean += d;
  mean /= static_cast<double>(pool.dense.size());
  Eigen::VectorXd dir(m);
  if (opts.convex) {
    dir.head(rows) = mean - target;
    dir[rows] = 0.0;
  } else {
    dir.head(rows) = mean / std::max(mean.norm(), 1e-300);
  }
  double depth = 0.0;
  if (dir.head(rows).norm() < 1e-14) {
    depth = opts.convex ? 1e3 : 0.0;
  } else {
    for (int round = 0;; ++round) {
      LinearProgram lp = LinearProgram::with_rows(rhs);
      for (std::size_t k = 0; k < pool.planes.size(); ++k) lp.add_column(atom_column(k), 0.0);
      const int tcol = lp.add_column(dir, -1.0, 0.0, 1e3);
      for (Eigen::Index r = 0; r < rows; ++r) {
        lp.add_column(Eigen::VectorXd::Unit(m, r), 1e6);
        lp.add_column(-Eigen::VectorXd::Unit(m, r), 1e6);
      }
      const LpResult d = solve_lp(lp);
      if (!d.optimal()) break;
      depth = d.x[tcol];
      if (round >= opts.max_rounds) break;
      if (!pool.generate(d.y.head(rows), opts.convex ? d.y[rows] : 0.0, 1e-10)) break;
    }
  }
  rep.margin = depth;
  rep.status = depth > opts.boundary_tol ? ConeStatus::Interior : ConeStatus::Boundary;
  rep.augmented = static_cast<int>(pool.planes.size()) - base_atoms;
  return rep;
}

MassBracket mass_norm_estimate(const ExteriorElement& xi, const std::vector<SimplePlane>& generators,
                               const MassOptions& opts) {
  if (xi.is_zero()) throw InputError("mass_norm_estimate: zero p-vector");
  const int n = xi.dim();
  const int p = xi.degree();
  const Eigen::VectorXd target = xi.to_dense();

  std::vector<SimplePlane> atoms;
  std::vector<Eigen::VectorXd> dense;
  auto push = [&](const SimplePlane& pl) {
    if (pl.dim() != n || pl.degree() != p) throw DimensionError("mass_norm_estimate: generator of wrong (n, p)");
    atoms.push_back(pl);
    dense.push_back(pl.pvector().to_dense());
  };
  for (Blade b : blades(n, p)) {
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, p);
    int k = 0;
    for (int i : b.indices()) f(i - 1, k++) = 1.0;
    push(SimplePlane(f));
  }
  if (p >= 1 && simplicity_defect(xi) <= 1e-10) push(plane_from_pvector(xi));
  for (const auto& g : generators) push(g);

  MassBracket out;
  double lower = 0.0;
  const ComassResult self = comass(xi, opts.comass);
  if (self.value > 0.0) {
    lower = target.squaredNorm() / self.value;
    out.dual = xi * (1.0 / self.value);
  }
  LpResult res;
  for (int round = 0;; ++round) {
    LinearProgram lp = LinearProgram::with_rows(target);
    for (const auto& d : dense) {
      lp.add_column(d, 1.0);
      lp.add_column(-d, 1.0);
    }
    res = solve_lp(lp);
    if (!res.optimal()) throw InputError(std::string("mass_norm_estimate: LP ") + to_string(res.status));
    out.rounds = round + 1;
    const ExteriorElement y = ExteriorElement::from_dense(n, p, res.y);
    if (y.is_zero()) break;
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t k = 0; k < dense.size(); ++k) scored.emplace_back(-std::abs(res.y.dot(dense[k])), k);
    std::sort(scored.begin(), scored.end());
    std::vector<Eigen::MatrixXd> warm;
    for (std::size_t k = 0; k < std::min<std::size_t>(4, scored.size()); ++k) {
      const std::size_t idx = scored[k].second;
      warm.push_back(res.y.dot(dense[idx]) >= 0 ? atoms[idx].frame() : flipped(atoms[idx]).frame());
    }
    // Separate at the LP dual and at mixes with the best normalized dual found so far
    // (in-out stabilization); every mix also yields a valid lower bound.
    bool violated = false;
    bool added = false;
    const Eigen::VectorXd best = out.dual.is_zero() ? Eigen::VectorXd::Zero(res.y.size()) : out.dual.to_dense();
    for (double mix : {0.0, 0.5, 0.8}) {
      if (mix > 0.0 && out.dual.is_zero()) break;
      const Eigen::VectorXd ym = (1.0 - mix) * res.y + mix * best;
      const ExteriorElement yf = ExteriorElement::from_dense(n, p, ym);
      if (yf.is_zero()) continue;
      const ComassResult cm = comass(yf, opts.comass, warm);
      if (mix == 0.0) violated = cm.value > 1.0 + opts.tol;
      if (cm.value > 0.0 && ym.dot(target) / cm.value > lower) {
        lower = ym.dot(target) / cm.value;
        out.dual = yf * (1.0 / cm.value);
      }
      for (std::size_t k = 0; k < cm.local_maxima.size(); ++k) {
        const double viol = std::abs(res.y.dot(cm.local_maxima[k].pvector().to_dense()));
        if (viol > 1.0 + opts.tol) {
          push(cm.local_maxima[k]);
          added = true;
          break;
        }
      }
    }
    if (res.objective - lower <= opts.tol * std::max(1.0, res.objective)) break;
    if (!violated || !added || round >= opts.max_rounds) break;
  }
  out.upper = res.objective;
  out.lower = lower;
  // Atoms pushed after the last solve have no column yet.
  const std::size_t solved = static_cast<std::size_t>(res.x.size()) / 2;
  for (std::size_t k = 0; k < solved; ++k) {
    const double c = res.x[static_cast<Eigen::Index>(2 * k)] - res.x[static_cast<Eigen::Index>(2 * k + 1)];
    if (std::abs(c) > 1e-12) {
      out.weights.push_back(std::abs(c));
      out.planes.push_back(c > 0 ? atoms[k] : flipped(atoms[k]));
    }
  }
  out.generators = static_cast<int>(atoms.size());
  return out;
}

ConeReport positivity_classify(const ExteriorElement& alpha, const PlaneSampleSet& samples,
                               const PositivityOptions& opts) {
  const auto r = constrained_extremum(alpha, samples, ExtremumMode::Min, opts.extremum);
  ConeReport rep;
  rep.margin = r.value;
  rep.tol = opts.tol;
  rep.boundary_tol = opts.tol;
  rep.sample_count = samples.size();
  rep.witness = r.witness;
  if (r.value > opts.tol) {
    rep.status = ConeStatus::Interior;
  } else if (r.value >= -opts.tol) {
    rep.status = ConeStatus::Boundary;
  } else {
    rep.status = ConeStatus::Outside;
  }
  return rep;
}

ContractionReport contraction_boundary(const Eigen::VectorXd& e, const PlaneSampleSet& samples,
                                       const PositivityOptions& opts) {
  const ExteriorElement& phi = samples.form;
  if (e.size() != phi.dim()) throw DimensionError("contraction_boundary: vector of wrong length");
  if (std::abs(e.norm() - 1.0) > 1e-9) throw InputError("contraction_boundary: e must be a unit vector");
  ContractionReport out;
  const ExteriorElement ev = ExteriorElement::vector(e);
  const ExteriorElement sym = wedge(ev, interior_product(e, phi));
  // e -| (e ^ phi) = phi - e ^ (e -| phi) for unit e.
  out.phi_e = (phi - sym).normalize();
  out.report = positivity_classify(out.phi_e, samples, opts);
  out.max_projection = constrained_extremum(sym, samples, ExtremumMode::Max, opts.extremum).value;
  out.span_criterion_boundary = out.max_projection >= 1.0 - opts.tol;
  const bool classified_boundary = out.report.status != ConeStatus::Interior;
  const double predicted = 1.0 - out.max_projection;
  if (classified_boundary != out.span_criterion_boundary) {
    out.consistent = false;
    out.discrepancy = "classification and span criterion disagree";
  } else if (std::abs(predicted - out.report.margin) > 10.0 * opts.tol) {
    out.consistent = false;
    out.discrepancy = "margin differs from 1 - max |proj e|^2";
  }
  return out;
}

Lemma25Report lemma_2_5_check(const ExteriorElement& xi, const PlaneSampleSet& samples, double tol,
                              const std::vector<SimplePlane>& generators) {
  if (xi.dim() != samples.form.dim() || xi.degree() != samples.form.degree()) {
    throw DimensionError("lemma_2_5_check: xi and phi differ in (n, p)");
  }
  std::vector<SimplePlane> gens = generators;
  gens.insert(gens.end(), samples.planes.begin(), samples.planes.end());
  const MassBracket mass = mass_norm_estimate(xi, gens);
  Lemma25Report out;
  out.mass_lower = mass.lower;
  out.mass_upper = mass.upper;
  if (mass.lower > 1.0 + tol || mass.upper < 1.0 - tol) {
    throw InputError("lemma_2_5_check: mass bracket [" + std::to_string(mass.lower) + ", " +
                     std::to_string(mass.upper) + "] does not contain 1");
  }
  out.cone = cone_membership(xi, samples);
  ConeOptions hull_opts;
  hull_opts.convex = true;
  out.hull = cone_membership(xi, samples, hull_opts);
  out.in_cone = out.cone.status != ConeStatus::Outside;
  out.in_hull = out.hull.status != ConeStatus::Outside;
  out.phi_value = pairing(samples.form, xi);
  out.unit_value = std::abs(out.phi_value - 1.0) <= tol;
  out.agree = out.in_cone == out.in_hull && out.in_hull == out.unit_value;
  return out;
}

PositiveBasis positive_basis(const PlaneSampleSet& samples, double epsilon, const PositivityOptions& opts) {
  const ExteriorElement& phi = samples.form;
  if (positivity_classify(phi, samples, opts).status != ConeStatus::Interior) {
    throw InputError("positive_basis: phi is not strictly positive on its sampled Grassmannian");
  }
  const int n = phi.dim();
  const int p = phi.degree();
  const auto bl = blades(n, p);
  PositiveBasis out;
  for (double eps = epsilon; eps >= 1e-12; eps *= 0.5) {
    out.elements.clear();
    out.margins.clear();
    bool ok = true;
    for (Blade b : bl) {
      ExteriorElement a = phi;
      a.add_term(b, eps);
      a.normalize();
      const ConeReport r = positivity_classify(a, samples, opts);
      if (r.status != ConeStatus::Interior) {
        ok = false;
        break;
      }
      out.elements.push_back(std::move(a));
      out.margins.push_back(r.margin);
    }
    if (!ok) continue;
    out.epsilon = eps;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(bl.size()), static_cast<Eigen::Index>(bl.size()));
    for (std::size_t k = 0; k < out.elements.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = out.elements[k].to_dense();
    out.rank = static_cast<int>(Eigen::FullPivLU<Eigen::MatrixXd>(m).rank());
    if (out.rank != static_cast<int>(bl.size())) throw InputError("positive_basis: perturbed forms are not a basis");
    return out;
  }
  throw InputError("positive_basis: epsilon underflow before all elements became positive");
}

}  // namespace calibr
