#include "calibr/duality.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "calibr/lp.hpp"
#include "calibr/parallel.hpp"

namespace calibr {

namespace {

LpResult checked_solve(const LinearProgram& lp, const DualityTolerances& tol, const char* what) {
  LpOptions o;
  o.tol = tol.lp;
  const LpResult r = solve_lp(lp, o);
  if (r.status == LpStatus::IterationLimit || r.status == LpStatus::Unbounded) {
    std::ostringstream msg;
    msg << what << ": LP " << to_string(r.status) << " (" << lp.rows() << " rows, " << lp.cols()
        << " columns, max |entry| " << lp.A.cwiseAbs().maxCoeff() << ", " << r.iterations << " iterations)";
    throw std::runtime_error(msg.str());
  }
  return r;
}

Eigen::MatrixXd coordinate_frame(int n, const std::vector<int>& one_based, bool flip) {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(one_based.size()));
  for (std::size_t c = 0; c < one_based.size(); ++c) f(one_based[c] - 1, static_cast<Eigen::Index>(c)) = 1.0;
  if (flip) f.col(0) *= -1.0;
  return f;
}

void check_rank(const std::vector<Polynomial>& family, const FiniteDualityModel& model) {
  const int n = model.dim();
  const auto m = static_cast<Eigen::Index>(family.size());
  const Eigen::Index pts = 3 * m + 10;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd vals(pts, m);
  for (Eigen::Index r = 0; r < pts; ++r) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = model.box_center[i] + model.box_half_width[i] * u(rng);
    for (Eigen::Index k = 0; k < m; ++k) vals(r, k) = family[static_cast<std::size_t>(k)](x);
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(vals);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= 1e-10 * sv(0)) throw InputError("rank-deficient test family");
}

}  // namespace

FiniteDualityModel FiniteDualityModel::with_dictionary(const Calibration& cal, std::vector<Eigen::VectorXd> sites,
                                                       std::vector<std::vector<SimplePlane>> dictionary,
                                                       const DualityTolerances& tol) {
  if (sites.empty()) throw InputError("duality model needs at least one site");
  if (dictionary.size() != sites.size()) throw InputError("one dictionary per site expected");
  FiniteDualityModel m;
  m.calibration = cal;
  m.tol = tol;
  const int n = cal.dim();
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, kInf), hi = Eigen::VectorXd::Constant(n, -kInf);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i].size() != n) throw DimensionError("site " + std::to_string(i) + " has the wrong dimension");
    lo = lo.cwiseMin(sites[i]);
    hi = hi.cwiseMax(sites[i]);
    for (std::size_t j = 0; j < dictionary[i].size(); ++j) {
      const auto& pl = dictionary[i][j];
      if (pl.dim() != n || pl.degree() != cal.degree()) throw DimensionError("dictionary plane has the wrong shape");
      const double v = pairing(cal.form, pl.pvector());
      if (v < 1.0 - tol.plane) {
        throw InputError("dictionary plane " + std::to_string(j) + " at site " + std::to_string(i) +
                         " is not a phi-plane (phi = " + std::to_string(v) + ")");
      }
    }
  }
  m.box_center = 0.5 * (lo + hi);
  m.box_half_width = 0.5 * (hi - lo);
  const double widest = m.box_half_width.maxCoeff();
  for (int i = 0; i < n; ++i) {
    m.box_half_width[i] = std::max(m.box_half_width[i], 0.5 * widest);
    if (m.box_half_width[i] <= 0.0) m.box_half_width[i] = 1.0;
  }
  m.sites = std::move(sites);
  m.dictionary = std::move(dictionary);
  return m;
}

FiniteDualityModel FiniteDualityModel::build(const Calibration& cal, std::vector<Eigen::VectorXd> sites,
                                             const DualityModelOptions& opts) {
  const int n = cal.dim(), p = cal.degree();
  std::vector<SimplePlane> planes;
  if (opts.coordinate_planes) {
    for (const auto& b : blades(n, p)) {
      const double c = cal.form.coeff(b);
      if (std::abs(c) >= 1.0 - opts.tol.plane) planes.emplace_back(coordinate_frame(n, b.indices(), c < 0.0));
    }
  }
  if (opts.dictionary > 0) {
    SampleOptions so;
    so.count = opts.dictionary;
    so.seed = opts.seed;
    so.tol = opts.tol.plane;
    so.threads = opts.threads;
    const PlaneSampleSet s = sample_grassmannian(cal, so);
    for (const auto& pl : s.planes) {
      const bool dup = std::any_of(planes.begin(), planes.end(),
                                   [&](const SimplePlane& q) { return plane_distance(pl, q) <= s.dedup_angle; });
      if (!dup) planes.push_back(pl);
    }
  }
  if (planes.empty()) throw InputError("empty plane dictionary");
  std::vector<std::vector<SimplePlane>> dict(sites.size(), planes);
  return with_dictionary(cal, std::move(sites), std::move(dict), opts.tol);
}

std::size_t FiniteDualityModel::atom_count() const {
  std::size_t c = 0;
  for (const auto& d : dictionary) c += d.size();
  return c;
}

std::vector<Polynomial> FiniteDualityModel::scalar_family(int degree) const {
  if (degree < 0) throw InputError("family degree must be non-negative");
  const int n = dim();
  // legendre[i][k] = normalized P_k((x_i - c_i) / w_i)
  std::vector<std::vector<Polynomial>> legendre(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Polynomial u = (Polynomial::coordinate(n, i) - Polynomial::constant(n, box_center[i])) * (1.0 / box_half_width[i]);
    std::vector<Polynomial> p{Polynomial::constant(n, 1.0), u};
    for (int k = 1; k < degree; ++k) {
      p.push_back((u * p[static_cast<std::size_t>(k)] * (2.0 * k + 1.0) - p[static_cast<std::size_t>(k) - 1] * k) *
                  (1.0 / (k + 1.0)));
    }
    auto& out = legendre[static_cast<std::size_t>(i)];
    for (int k = 0; k <= degree; ++k) out.push_back(p[static_cast<std::size_t>(k)] * std::sqrt(2.0 * k + 1.0));
  }
  std::vector<Polynomial> family;
  for (const auto& e : monomials_up_to(n, degree)) {
    Polynomial f = Polynomial::constant(n, 1.0);
    for (int i = 0; i < n; ++i)
      if (e[static_cast<std::size_t>(i)] > 0) f = f * legendre[static_cast<std::size_t>(i)][static_cast<std::size_t>(e[static_cast<std::size_t>(i)])];
    family.push_back(std::move(f));
  }
  return family;
}

std::vector<PolyForm> FiniteDualityModel::form_family(int degree) const {
  const int n = dim(), q = calibration.degree() - 1;
  std::vector<PolyForm> out;
  const auto scalars = scalar_family(degree);
  for (const auto& b : blades(n, q)) {
    for (const auto& f : scalars) {
      PolyForm beta(n, q);
      beta.add_term(b, f);
      out.push_back(std::move(beta));
    }
  }
  return out;
}

BoundaryModel assemble_boundary_model(const FiniteDualityModel& model, int degree) {
  if (model.calibration.degree() < 1) throw InputError("boundary model needs p >= 1");
  check_rank(model.scalar_family(degree), model);
  BoundaryModel bm;
  bm.family_degree = degree;
  bm.tests = model.form_family(degree);
  for (std::size_t i = 0; i < model.sites.size(); ++i)
    for (std::size_t j = 0; j < model.dictionary[i].size(); ++j) bm.atoms.push_back({static_cast<int>(i), static_cast<int>(j)});
  const auto rows = static_cast<Eigen::Index>(bm.tests.size());
  const auto cols = static_cast<Eigen::Index>(bm.atoms.size());
  bm.matrix.resize(rows, cols);
  bm.atom_phi.resize(cols);
  std::vector<std::vector<ExteriorElement>> xi(model.sites.size());
  for (std::size_t i = 0; i < model.sites.size(); ++i)
    for (const auto& pl : model.dictionary[i]) xi[i].push_back(pl.pvector());
  for (Eigen::Index c = 0; c < cols; ++c) {
    const auto& a = bm.atoms[static_cast<std::size_t>(c)];
    bm.atom_phi[c] = pairing(model.calibration.form, xi[static_cast<std::size_t>(a.site)][static_cast<std::size_t>(a.plane)]);
  }
  parallel_for(bm.tests.size(), 0, [&](std::size_t k) {
    const PolyForm d = bm.tests[k].d();
    for (std::size_t i = 0; i < model.sites.size(); ++i) {
      const ExteriorElement di = d(model.sites[i]);
      for (Eigen::Index c = 0; c < cols; ++c) {
        const auto& a = bm.atoms[static_cast<std::size_t>(c)];
        if (a.site == static_cast<int>(i))
          bm.matrix(static_cast<Eigen::Index>(k), c) = pairing(di, xi[i][static_cast<std::size_t>(a.plane)]);
      }
    }
  });
  return bm;
}

Eigen::VectorXd boundary_values(const BoundaryModel& bm, const std::vector<BoundaryAtom>& atoms) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bm.tests.size()));
  for (std::size_t k = 0; k < bm.tests.size(); ++k) {
    const PolyForm d = bm.tests[k].d();
    for (const auto& a : atoms) s[static_cast<Eigen::Index>(k)] += a.weight * pairing(d(a.point), a.plane.pvector());
  }
  return s;
}

Eigen::VectorXd boundary_values(const BoundaryModel& bm, const PolyhedralCurrent& s, int threads) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(bm.tests.size()));
  for (std::size_t k = 0; k < bm.tests.size(); ++k) v[static_cast<Eigen::Index>(k)] = evaluate(s, bm.tests[k], -1, threads);
  return v;
}

namespace {

struct PrimalOutcome {
  bool feasible = false;
  Eigen::VectorXd weights;
  double residual = 0.0;
  double mass = 0.0;
  int iterations = 0;
};

PrimalOutcome boundary_primal(const BoundaryModel& bm, const Eigen::VectorXd& s, std::optional<double> lambda,
                              const DualityTolerances& tol) {
  if (s.size() != bm.matrix.rows()) throw DimensionError("boundary values do not match the test family");
  const auto m = bm.matrix.rows(), na = bm.matrix.cols();
  Eigen::VectorXd rhs(m + (lambda ? 1 : 0));
  rhs.head(m) = s;
  if (lambda) rhs[m] = *lambda;
  LinearProgram lp = LinearProgram::with_rows(rhs);
  for (Eigen::Index c = 0; c < na; ++c) {
    Eigen::VectorXd col(rhs.size());
    col.head(m) = bm.matrix.col(c);
    if (lambda) col[m] = 1.0;
    lp.add_column(col, 1.0);
  }
  if (lambda) lp.add_column(Eigen::VectorXd::Unit(rhs.size(), m), 0.0);
  const LpResult r = checked_solve(lp, tol, "boundary primal");
  PrimalOutcome out;
  out.iterations = r.iterations;
  out.residual = r.primal_residual;
  out.feasible = r.optimal() && r.primal_residual <= tol.feasibility;
  if (r.optimal()) {
    out.weights = r.x.head(na);
    out.mass = out.weights.sum();
  }
  return out;
}

}  // namespace

AlternativeResult boundary_alternative(const BoundaryModel& bm, const Eigen::VectorXd& s, std::optional<double> lambda,
                                       const DualityTolerances& tol) {
  if (lambda && !(*lambda > 0.0)) throw InputError("mass bound lambda must be positive");
  AlternativeResult res;
  res.lambda = lambda;
  res.family_degree = bm.family_degree;
  res.family_size = static_cast<int>(bm.tests.size());
  res.dictionary_size = static_cast<int>(bm.atoms.size());

  const PrimalOutcome p = boundary_primal(bm, s, lambda, tol);
  res.feasible = p.feasible;
  res.weights = p.weights;
  res.primal_residual = p.residual;
  res.primal_mass = p.mass;
  res.lp_iterations = p.iterations;

  // Dual: a in [-1,1]^m, s in [0,1] (bounded case), maximize t with
  // A^T a + s phi >= 0 on atoms and S.a + lambda s + t <= 0.
  const auto m = bm.matrix.rows(), na = bm.matrix.cols();
  const Eigen::Index rows = na + 1;
  const double tb = s.lpNorm<1>() + (lambda ? *lambda : 0.0) + 1.0;
  LinearProgram lp = LinearProgram::with_rows(Eigen::VectorXd::Zero(rows));
  for (Eigen::Index k = 0; k < m; ++k) {
    Eigen::VectorXd col(rows);
    col.head(na) = bm.matrix.row(k).transpose();
    col[na] = s[k];
    lp.add_column(col, 0.0, -1.0, 1.0);
  }
  if (lambda) {
    Eigen::VectorXd col(rows);
    col.head(na) = bm.atom_phi;
    col[na] = *lambda;
    lp.add_column(col, 0.0, 0.0, 1.0);
  }
  const int t_index = lp.add_column(Eigen::VectorXd::Unit(rows, na), -1.0, -tb, tb);
  for (Eigen::Index j = 0; j < na; ++j) lp.add_column(-Eigen::VectorXd::Unit(rows, j), 0.0);
  lp.add_column(Eigen::VectorXd::Unit(rows, na), 0.0);
  const LpResult d = checked_solve(lp, tol, "boundary dual");
  res.lp_iterations += d.iterations;
  res.coefficients = d.x.head(m);
  res.scale = lambda ? d.x[m] : 0.0;
  const double t = d.x[t_index];
  const double norm = std::max(res.coefficients.lpNorm<Eigen::Infinity>(), res.scale);
  res.margin = norm > 0.0 && t > 0.0 ? t / norm : t;
  res.certificate = res.margin >= tol.margin;
  res.consistent = res.feasible != res.certificate;
  res.boundary_tie = !res.feasible && !res.certificate;
  return res;
}

std::optional<double> min_mass(const BoundaryModel& bm, const Eigen::VectorXd& s, const DualityTolerances& tol) {
  const PrimalOutcome p = boundary_primal(bm, s, std::nullopt, tol);
  if (!p.feasible) return std::nullopt;
  return p.mass;
}

std::optional<double> lambda_threshold(const BoundaryModel& bm, const Eigen::VectorXd& s, double rel_tol,
                                       const DualityTolerances& tol) {
  auto ok = [&](double lam) { return boundary_primal(bm, s, lam, tol).feasible; };
  double hi = 1.0;
  while (!ok(hi)) {
    hi *= 2.0;
    if (hi > 1e12) return std::nullopt;
  }
  double lo = 0.0;
  if (ok(1e-300)) return 0.0;
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

JensenModel assemble_jensen_model(const FiniteDualityModel& model, const std::vector<int>& k_sites, int x_site,
                                  int degree) {
  const int ns = static_cast<int>(model.sites.size());
  if (k_sites.empty()) throw InputError("K must contain at least one site");
  if (x_site < 0 || x_site >= ns) throw InputError("x site index out of range");
  for (int k : k_sites) {
    if (k < 0 || k >= ns) throw InputError("K site index out of range");
    if (k == x_site || (model.sites[static_cast<std::size_t>(k)] - model.sites[static_cast<std::size_t>(x_site)]).norm() <= 1e-12)
      throw InputError("x coincides with K site " + std::to_string(k));
  }
  JensenModel jm;
  jm.family_degree = degree;
  jm.family = model.scalar_family(degree);
  check_rank(jm.family, model);
  jm.k_sites = k_sites;
  jm.x_site = x_site;
  for (int i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < model.dictionary[static_cast<std::size_t>(i)].size(); ++j)
      jm.atoms.push_back({i, static_cast<int>(j)});
  const auto m = static_cast<Eigen::Index>(jm.family.size());
  jm.hessian_rows.resize(m, static_cast<Eigen::Index>(jm.atoms.size()));
  jm.k_values.resize(m, static_cast<Eigen::Index>(k_sites.size()));
  jm.x_values.resize(m);
  jm.site_values.resize(m, ns);
  parallel_for(jm.family.size(), 0, [&](std::size_t k) {
    const auto& f = jm.family[k];
    const auto r = static_cast<Eigen::Index>(k);
    for (int i = 0; i < ns; ++i) {
      const ExteriorElement h = derivation_extend(f.hessian(model.sites[static_cast<std::size_t>(i)]), model.calibration.form);
      for (std::size_t c = 0; c < jm.atoms.size(); ++c) {
        const auto& a = jm.atoms[c];
        if (a.site == i)
          jm.hessian_rows(r, static_cast<Eigen::Index>(c)) =
              pairing(h, model.dictionary[static_cast<std::size_t>(i)][static_cast<std::size_t>(a.plane)].pvector());
      }
    }
    for (std::size_t j = 0; j < k_sites.size(); ++j)
      jm.k_values(r, static_cast<Eigen::Index>(j)) = f(model.sites[static_cast<std::size_t>(k_sites[j])]);
    jm.x_values[r] = f(model.sites[static_cast<std::size_t>(x_site)]);
    for (int i = 0; i < ns; ++i) jm.site_values(r, i) = f(model.sites[static_cast<std::size_t>(i)]);
  });
  return jm;
}

namespace {

struct SeparationOutcome {
  Eigen::VectorXd coefficients;
  double level = 0.0;
  double t = 0.0;
  int iterations = 0;
};

// Maximize f_a(target) - s over a in [-1,1]^m with f_a finite-psh on all atoms and s >= f_a on K.
SeparationOutcome separate(const JensenModel& jm, const Eigen::VectorXd& target, const DualityTolerances& tol) {
  const auto m = jm.hessian_rows.rows(), na = jm.hessian_rows.cols(), nk = jm.k_values.cols();
  const Eigen::Index rows = na + nk + 1;
  double sb = 1.0;
  for (Eigen::Index k = 0; k < m; ++k) sb += std::max(jm.k_values.row(k).cwiseAbs().maxCoeff(), std::abs(target[k]));
  LinearProgram lp = LinearProgram::with_rows(Eigen::VectorXd::Zero(rows));
  for (Eigen::Index k = 0; k < m; ++k) {
    Eigen::VectorXd col(rows);
    col.head(na) = jm.hessian_rows.row(k).transpose();
    col.segment(na, nk) = -jm.k_values.row(k).transpose();
    col[na + nk] = target[k];
    lp.add_column(col, 0.0, -1.0, 1.0);
  }
  Eigen::VectorXd scol = Eigen::VectorXd::Zero(rows);
  scol.segment(na, nk).setOnes();
  scol[na + nk] = -1.0;
  const int s_index = lp.add_column(scol, 0.0, -sb, sb);
  const int t_index = lp.add_column(-Eigen::VectorXd::Unit(rows, na + nk), -1.0, -(2 * sb + 1), 2 * sb + 1);
  for (Eigen::Index j = 0; j < rows; ++j) lp.add_column(-Eigen::VectorXd::Unit(rows, j), 0.0);
  const LpResult r = checked_solve(lp, tol, "Jensen dual");
  SeparationOutcome out;
  out.coefficients = r.x.head(m);
  out.level = r.x[s_index];
  out.t = r.x[t_index];
  out.iterations = r.iterations;
  return out;
}

}  // namespace

AlternativeResult jensen_alternative(const JensenModel& jm, const DualityTolerances& tol) {
  AlternativeResult res;
  res.family_degree = jm.family_degree;
  res.family_size = static_cast<int>(jm.family.size());
  res.dictionary_size = static_cast<int>(jm.atoms.size());
  const auto m = jm.hessian_rows.rows(), na = jm.hessian_rows.cols(), nk = jm.k_values.cols();

  Eigen::VectorXd rhs(m + 1);
  rhs.head(m) = -jm.x_values;
  rhs[m] = 1.0;
  LinearProgram lp = LinearProgram::with_rows(rhs);
  for (Eigen::Index c = 0; c < na; ++c) {
    Eigen::VectorXd col(m + 1);
    col.head(m) = jm.hessian_rows.col(c);
    col[m] = 0.0;
    lp.add_column(col, 1.0);
  }
  for (Eigen::Index j = 0; j < nk; ++j) {
    Eigen::VectorXd col(m + 1);
    col.head(m) = -jm.k_values.col(j);
    col[m] = 1.0;
    lp.add_column(col, 0.0);
  }
  const LpResult r = checked_solve(lp, tol, "Jensen primal");
  res.lp_iterations = r.iterations;
  res.primal_residual = r.primal_residual;
  res.feasible = r.optimal() && r.primal_residual <= tol.feasibility;
  if (r.optimal()) {
    res.weights = r.x.head(na);
    res.mu = r.x.segment(na, nk);
    res.primal_mass = res.weights.sum();
  }

  const SeparationOutcome d = separate(jm, jm.x_values, tol);
  res.lp_iterations += d.iterations;
  res.coefficients = d.coefficients;
  res.scale = d.level;
  const double norm = d.coefficients.lpNorm<Eigen::Infinity>();
  res.margin = norm > 0.0 && d.t > 0.0 ? d.t / norm : d.t;
  res.certificate = res.margin >= tol.margin;
  res.consistent = res.feasible != res.certificate;
  res.boundary_tie = !res.feasible && !res.certificate;
  return res;
}

AlternativeResult jensen_alternative(const FiniteDualityModel& model, const std::vector<int>& k_sites, int x_site,
                                     int degree) {
  return jensen_alternative(assemble_jensen_model(model, k_sites, x_site, degree), model.tol);
}

SupportDiagnostic support_diagnostic(const JensenModel& jm, const AlternativeResult& primal,
                                     const DualityTolerances& tol) {
  SupportDiagnostic out;
  if (!primal.feasible) return out;
  std::vector<double> site_weight;
  for (std::size_t c = 0; c < jm.atoms.size(); ++c) {
    const auto s = static_cast<std::size_t>(jm.atoms[c].site);
    if (site_weight.size() <= s) site_weight.resize(s + 1, 0.0);
    site_weight[s] += primal.weights[static_cast<Eigen::Index>(c)];
  }
  for (std::size_t s = 0; s < site_weight.size(); ++s) {
    if (site_weight[s] <= 1e-9) continue;
    const SeparationOutcome d = separate(jm, jm.site_values.col(static_cast<Eigen::Index>(s)), tol);
    out.sites.push_back(static_cast<int>(s));
    out.excess.push_back(d.t);
    out.worst = std::max(out.worst, d.t);
  }
  out.consistent = out.worst < tol.margin;
  return out;
}

BatchSummary summarize(const std::vector<BatchInstance>& batch) {
  BatchSummary out;
  for (const auto& b : batch) {
    ++out.instances;
    out.ties += b.result.boundary_tie;
    out.consistent += b.result.consistent;
    out.feasible += b.result.feasible;
    out.certificates += b.result.certificate;
  }
  return out;
}

std::vector<BatchInstance> random_boundary_batch(const BoundaryModel& bm, int count, std::uint64_t seed,
                                                 std::optional<double> lambda, int threads,
                                                 const DualityTolerances& tol) {
  if (count < 0) throw InputError("batch count must be non-negative");
  if (bm.matrix.cols() == 0) throw InputError("boundary model has no atoms");
  std::vector<BatchInstance> out(static_cast<std::size_t>(count));
  parallel_for(out.size(), threads, [&](std::size_t i) {
    auto rng = stream_rng(seed, i);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(bm.matrix.cols());
    for (int k = 0; k < 3; ++k) {
      const auto col = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(bm.matrix.cols()));
      const double mag = u(rng);
      c[col] += u(rng) < 0.5 ? -mag : mag;
    }
    out[i].index = static_cast<int>(i);
    out[i].result = boundary_alternative(bm, bm.matrix * c, lambda, tol);
  });
  return out;
}

std::vector<BatchInstance> random_jensen_batch(const Calibration& cal, int count, int degree, std::uint64_t seed,
                                               const DualityModelOptions& opts) {
  if (count < 0) throw InputError("batch count must be non-negative");
  const int n = cal.dim();
  std::vector<BatchInstance> out(static_cast<std::size_t>(count));
  DualityModelOptions inner = opts;
  inner.threads = 1;
  parallel_for(out.size(), opts.threads, [&](std::size_t i) {
    auto rng = stream_rng(seed, i);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Eigen::VectorXd> sites;
    for (int k = 0; k < 4; ++k) {
      Eigen::VectorXd y(n);
      for (int j = 0; j < n; ++j) y[j] = (j < 2 ? 1.0 : 0.3) * g(rng);
      sites.push_back(y);
    }
    Eigen::VectorXd x(n);
    const bool hull = i % 2 == 0;
    if (hull) {
      Eigen::VectorXd w(4);
      for (auto& c : w) c = u(rng);
      w /= w.sum();
      x.setZero();
      for (int k = 0; k < 4; ++k) x += w[k] * sites[static_cast<std::size_t>(k)];
    } else {
      for (auto& c : x) c = g(rng);
    }
    sites.push_back(x);
    const auto model = FiniteDualityModel::build(cal, std::move(sites), inner);
    out[i].index = static_cast<int>(i);
    out[i].in_hull_draw = hull;
    out[i].result = jensen_alternative(model, {0, 1, 2, 3}, 4, degree);
  });
  return out;
}

LambdaSweep lambda_sweep(const BoundaryModel& bm, const Eigen::VectorXd& s, double match_tol,
                         const DualityTolerances& tol) {
  LambdaSweep out;
  out.min_mass = min_mass(bm, s, tol);
  out.threshold = lambda_threshold(bm, s, 1e-10, tol);
  if (!out.min_mass || !out.threshold) return out;
  out.threshold_matches = std::abs(*out.threshold - *out.min_mass) <= match_tol;
  out.monotone = true;
  bool seen = false;
  for (double f : {0.5, 0.9, 0.999, 1.001, 1.1, 2.0}) {
    const double lam = f * *out.min_mass;
    const bool feas = boundary_alternative(bm, s, lam, tol).feasible;
    out.samples.emplace_back(lam, feas);
    if (seen && !feas) out.monotone = false;
    seen = seen || feas;
  }
  return out;
}

}  // namespace calibr
