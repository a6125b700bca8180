#include "calibr/grassmann.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numeric>

#include "calibr/parallel.hpp"

namespace calibr {

namespace {

constexpr int kMaxSmall = 16;

// Determinant of a k x k row-major matrix with leading dimension `ld`.
double det_small(const double* m, int k, int ld) {
  switch (k) {
    case 0:
      return 1.0;
    case 1:
      return m[0];
    case 2:
      return m[0] * m[ld + 1] - m[1] * m[ld];
    case 3:
      return m[0] * (m[ld + 1] * m[2 * ld + 2] - m[ld + 2] * m[2 * ld + 1]) -
             m[1] * (m[ld] * m[2 * ld + 2] - m[ld + 2] * m[2 * ld]) +
             m[2] * (m[ld] * m[2 * ld + 1] - m[ld + 1] * m[2 * ld]);
    default:
      break;
  }
  std::array<double, kMaxSmall * kMaxSmall> a{};
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) a[i * k + j] = m[i * ld + j];
  double det = 1.0;
  for (int c = 0; c < k; ++c) {
    int piv = c;
    for (int r = c + 1; r < k; ++r)
      if (std::abs(a[r * k + c]) > std::abs(a[piv * k + c])) piv = r;
    if (a[piv * k + c] == 0.0) return 0.0;
    if (piv != c) {
      for (int j = 0; j < k; ++j) std::swap(a[c * k + j], a[piv * k + j]);
      det = -det;
    }
    det *= a[c * k + c];
    for (int r = c + 1; r < k; ++r) {
      const double f = a[r * k + c] / a[c * k + c];
      for (int j = c; j < k; ++j) a[r * k + j] -= f * a[c * k + j];
    }
  }
  return det;
}

// Cofactor matrix of a p x p row-major matrix.
void cofactors(const double* m, int p, double* out) {
  if (p == 1) {
    out[0] = 1.0;
    return;
  }
  std::array<double, kMaxSmall * kMaxSmall> minor{};
  const int q = p - 1;
  for (int r = 0; r < p; ++r) {
    for (int k = 0; k < p; ++k) {
      int mi = 0;
      for (int i = 0; i < p; ++i) {
        if (i == r) continue;
        int mj = 0;
        for (int j = 0; j < p; ++j) {
          if (j == k) continue;
          minor[mi * q + mj] = m[i * p + j];
          ++mj;
        }
        ++mi;
      }
      const double d = det_small(minor.data(), q, q);
      out[r * p + k] = ((r + k) & 1) ? -d : d;
    }
  }
}

Eigen::MatrixXd retract(const Eigen::MatrixXd& v) { return orthonormalize(v, 1e-300); }

}  // namespace

CompiledForm::CompiledForm(const ExteriorElement& form) : n_(form.dim()), p_(form.degree()) {
  if (p_ > kMaxSmall) throw DimensionError("CompiledForm: degree too large");
  for (const auto& [b, c] : form.terms()) {
    for (std::uint64_t bb = b.bits; bb != 0; bb &= bb - 1) rows_.push_back(std::countr_zero(bb));
    coeffs_.push_back(c);
  }
}

double CompiledForm::value(const Eigen::MatrixXd& frame) const {
  if (p_ == 0) return std::accumulate(coeffs_.begin(), coeffs_.end(), 0.0);
  std::array<double, kMaxSmall * kMaxSmall> m{};
  double total = 0.0;
  for (std::size_t t = 0; t < coeffs_.size(); ++t) {
    const int* rows = rows_.data() + t * static_cast<std::size_t>(p_);
    for (int i = 0; i < p_; ++i)
      for (int j = 0; j < p_; ++j) m[i * p_ + j] = frame(rows[i], j);
    total += coeffs_[t] * det_small(m.data(), p_, p_);
  }
  return total;
}

double CompiledForm::value_and_gradient(const Eigen::MatrixXd& frame, Eigen::MatrixXd& grad) const {
  grad.setZero(n_, p_);
  if (p_ == 0) return value(frame);
  std::array<double, kMaxSmall * kMaxSmall> m{};
  std::array<double, kMaxSmall * kMaxSmall> cof{};
  double total = 0.0;
  for (std::size_t t = 0; t < coeffs_.size(); ++t) {
    const int* rows = rows_.data() + t * static_cast<std::size_t>(p_);
    for (int i = 0; i < p_; ++i)
      for (int j = 0; j < p_; ++j) m[i * p_ + j] = frame(rows[i], j);
    const double c = coeffs_[t];
    cofactors(m.data(), p_, cof.data());
    double det = 0.0;
    for (int j = 0; j < p_; ++j) det += m[j] * cof[j];
    total += c * det;
    for (int i = 0; i < p_; ++i)
      for (int j = 0; j < p_; ++j) grad(rows[i], j) += c * cof[i * p_ + j];
  }
  return total;
}

AscentResult ascend(const CompiledForm& form, const Eigen::MatrixXd& start, const AscentOptions& opts) {
  AscentResult res;
  Eigen::MatrixXd v = retract(start);
  Eigen::MatrixXd g;
  double f = form.value_and_gradient(v, g);
  Eigen::MatrixXd r = g - v * (v.transpose() * g);
  double rn = r.norm();
  double step = 1.0 / std::max(1.0, rn);
  int it = 0;
  bool stalled = false;
  for (; it < opts.max_iter; ++it) {
    if (rn <= opts.grad_tol) break;
    double t = step;
    Eigen::MatrixXd vn;
    double fn = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 50; ++bt) {
      vn = retract(v + t * r);
      fn = form.value(vn);
      if (fn >= f + 1e-4 * t * rn * rn) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // No sufficient increase is measurable any more: accept only a strict increase.
      if (fn > f) {
        accepted = true;
      } else {
        stalled = true;
        break;
      }
    }
    Eigen::MatrixXd gn;
    fn = form.value_and_gradient(vn, gn);
    Eigen::MatrixXd rnew = gn - vn * (vn.transpose() * gn);
    const Eigen::MatrixXd s = vn - v;
    const Eigen::MatrixXd y = r - rnew;
    const double sy = (s.array() * y.array()).sum();
    const double ss = s.squaredNorm();
    if (sy > 0.0 && ss > 0.0) {
      step = std::clamp((it & 1) ? ss / sy : sy / std::max(y.squaredNorm(), 1e-300), 1e-8, 1e8);
    } else {
      step = std::min(t * 4.0, 1e8);
    }
    v = std::move(vn);
    f = fn;
    r = std::move(rnew);
    rn = r.norm();
  }
  res.frame = std::move(v);
  res.value = f;
  res.grad_norm = rn;
  res.iterations = it;
  res.converged = rn <= opts.grad_tol || (stalled && rn <= 1e-9);
  return res;
}

Eigen::MatrixXd random_frame(int n, int p, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (true) {
    Eigen::MatrixXd m(n, p);
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < n; ++i) m(i, j) = gauss(rng);
    try {
      return orthonormalize(m, 1e-8);
    } catch (const InputError&) {
      continue;
    }
  }
}

namespace {

// Exact comass for degrees where every element is simple (up to sign).
std::optional<ComassResult> exact_comass(const ExteriorElement& phi) {
  const int n = phi.dim(), p = phi.degree();
  ComassResult out;
  out.saturated = true;
  if (p == 0) {
    out.value = std::abs(phi.coeff(Blade{}));
    out.maximizer = SimplePlane(Eigen::MatrixXd(n, 0));
    return out;
  }
  if (p == 1) {
    Eigen::VectorXd v = phi.to_dense();
    out.value = v.norm();
    if (out.value == 0.0) v = Eigen::VectorXd::Unit(n, 0);
    out.maximizer = SimplePlane(Eigen::MatrixXd(v.normalized()));
    return out;
  }
  if (p == n - 1 || p == n) {
    // *phi is a vector (or scalar); its orthogonal complement is the maximizing plane.
    out.value = phi.norm();
    if (out.value == 0.0) return std::nullopt;
    ExteriorElement dual = hodge_star(phi);
    Eigen::MatrixXd frame;
    if (p == n) {
      frame = Eigen::MatrixXd::Identity(n, n);
      if (phi.coeff(Blade{(n == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1)}) < 0) frame.col(0) *= -1.0;
    } else {
      Eigen::VectorXd u = dual.to_dense().normalized();
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(u.transpose(), Eigen::ComputeFullV);
      frame = svd.matrixV().rightCols(n - 1);
      frame = orthonormalize(frame);
      if (pairing(phi, plucker(frame)) < 0) frame.col(0) *= -1.0;
    }
    out.maximizer = SimplePlane(frame);
    return out;
  }
  return std::nullopt;
}

}  // namespace

ComassResult comass(const ExteriorElement& phi, const ComassOptions& opts) { return comass(phi, opts, {}); }

ComassResult comass(const ExteriorElement& phi, const ComassOptions& opts, const std::vector<Eigen::MatrixXd>& warm_starts) {
  if (phi.is_zero()) throw InputError("comass: zero form");
  if (auto exact = exact_comass(phi)) {
    exact->starts = 0;
    return *exact;
  }
  const int n = phi.dim(), p = phi.degree();
  const CompiledForm compiled(phi);
  const int warm = static_cast<int>(warm_starts.size());
  const int starts = std::max(warm > 0 ? 0 : 1, opts.multistarts) + warm;
  std::vector<AscentResult> results(static_cast<std::size_t>(starts));
  const AscentOptions aopts{opts.max_iter, opts.tol};
  parallel_for(results.size(), opts.threads, [&](std::size_t i) {
    if (static_cast<int>(i) < warm) {
      results[i] = ascend(compiled, orthonormalize(warm_starts[i], 1e-300), aopts);
      return;
    }
    auto rng = stream_rng(opts.seed, i - static_cast<std::size_t>(warm));
    results[i] = ascend(compiled, random_frame(n, p, rng), aopts);
  });
  ComassResult out;
  out.starts = starts;
  std::vector<double> vals;
  vals.reserve(results.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    vals.push_back(results[i].value);
    if (results[i].converged) ++out.converged_starts;
    if (results[i].value > results[best].value) best = i;
  }
  std::sort(vals.begin(), vals.end(), std::greater<>());
  const int k = std::clamp(opts.saturation_k, 1, starts);
  out.saturated = starts >= 2 && (vals.front() - vals[static_cast<std::size_t>(k - 1)]) <= 1e-6 && k >= 2;
  out.value = results[best].value;
  out.maximizer = SimplePlane(results[best].frame);
  std::vector<std::size_t> order(results.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return results[a].value > results[b].value; });
  for (std::size_t i : order) {
    SimplePlane pl(results[i].frame);
    bool dup = false;
    for (const auto& q : out.local_maxima) dup = dup || plane_distance(q, pl) < 1e-6;
    if (dup) continue;
    out.local_maxima.push_back(std::move(pl));
    out.local_values.push_back(results[i].value);
  }
  return out;
}

double subspace_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols() || a.rows() != b.rows()) return M_PI / 2;
  if (a.cols() == 0) return 0.0;
  const Eigen::MatrixXd resid = b - a * (a.transpose() * b);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(resid);
  const double s = std::min(1.0, svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
  return std::asin(s);
}

double plane_distance(const SimplePlane& a, const SimplePlane& b) {
  if (a.dim() != b.dim() || a.degree() != b.degree()) return M_PI;
  if (a.degree() == 0) return 0.0;
  const Eigen::MatrixXd m = a.frame().transpose() * b.frame();
  if (m.determinant() <= 0.0) return M_PI;
  return subspace_angle(a.frame(), b.frame());
}

std::vector<ExteriorElement> PlaneSampleSet::pvectors() const {
  std::vector<ExteriorElement> out;
  out.reserve(planes.size());
  for (const auto& pl : planes) out.push_back(pl.pvector());
  return out;
}

bool add_sample(PlaneSampleSet& set, const SimplePlane& plane, double value) {
  for (const auto& existing : set.planes) {
    if (plane_distance(existing, plane) < set.dedup_angle) return false;
  }
  set.planes.push_back(plane);
  set.values.push_back(value);
  return true;
}

PlaneSampleSet sample_form_grassmannian(const ExteriorElement& phi, const SampleOptions& opts) {
  PlaneSampleSet set;
  set.form = phi;
  set.tolerance = opts.tol;
  set.dedup_angle = opts.dedup_angle;
  set.seed = opts.seed;
  set.requested = opts.count;
  const int n = phi.dim(), p = phi.degree();
  const CompiledForm compiled(phi);
  const AscentOptions aopts{opts.max_iter, 1e-13};
  const int budget = std::max(opts.count, opts.count * std::max(1, opts.attempt_factor));
  int next = 0;
  while (static_cast<int>(set.planes.size()) < opts.count && next < budget) {
    const int batch = std::min(budget - next, std::max(1, opts.count - static_cast<int>(set.planes.size())));
    std::vector<AscentResult> results(static_cast<std::size_t>(batch));
    parallel_for(results.size(), opts.threads, [&](std::size_t i) {
      auto rng = stream_rng(opts.seed, static_cast<std::uint64_t>(next) + i);
      results[i] = ascend(compiled, random_frame(n, p, rng), aopts);
    });
    next += batch;
    for (auto& r : results) {
      if (r.value < 1.0 - opts.tol) continue;
      ++set.raw_accepted;
      add_sample(set, SimplePlane(r.frame), r.value);
      if (static_cast<int>(set.planes.size()) >= opts.count) break;
    }
  }
  set.multistart_count = next;
  set.exhausted = static_cast<int>(set.planes.size()) < opts.count;
  return set;
}

PlaneSampleSet sample_grassmannian(const Calibration& cal, const SampleOptions& opts) {
  double measured = 0.0;
  if (cal.certified_comass) {
    measured = *cal.certified_comass;
  } else {
    ComassOptions copts;
    copts.seed = opts.seed;
    copts.threads = opts.threads;
    measured = comass(cal.form, copts).value;
  }
  if (std::abs(measured - 1.0) > 1e-4 || std::abs(cal.claimed_comass - 1.0) > 1e-12) {
    throw InputError("sample_grassmannian: comass of '" + cal.name + "' is not confirmed to be 1 (measured " +
                     std::to_string(measured) + ")");
  }
  return sample_form_grassmannian(cal.form, opts);
}

ExtremumResult constrained_extremum(const ExteriorElement& alpha, const PlaneSampleSet& samples, ExtremumMode mode,
                                    const ExtremumOptions& opts, const std::vector<Eigen::MatrixXd>& extra_starts) {
  if (samples.empty() && extra_starts.empty()) throw InputError("constrained_extremum: empty sample set");
  const ExteriorElement& phi = samples.form;
  if (alpha.dim() != phi.dim() || alpha.degree() != phi.degree()) {
    throw DimensionError("constrained_extremum: alpha and phi differ in (n, p)");
  }
  const double sign = mode == ExtremumMode::Max ? 1.0 : -1.0;
  double scale = 0.0;
  for (const auto& [b, c] : alpha.terms()) scale += std::abs(c);
  scale = std::max(scale, 1e-300);
  const CompiledForm phi_c(phi);
  const CompiledForm alpha_c(alpha);
  std::vector<CompiledForm> stages;
  for (double rho : opts.penalties) stages.emplace_back(alpha * sign + phi * (rho * std::max(1.0, scale)));

  std::vector<Eigen::MatrixXd> starts;
  std::vector<std::size_t> order(samples.planes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (opts.max_starts > 0 && order.size() > static_cast<std::size_t>(opts.max_starts)) {
    std::vector<double> key(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) key[i] = sign * alpha_c.value(samples.planes[i].frame());
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
    order.resize(static_cast<std::size_t>(opts.max_starts));
  }
  for (std::size_t i : order) starts.push_back(samples.planes[i].frame());
  const std::size_t sample_starts = starts.size();
  for (const auto& s : extra_starts) starts.push_back(s);

  struct Candidate {
    double objective;
    Eigen::MatrixXd frame;
    double phi;
  };
  std::vector<Candidate> raw(starts.size()), refined(starts.size());
  parallel_for(starts.size(), opts.threads, [&](std::size_t i) {
    Eigen::MatrixXd f0 = orthonormalize(starts[i], 1e-300);
    raw[i] = {sign * alpha_c.value(f0), f0, phi_c.value(f0)};
    Eigen::MatrixXd v = f0;
    if (!alpha.is_zero()) {
      for (const auto& st : stages) v = ascend(st, v, {opts.max_iter_per_stage, 1e-13}).frame;
      v = ascend(phi_c, v, {opts.projection_iter, 1e-13}).frame;
    }
    refined[i] = {sign * alpha_c.value(v), v, phi_c.value(v)};
  });

  ExtremumResult out;
  const Candidate* best = nullptr;
  auto consider = [&](const Candidate& c, bool from_samples) {
    // Raw start frames only count when they are themselves accepted phi-planes.
    if (!from_samples && c.phi < 1.0 - samples.tolerance) return;
    if (best == nullptr || c.objective > best->objective) best = &c;
  };
  for (std::size_t i = 0; i < starts.size(); ++i) {
    consider(raw[i], i < sample_starts);
    consider(refined[i], false);
  }
  if (best == nullptr) {
    // Nothing feasible: fall back to the refined candidate with the largest phi.
    for (const auto& c : refined)
      if (best == nullptr || c.phi > best->phi) best = &c;
  }
  out.value = sign * best->objective;
  out.witness = SimplePlane(best->frame);
  out.phi_value = best->phi;
  out.refined = static_cast<int>(starts.size());
  return out;
}

Eigen::MatrixXd canonical_span(const Eigen::MatrixXd& columns, double cutoff) {
  const Eigen::Index n = columns.rows();
  if (columns.cols() == 0) return Eigen::MatrixXd(n, 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(columns, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  const double smax = sv.size() ? sv(0) : 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff * std::max(smax, 1e-300)) ++rank;
  const Eigen::MatrixXd u = svd.matrixU().leftCols(rank);
  const Eigen::MatrixXd proj = u * u.transpose();
  Eigen::MatrixXd basis(n, rank);
  Eigen::Index filled = 0;
  for (Eigen::Index i = 0; i < n && filled < rank; ++i) {
    Eigen::VectorXd v = proj.col(i);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < filled; ++j) v -= basis.col(j).dot(v) * basis.col(j);
    const double nv = v.norm();
    if (nv > 1e-6) basis.col(filled++) = v / nv;
  }
  if (filled < rank) {
    // Fall back to the SVD basis when axis projections are too short.
    return u;
  }
  return basis;
}

Reduction reduce_calibration(const PlaneSampleSet& samples, double cutoff) {
  if (samples.empty()) throw InputError("reduce_calibration: empty sample set");
  const int n = samples.form.dim();
  const int p = samples.form.degree();
  Eigen::MatrixXd stacked(n, static_cast<Eigen::Index>(samples.size()) * p);
  for (std::size_t i = 0; i < samples.size(); ++i)
    stacked.middleCols(static_cast<Eigen::Index>(i) * p, p) = samples.planes[i].frame();
  Reduction red;
  red.basis = canonical_span(stacked, cutoff);
  red.psi = restrict_to(samples.form, red.basis);
  red.elliptic = red.basis.cols() == n;
  if (!red.elliptic) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(red.basis.transpose(), Eigen::ComputeFullV);
    Eigen::VectorXd u = svd.matrixV().col(n - 1);
    // Make the witness deterministic in sign: first significant entry positive.
    for (int i = 0; i < n; ++i) {
      if (std::abs(u[i]) > 1e-12) {
        if (u[i] < 0) u = -u;
        break;
      }
    }
    double defect = 0.0;
    for (const auto& pl : samples.planes) defect = std::max(defect, interior_product(u, pl.pvector()).norm());
    red.witness = u;
    red.witness_defect = defect;
  }
  return red;
}

}  // namespace calibr
