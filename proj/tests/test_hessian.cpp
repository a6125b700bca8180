#include <cmath>
#include <random>

#include "calibr/hessian.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace calibr;

namespace {

const PlaneSampleSet& samples_of(const std::string& sel, int count = 30) {
  static std::map<std::string, PlaneSampleSet> cache;
  auto it = cache.find(sel);
  if (it == cache.end()) it = cache.emplace(sel, sample_grassmannian(catalogue(sel), SampleOptions{.count = count})).first;
  return it->second;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double c : v) x[i++] = c;
  return x;
}

ScalarField random_quadratic(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Polynomial q(n);
  for (const auto& e : monomials_up_to(n, 2)) q.add_term(e, g(rng));
  return ScalarField::from_polynomial("quadratic", q);
}

}  // namespace

TEST_CASE("scalar fields: analytic and finite-difference derivatives agree") {
  std::mt19937_64 rng(2);
  const auto f = random_quadratic(5, rng);
  std::vector<Eigen::VectorXd> probes;
  for (int i = 0; i < 5; ++i) probes.push_back(Eigen::VectorXd::Random(5));
  CHECK(f.validate(probes) < 1e-6);

  ScalarField bad("bad", 2, [](const Eigen::VectorXd& x) { return x.squaredNorm(); },
                  [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return 3 * x; });
  CHECK_THROWS_AS(bad.validate({vec({1.0, 2.0})}), InputError);

  ScalarField fd_only("cubic", 3, [](const Eigen::VectorXd& x) { return x[0] * x[0] * x[1] + std::sin(x[2]); });
  const Eigen::VectorXd x = vec({0.3, -0.7, 1.1});
  CHECK(fd_only.gradient(x)[0] == doctest::Approx(2 * 0.3 * -0.7).epsilon(1e-7));
  CHECK(fd_only.hessian(x)(2, 2) == doctest::Approx(-std::sin(1.1)).epsilon(1e-4));
  CHECK_THROWS_AS(builtin_field("nope", 4), InputError);
  CHECK_THROWS_AS(builtin_field("coord:9", 4), InputError);
}

TEST_CASE("d_phi examples") {
  const auto w = catalogue("omega4").form;
  const auto r = d_phi(builtin_field("re_z1", 4), vec({0.2, 0.1, -0.4, 0.9}), w);
  CHECK((r - ExteriorElement::basis(4, {2})).norm() < 1e-14);

  const auto lam = lambda_example_form(0.5);
  const auto r2 = d_phi(builtin_field("coord:3", 4), vec({1, 2, 3, 4}), lam);
  CHECK((r2 - ExteriorElement::basis(4, {4}, 0.5)).norm() < 1e-14);

  ScalarField c("const", 4, [](const Eigen::VectorXd&) { return 3.0; });
  CHECK(d_phi(c, vec({1, 2, 3, 4}), w).norm() < 1e-9);
}

TEST_CASE("hessian_form examples") {
  const auto w = catalogue("omega4").form;
  const auto f = builtin_field("half_normsq", 4);
  CHECK((hessian_form(f, vec({0.5, 1, 2, 3}), w) - w * 2.0).norm() < 1e-13);

  const auto cay = cayley_form();
  CHECK((hessian_form(builtin_field("half_normsq", 8), Eigen::VectorXd::Zero(8), cay) - cay * 4.0).norm() < 1e-12);

  // Re z1^2 pairs to zero with every complex line (oracle: trace over the explicit family).
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  const auto re = builtin_field("re_z1_sq", 4);
  const Eigen::VectorXd x = vec({0.3, 0.2, -1, 0.5});
  const auto h = hessian_form(re, x, w);
  const Eigen::MatrixXd j = complex_structure(2);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd u(4);
    for (auto& c : u) c = g(rng);
    u.normalize();
    Eigen::MatrixXd fr(4, 2);
    fr << u, j * u;
    CHECK(std::abs(oracles::complex_line_trace(re.hessian(x), u)) < 1e-12);
    CHECK(std::abs(pairing(h, simple_from_frame(fr).pvector)) < 1e-12);
  }

  const auto lam = catalogue("lambda:0.5");
  const auto hl = hessian_form(builtin_field("neg_coord_sq:3", 4), vec({0, 0, 1, 0}), lam.form);
  CHECK(std::abs(pairing(hl, ExteriorElement::basis(4, {1, 2}))) < 1e-15);
}

TEST_CASE("property: hessian form agrees with the finite-difference d of d_phi") {
  std::mt19937_64 rng(8);
  for (const char* sel : {"omega4", "special_lagrangian:3", "associative"}) {
    const auto phi = catalogue(sel).form;
    const int n = phi.dim();
    for (int t = 0; t < 5; ++t) {
      ScalarField f("smooth", n, [](const Eigen::VectorXd& x) { return std::exp(0.3 * x.sum()) + x[0] * x[1] * x[1]; },
                    [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
                      Eigen::VectorXd g = Eigen::VectorXd::Constant(x.size(), 0.3 * std::exp(0.3 * x.sum()));
                      g[0] += x[1] * x[1];
                      g[1] += 2 * x[0] * x[1];
                      return g;
                    });
      const Eigen::VectorXd x = Eigen::VectorXd::Random(n);
      const auto chk = hessian_form_checked(f, x, phi);
      CHECK_FALSE(chk.step_warning);
      CHECK(chk.discrepancy < 1e-3 * (1.0 + f.hessian(x).norm()));
    }
    const auto q = random_quadratic(n, rng);
    CHECK(hessian_form_checked(q, Eigen::VectorXd::Random(n), phi).discrepancy < 1e-8);
  }
}

TEST_CASE("trace_check examples") {
  const auto w = catalogue("omega4").form;
  ScalarField f("diag", 4, [](const Eigen::VectorXd& x) { return x[0] * x[0] - x[1] * x[1]; });
  const SimplePlane line(Eigen::MatrixXd::Identity(4, 2));
  const auto t = trace_check(f, Eigen::VectorXd::Zero(4), line, w);
  CHECK(std::abs(t.lhs) < 1e-6);
  CHECK(std::abs(t.rhs) < 1e-6);

  const auto s = samples_of("special_lagrangian:3", 10);
  for (const auto& pl : s.planes) {
    const auto tt = trace_check(builtin_field("half_normsq", 6), Eigen::VectorXd::Ones(6), pl, s.form);
    CHECK(tt.lhs == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(tt.rhs == doctest::Approx(3.0).epsilon(1e-12));
  }
}

TEST_CASE("property: trace identity on sampled planes") {
  std::mt19937_64 rng(12);
  for (const char* sel : {"omega4", "kaehler:3:2", "special_lagrangian:3", "associative", "coassociative", "cayley"}) {
    const auto& s = samples_of(sel, 10);
    const int n = s.form.dim();
    for (int t = 0; t < 200; ++t) {
      const auto q = random_quadratic(n, rng);
      const auto& pl = s.planes[static_cast<std::size_t>(t) % s.size()];
      CHECK(trace_check(q, Eigen::VectorXd::Random(n), pl, s.form).gap < 1e-9);
    }
  }
}

TEST_CASE("psh_classify examples") {
  const auto& w = samples_of("omega4");
  const std::vector<Eigen::VectorXd> pts{Eigen::VectorXd::Zero(4), vec({1, -1, 0.5, 2})};
  const auto r1 = psh_classify(builtin_field("half_normsq", 4), pts, w);
  CHECK(r1.overall == PshStatus::StrictlyPsh);
  CHECK(r1.min_margin == doctest::Approx(2.0).epsilon(1e-9));

  const auto& lam = samples_of("lambda:0.5");
  const auto r2 = psh_classify(builtin_field("neg_coord_sq:3", 4), pts, lam);
  CHECK(r2.overall == PshStatus::Psh);
  CHECK(std::abs(r2.min_margin) < 1e-9);

  const auto r3 = psh_classify(builtin_field("neg_normsq", 4), pts, w);
  CHECK(r3.overall == PshStatus::NotPsh);
  CHECK(r3.min_margin == doctest::Approx(-4.0).epsilon(1e-9));
  CHECK(pairing(w.form, r3.points[0].witness.pvector()) > 1 - 1e-9);
}

TEST_CASE("property: psh is stable under composition with exp") {
  const auto& w = samples_of("omega4");
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  // A psh quadratic: positive semidefinite part plus a pluriharmonic part.
  Eigen::MatrixXd a(4, 4);
  for (auto& c : a.reshaped()) c = g(rng);
  Polynomial q(4);
  const Eigen::MatrixXd psd = a * a.transpose();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      std::vector<int> e(4, 0);
      e[i] += 1;
      e[j] += 1;
      q.add_term(e, 0.5 * psd(i, j));
    }
  }
  q += builtin_field("re_z1_sq", 4).polynomial().value() * 3.0;
  const auto f = ScalarField::from_polynomial("psh", q * 0.1);
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < 4; ++i) pts.push_back(Eigen::VectorXd::Random(4));
  REQUIRE(psh_classify(f, pts, w).overall != PshStatus::NotPsh);
  auto ex = [](double t) { return std::exp(t); };
  const auto ef = f.compose("exp", ex, ex, ex);
  CHECK(psh_classify(ef, pts, w).overall != PshStatus::NotPsh);
}

TEST_CASE("pluriharmonic_mod_d_residual examples") {
  const auto& w = samples_of("omega4");
  const auto span = lambda_span(w);
  std::mt19937_64 rng(3);
  ScalarField lin = ScalarField::from_polynomial("lin", Polynomial::coordinate(4, 2) * 2.0 + Polynomial::coordinate(4, 0));
  CHECK(pluriharmonic_mod_d_residual(lin, Eigen::VectorXd::Random(4), span, w.form).residual < 1e-12);

  const auto z = builtin_field("abs_z1_sq", 4);
  const Eigen::VectorXd x = vec({1, 0, 0, 0});
  const auto r = pluriharmonic_mod_d_residual(z, x, span, w.form);
  CHECK(r.residual < 1e-10);
  CHECK(oracles::mod_d_residual_c2(hessian_form(z, x, w.form).to_dense(), z.gradient(x)) < 1e-10);
  CHECK((wedge(ExteriorElement::vector(z.gradient(x)), r.alpha) + r.sigma - hessian_form(z, x, w.form)).norm() < 1e-10);

  for (int t = 0; t < 5; ++t) {
    const auto q = random_quadratic(4, rng);
    const Eigen::VectorXd y = Eigen::VectorXd::Random(4);
    const auto rq = pluriharmonic_mod_d_residual(q, y, span, w.form);
    CHECK(rq.residual == doctest::Approx(oracles::mod_d_residual_c2(hessian_form(q, y, w.form).to_dense(), q.gradient(y)))
                             .epsilon(1e-8));
    CHECK(rq.residual > 10 * 1e-6);
  }
}

TEST_CASE("property: mod-d residual survives reparametrization") {
  const auto& w = samples_of("omega4");
  const auto span = lambda_span(w);
  const auto z = builtin_field("abs_z1_sq", 4);
  const auto chi = z.compose(
      "cubic", [](double t) { return t * t * t + t; }, [](double t) { return 3 * t * t + 1; },
      [](double t) { return 6 * t; });
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd x = Eigen::VectorXd::Random(4);
    REQUIRE(pluriharmonic_mod_d_residual(z, x, span, w.form).residual < 1e-10);
    CHECK(pluriharmonic_mod_d_residual(chi, x, span, w.form).residual < 1e-9);
  }
}

TEST_CASE("phi_flat_check examples") {
  const auto w = catalogue("omega4").form;
  const Eigen::VectorXd x = vec({0.6, 0.8, 0.1, -0.3});
  const auto r1 = phi_flat_check(builtin_field("re_z1", 4), x, w);
  CHECK(r1.flat);
  CHECK_FALSE(r1.vacuous);

  const auto r2 = phi_flat_check(builtin_field("abs_z1_sq", 4), x, w);
  CHECK(r2.flat);
  REQUIRE(r2.worst_plane.has_value());
  // The only tangential complex line is the z2-line.
  CHECK(subspace_angle(r2.worst_plane->frame(), Eigen::MatrixXd::Identity(4, 4).rightCols(2)) < 1e-6);

  const auto r3 = phi_flat_check(builtin_field("normsq", 4), x, w);
  CHECK_FALSE(r3.flat);
  // Hess = 2I gives trace 4 on every 2-plane.
  CHECK(r3.worst_value == doctest::Approx(4.0).epsilon(1e-9));

  CHECK_THROWS_AS(phi_flat_check(builtin_field("normsq", 4), Eigen::VectorXd::Zero(4), w), InputError);
  // Volume form: no p-plane fits inside a hyperplane.
  CHECK(phi_flat_check(builtin_field("re_z1", 3), vec({1, 1, 1}), ExteriorElement::volume(3)).vacuous);
}

TEST_CASE("property: mod-d residual matches flatness on normal calibrations") {
  const auto& w = samples_of("omega4");
  const auto span = lambda_span(w);
  std::mt19937_64 rng(44);
  std::vector<ScalarField> fields{builtin_field("abs_z1_sq", 4), random_quadratic(4, rng), random_quadratic(4, rng)};
  for (const auto& f : fields) {
    for (int i = 0; i < 3; ++i) {
      const Eigen::VectorXd x = Eigen::VectorXd::Random(4);
      const bool modd = pluriharmonic_mod_d_residual(f, x, span, w.form).residual <= 1e-6;
      CHECK(modd == phi_flat_check(f, x, w.form).flat);
    }
  }
}

TEST_CASE("normality_check examples") {
  for (const char* sel : {"kaehler:2:1", "special_lagrangian:3", "associative"}) {
    const auto rep = normality_check(catalogue(sel).form, 50);
    INFO(sel);
    CHECK(rep.normal);
    CHECK(rep.max_mismatch < 1e-8);
    CHECK(rep.degenerate < rep.trials);
  }
}

TEST_CASE("symbol examples") {
  const auto w = catalogue("omega4").form;
  CHECK((symbol(Eigen::VectorXd::Unit(4, 0), w) - ExteriorElement::basis(4, {1, 2})).norm() < 1e-15);
  const auto s = symbol(Eigen::VectorXd::Unit(4, 2), lambda_example_form(0.3));
  CHECK((s - ExteriorElement::basis(4, {3, 4}, 0.3)).norm() < 1e-15);
}

TEST_CASE("reduced_hessian examples") {
  const auto& w = samples_of("omega4");
  const auto span = lambda_span(w);
  CHECK(reduced_hessian(builtin_field("re_z1_sq", 4), vec({1, 2, 3, 4}), span, w.form).norm() < 1e-9);
  CHECK((reduced_hessian(builtin_field("half_normsq", 4), vec({1, 2, 3, 4}), span, w.form) - w.form * 2.0).norm() < 1e-9);
  const auto& lam = samples_of("lambda:0.5");
  CHECK(reduced_hessian(builtin_field("neg_coord_sq:3", 4), vec({0, 0, 1, 0}), lambda_span(lam), lam.form).norm() < 1e-12);
}

TEST_CASE("property: ellipticity of the reduction matches the symbol bound") {
  for (const char* sel : {"lambda:0.5", "omega4", "special_lagrangian:3", "associative", "cayley", "volume:3"}) {
    const auto& s = samples_of(sel, 20);
    const auto red = reduce_calibration(s);
    const auto e = symbol_ellipticity(s);
    INFO(sel);
    CHECK(red.elliptic == (e.lower > 1e-8));
    if (!red.elliptic) CHECK(e.upper < 1e-8);
  }
}
