#include <cmath>
#include <random>

#include "calibr/calibration.hpp"
#include "calibr/grassmann.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace calibr;

TEST_CASE("compiled form matches pairing and finite-difference gradient") {
  std::mt19937_64 rng(3);
  const auto phi = cayley_form();
  const CompiledForm c(phi);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd v = random_frame(8, 4, rng);
    Eigen::MatrixXd g;
    const double val = c.value_and_gradient(v, g);
    CHECK(val == doctest::Approx(pairing(phi, plucker(v))).epsilon(1e-13));
    const double h = 1e-6;
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 4; ++j) {
        Eigen::MatrixXd vp = v, vm = v;
        vp(i, j) += h;
        vm(i, j) -= h;
        CHECK(g(i, j) == doctest::Approx((c.value(vp) - c.value(vm)) / (2 * h)).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("comass examples") {
  const auto r1 = comass(ExteriorElement::basis(4, {1, 2}));
  CHECK(r1.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(plane_distance(r1.maximizer, SimplePlane(Eigen::MatrixXd::Identity(4, 2))) < 1e-6);

  const auto r2 = comass(kaehler_form(2, 1));
  CHECK(r2.value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r2.saturated);

  const auto phi6 = ExteriorElement::basis(6, {1, 2, 3}) + ExteriorElement::basis(6, {4, 5, 6});
  const auto r3 = comass(phi6);
  // Frozen from the Stiefel grid oracle in oracles.hpp (bound within 1e-3).
  CHECK(r3.value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(r3.value - oracles::grid_comass_two_triples()) < 1e-3);
}

TEST_CASE("comass invariants: homogeneity and lower-bound consistency") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  Eigen::VectorXd coeffs(20);
  for (auto& x : coeffs) x = g(rng);
  const auto phi = ExteriorElement::from_dense(6, 3, coeffs);
  ComassOptions opts;
  opts.multistarts = 48;
  const double base = comass(phi, opts).value;
  for (int t = 0; t < 4; ++t) {
    const double c = u(rng);
    CHECK(std::abs(comass(phi * c, opts).value - std::abs(c) * base) < 1e-8 * std::max(1.0, std::abs(c) * base));
  }
  for (int t = 0; t < 500; ++t) {
    const Eigen::MatrixXd v = random_frame(6, 3, rng);
    CHECK(base >= std::abs(pairing(phi, plucker(v))) - 1e-12);
  }
}

TEST_CASE("comass is deterministic for a fixed seed") {
  const auto phi = special_lagrangian_form(3) + ExteriorElement::basis(6, {1, 3, 5}, 0.3);
  ComassOptions opts;
  opts.multistarts = 16;
  opts.seed = 99;
  const auto a = comass(phi, opts);
  const auto b = comass(phi, opts);
  CHECK(a.value == b.value);
  CHECK((a.maximizer.frame() - b.maximizer.frame()).norm() == 0.0);
  opts.threads = 3;
  const auto c = comass(phi, opts);
  CHECK(a.value == c.value);
  CHECK((a.maximizer.frame() - c.maximizer.frame()).norm() == 0.0);
}

TEST_CASE("sample_grassmannian: lambda example collapses to one plane") {
  const auto cal = catalogue("lambda:0.5");
  SampleOptions opts;
  opts.count = 50;
  opts.tol = 1e-6;
  const auto s = sample_grassmannian(cal, opts);
  REQUIRE(s.size() == 1);
  CHECK(s.exhausted);
  CHECK(plane_distance(s.planes[0], SimplePlane(Eigen::MatrixXd::Identity(4, 2))) < 1e-3);
}

TEST_CASE("sample_grassmannian: Kähler planes are complex lines") {
  const auto cal = catalogue("kaehler:2:1");
  SampleOptions opts;
  opts.count = 100;
  const auto s = sample_grassmannian(cal, opts);
  CHECK(s.size() == 100);
  const Eigen::MatrixXd j = complex_structure(2);
  for (const auto& pl : s.planes) {
    CHECK(subspace_angle(pl.frame(), j * pl.frame()) < 1e-3);
  }
}

TEST_CASE("sample_grassmannian: volume form has one plane") {
  const auto s = sample_grassmannian(catalogue("volume:3"), SampleOptions{.count = 10});
  CHECK(s.size() == 1);
}

TEST_CASE("sample_grassmannian rejects forms with comass != 1") {
  Calibration bad;
  bad.name = "twice";
  bad.form = ExteriorElement::basis(4, {1, 2}, 2.0);
  CHECK_THROWS_AS(sample_grassmannian(bad), InputError);
}

TEST_CASE("constrained_extremum examples") {
  const auto cal = catalogue("omega4");
  const auto s = sample_grassmannian(cal, SampleOptions{.count = 20});
  const auto w = cal.form;
  CHECK(constrained_extremum(w, s, ExtremumMode::Min).value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(constrained_extremum(w * -1.0, s, ExtremumMode::Min).value == doctest::Approx(-1.0).epsilon(1e-10));

  const auto r = constrained_extremum(ExteriorElement::basis(4, {3, 4}), s, ExtremumMode::Min);
  // Oracle: explicit minimization over the complex-line family (oracles.hpp).
  CHECK(std::abs(r.value - oracles::min_dx2dy2_over_complex_lines()) < 1e-8);
  CHECK(std::abs(r.value) < 1e-8);
  CHECK(subspace_angle(r.witness.frame(), Eigen::MatrixXd::Identity(4, 2)) < 1e-3);
  CHECK(r.phi_value > 1.0 - 1e-9);
  CHECK_THROWS_AS(constrained_extremum(w, PlaneSampleSet{.form = w}, ExtremumMode::Min), InputError);
}

TEST_CASE("reduce_calibration examples") {
  {
    const auto s = sample_grassmannian(catalogue("lambda:0.5"), SampleOptions{.count = 50});
    const auto red = reduce_calibration(s);
    CHECK_FALSE(red.elliptic);
    REQUIRE(red.basis.cols() == 2);
    CHECK(subspace_angle(red.basis, Eigen::MatrixXd::Identity(4, 2)) < 1e-8);
    CHECK((red.psi - ExteriorElement::basis(2, {1, 2})).norm() < 1e-8);
    REQUIRE(red.witness.has_value());
    CHECK(std::abs((*red.witness)[0]) < 1e-8);
    CHECK(std::abs((*red.witness)[1]) < 1e-8);
    CHECK(red.witness_defect < 1e-8);
  }
  {
    const auto s = sample_grassmannian(catalogue("kaehler:2:1"), SampleOptions{.count = 20});
    const auto red = reduce_calibration(s);
    CHECK(red.elliptic);
    CHECK(oracles::complex_lines_cover_every_direction(s.form));
  }
  {
    const auto s = sample_grassmannian(catalogue("volume:4"), SampleOptions{.count = 5});
    CHECK(reduce_calibration(s).elliptic);
  }
}

TEST_CASE("symbol identity and first-cousin vanishing on catalogue planes") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  for (const char* sel : {"kaehler:2:1", "special_lagrangian:3", "associative", "cayley", "lambda:0.5"}) {
    const auto cal = catalogue(sel);
    const auto s = sample_grassmannian(cal, SampleOptions{.count = 10});
    const int n = cal.dim();
    for (const auto& pl : s.planes) {
      const auto xi = pl.pvector();
      for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd e(n);
        for (auto& x : e) x = g(rng);
        e.normalize();
        const Eigen::VectorXd a = pl.projector() * e;
        const Eigen::VectorXd b = e - a;
        const auto sym = wedge(ExteriorElement::vector(e), interior_product(e, cal.form));
        CHECK(std::abs(pairing(sym, xi) - a.squaredNorm()) < 1e-9);
        if (a.norm() > 1e-12 && b.norm() > 1e-12) {
          const auto cousin = wedge(ExteriorElement::vector(b), interior_product(a, xi));
          CHECK(std::abs(pairing(cal.form, cousin)) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("every catalogue entry certifies with comass 1") {
  for (const auto& e : catalogue_list()) {
    std::string sel = e.name;
    const auto cal = catalogue(sel);
    REQUIRE(cal.certified_comass.has_value());
    CHECK(std::abs(*cal.certified_comass - 1.0) < 1e-6);
  }
  CHECK(catalogue("kaehler(3,2)").name == "kaehler(3,2)");
  CHECK_THROWS_AS(catalogue("nonsense"), InputError);
  CHECK_THROWS_AS(catalogue("kaehler:2"), InputError);
  CHECK_THROWS_AS(catalogue("lambda:1.5"), InputError);
}

TEST_CASE("catalogue forms match independent constructions") {
  // Kähler omega^2/2 in C^3 from the wedge square.
  const auto w = kaehler_form(3, 1);
  CHECK((wedge(w, w) * 0.5 - kaehler_form(3, 2)).norm() < 1e-14);
  // Coassociative is the Hodge dual of the associative form; Cayley restricts to it on e1-perp.
  CHECK(coassociative_form().terms().size() == 7);
  CHECK(cayley_form().terms().size() == 14);
  // Quaternionic form in H^1 is the volume form.
  CHECK((quaternionic_form(1) - ExteriorElement::volume(4)).norm() < 1e-14);
}
