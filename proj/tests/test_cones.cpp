#include <cmath>
#include <random>

#include "calibr/cones.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace calibr;

namespace {

const PlaneSampleSet& omega_samples() {
  static const PlaneSampleSet s = sample_grassmannian(catalogue("omega4"), SampleOptions{.count = 30});
  return s;
}

const PlaneSampleSet& lambda_samples() {
  static const PlaneSampleSet s = sample_grassmannian(catalogue("lambda:0.5"), SampleOptions{.count = 50});
  return s;
}

const PlaneSampleSet& volume_samples() {
  static const PlaneSampleSet s = sample_grassmannian(catalogue("volume:3"), SampleOptions{.count = 5});
  return s;
}

ExteriorElement e(int n, std::initializer_list<int> idx, double c = 1.0) { return ExteriorElement::basis(n, idx, c); }

}  // namespace

TEST_CASE("lambda_span dimensions") {
  CHECK(lambda_span(volume_samples()).dim() == 1);
  CHECK(lambda_span(lambda_samples()).dim() == 1);
  const int expected = oracles::complex_line_span_rank(2);
  CHECK(expected == 4);
  CHECK(lambda_span(omega_samples()).dim() == expected);
  // The span contains omega itself and its complement is orthogonal to every sample.
  const auto span = lambda_span(omega_samples());
  CHECK((span.project(omega_samples().form) - omega_samples().form).norm() < 1e-9);
  const Eigen::MatrixXd comp = span.complement();
  CHECK(comp.cols() == 2);
  for (const auto& pl : omega_samples().planes) CHECK((comp.transpose() * pl.pvector().to_dense()).norm() < 1e-8);
}

TEST_CASE("cone_membership examples") {
  const auto& s = omega_samples();
  const auto r1 = cone_membership(e(4, {1, 2}), s);
  CHECK(r1.status != ConeStatus::Outside);
  REQUIRE(r1.weights.size() == 1);
  CHECK(r1.weights[0] == doctest::Approx(1.0).epsilon(1e-9));

  const auto xi = (s.planes[0].pvector() + s.planes[1].pvector()) * 0.5;
  const auto r2 = cone_membership(xi, s);
  CHECK(r2.status != ConeStatus::Outside);
  ExteriorElement rebuilt(4, 2);
  for (std::size_t k = 0; k < r2.weights.size(); ++k) rebuilt += r2.planes[k].pvector() * r2.weights[k];
  CHECK((rebuilt - xi).norm() < 1e-8);

  const auto r3 = cone_membership(e(4, {3, 4}), lambda_samples());
  CHECK(r3.status == ConeStatus::Outside);
  CHECK(r3.margin < -1e-6);
  REQUIRE(r3.separator.has_value());
  CHECK(pairing(*r3.separator, e(4, {3, 4})) > 0.0);
  CHECK(pairing(*r3.separator, lambda_samples().planes[0].pvector()) <= 1e-9);

  CHECK_THROWS_AS(cone_membership(e(5, {1, 2}), s), DimensionError);
}

TEST_CASE("interior membership has positive depth") {
  // omega / 2 = average over the two coordinate complex lines, which lies in the relative interior.
  const auto r = cone_membership(omega_samples().form, omega_samples());
  CHECK(r.status == ConeStatus::Interior);
  CHECK(r.margin > 1e-3);
}

TEST_CASE("mass_norm_estimate examples") {
  const auto m1 = mass_norm_estimate(e(4, {1, 2}));
  CHECK(m1.upper == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(m1.lower == doctest::Approx(1.0).epsilon(1e-10));

  const auto xi = e(4, {1, 2}) + e(4, {3, 4});
  const auto m2 = mass_norm_estimate(xi);
  // Independent bounds: the decomposition e12 + e34 gives 2 from above; the form dx12 + dx34
  // has comass 1 (grid oracle) and pairs to 2 with xi.
  const double dual_comass = oracles::grid_comass(xi);
  CHECK(dual_comass == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(m2.upper - 2.0) <= 2e-6);
  CHECK(std::abs(m2.lower - 2.0) <= 2e-6);
  CHECK(m2.upper >= m2.lower - 1e-12);

  for (double c : {-3.0, 0.25, 7.0}) {
    Eigen::MatrixXd f(5, 3);
    f << 1, 0, 0, 0, 0.6, 0, 0, 0.8, 0, 0, 0, 1, 0, 0, 0;
    const auto simple = plucker(f) * c;
    const auto m = mass_norm_estimate(simple);
    CHECK(std::abs(m.upper - std::abs(c)) < 1e-8);
    CHECK(std::abs(m.lower - std::abs(c)) < 1e-8);
  }
  CHECK_THROWS_AS(mass_norm_estimate(ExteriorElement(4, 2)), InputError);
}

TEST_CASE("property: mass bracket is ordered and contains the exact 2-vector mass") {
  // Oracle: a 2-vector is a skew matrix; its mass is half the sum of the singular values.
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int t = 0; t < 3; ++t) {
    Eigen::VectorXd v(10);
    for (auto& x : v) x = g(rng);
    const auto xi = ExteriorElement::from_dense(5, 2, v);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 5);
    for (const auto& [b, c] : xi.terms()) {
      const auto id = b.indices();
      a(id[0] - 1, id[1] - 1) = c;
      a(id[1] - 1, id[0] - 1) = -c;
    }
    const double exact = 0.5 * Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues().sum();
    const auto m = mass_norm_estimate(xi);
    CHECK(m.upper >= m.lower);
    CHECK(m.lower <= exact + 1e-9);
    CHECK(m.upper >= exact - 1e-9);
    CHECK(m.upper - m.lower <= 1e-4 * exact);
    ExteriorElement rebuilt(5, 2);
    for (std::size_t k = 0; k < m.weights.size(); ++k) rebuilt += m.planes[k].pvector() * m.weights[k];
    CHECK((rebuilt - xi).norm() < 1e-8);
  }
}

TEST_CASE("positivity_classify examples") {
  const auto& s = omega_samples();
  const auto r1 = positivity_classify(s.form, s);
  CHECK(r1.status == ConeStatus::Interior);
  CHECK(r1.margin == doctest::Approx(1.0).epsilon(1e-9));

  const auto r2 = positivity_classify(e(4, {3, 4}), s);
  CHECK(r2.status == ConeStatus::Boundary);
  REQUIRE(r2.witness.has_value());
  CHECK(subspace_angle(r2.witness->frame(), oracles::first_complex_line(2)) < 1e-3);

  const auto r3 = positivity_classify(e(4, {1, 2}, -1.0), s);
  CHECK(r3.status == ConeStatus::Outside);
  CHECK(r3.margin == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(subspace_angle(r3.witness->frame(), oracles::first_complex_line(2)) < 1e-3);
}

TEST_CASE("property: positivity is invariant under positive scaling") {
  const auto& s = omega_samples();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int t = 0; t < 4; ++t) {
    Eigen::VectorXd v(6);
    for (auto& x : v) x = g(rng);
    const auto a = ExteriorElement::from_dense(4, 2, v) + s.form * 1.5;
    const auto base = positivity_classify(a, s);
    for (double c : {0.5, 3.0}) {
      const auto r = positivity_classify(a * c, s);
      CHECK(r.status == base.status);
      CHECK(r.margin == doctest::Approx(c * base.margin).epsilon(1e-7));
    }
  }
}

TEST_CASE("property: polar consistency between positivity and membership") {
  const auto& s = omega_samples();
  const auto alpha = s.form + e(4, {1, 3}, 0.3);
  const auto pos = positivity_classify(alpha, s);
  REQUIRE(pos.status == ConeStatus::Interior);
  for (std::size_t k = 0; k + 2 < 8; ++k) {
    const auto xi = s.planes[k].pvector() * 0.7 + s.planes[k + 2].pvector() * 1.9;
    const auto mem = cone_membership(xi, s);
    REQUIRE(mem.status != ConeStatus::Outside);
    double total = 0.0;
    for (double w : mem.weights) total += w;
    CHECK(pairing(alpha, xi) >= pos.margin * total - 1e-6);
  }
}

TEST_CASE("property: simple unit p-vectors are members iff phi(xi) = 1") {
  const auto& s = omega_samples();
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  const Eigen::MatrixXd j = complex_structure(2);
  int members = 0;
  for (int t = 0; t < 16; ++t) {
    Eigen::MatrixXd f(4, 2);
    for (auto& x : f.reshaped()) x = g(rng);
    if (t % 2 == 0) f.col(1) = j * f.col(0);
    const auto xi = simple_from_frame(f).pvector;
    const bool unit = std::abs(pairing(s.form, xi) - 1.0) <= 1e-6;
    const auto r = cone_membership(xi, s);
    CHECK((r.status != ConeStatus::Outside) == unit);
    members += unit;
  }
  CHECK(members == 8);
}

TEST_CASE("contraction_boundary examples") {
  const auto c1 = contraction_boundary(Eigen::Vector4d(1, 0, 0, 0), omega_samples());
  CHECK((c1.phi_e - e(4, {3, 4})).norm() < 1e-14);
  CHECK(c1.report.status == ConeStatus::Boundary);
  CHECK(subspace_angle(c1.report.witness->frame(), oracles::first_complex_line(2)) < 1e-3);
  CHECK(c1.span_criterion_boundary);
  CHECK(c1.consistent);

  const auto c2 = contraction_boundary(Eigen::Vector4d(0, 0, 1, 0), lambda_samples());
  CHECK((c2.phi_e - e(4, {1, 2})).norm() < 1e-14);
  CHECK(c2.report.status == ConeStatus::Interior);
  CHECK(c2.report.margin == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_FALSE(c2.span_criterion_boundary);
  CHECK(c2.consistent);

  const auto c3 = contraction_boundary(Eigen::Vector3d(1, 0, 0), volume_samples());
  CHECK(c3.phi_e.is_zero());
  CHECK(c3.report.status == ConeStatus::Boundary);
  CHECK(c3.consistent);

  CHECK_THROWS_AS(contraction_boundary(Eigen::Vector4d(2, 0, 0, 0), omega_samples()), InputError);
}

TEST_CASE("lemma_2_5_check examples") {
  const auto& s = omega_samples();
  const auto l1 = lemma_2_5_check(s.planes[3].pvector(), s);
  CHECK(l1.in_cone);
  CHECK(l1.in_hull);
  CHECK(l1.unit_value);
  CHECK(l1.agree);

  const auto xi = (s.planes[0].pvector() + s.planes[1].pvector()) * 0.5;
  const auto l2 = lemma_2_5_check(xi, s);
  CHECK(l2.mass_lower == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(l2.mass_upper == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(l2.in_cone);
  CHECK(l2.in_hull);
  CHECK(l2.unit_value);
  CHECK(l2.agree);

  const auto l3 = lemma_2_5_check(e(4, {3, 4}), lambda_samples());
  CHECK_FALSE(l3.in_cone);
  CHECK_FALSE(l3.in_hull);
  CHECK_FALSE(l3.unit_value);
  CHECK(l3.phi_value == doctest::Approx(0.5));
  CHECK(l3.agree);

  CHECK_THROWS_AS(lemma_2_5_check(e(4, {1, 2}, 3.0), s), InputError);
}

TEST_CASE("positive_basis examples") {
  const auto b1 = positive_basis(volume_samples());
  CHECK(b1.elements.size() == 1);
  CHECK(b1.rank == 1);

  const auto b2 = positive_basis(omega_samples(), 0.1);
  CHECK(b2.elements.size() == 6);
  CHECK(b2.rank == 6);
  for (double m : b2.margins) CHECK(m > 0.0);

  const auto b3 = positive_basis(lambda_samples(), 0.1);
  CHECK(b3.elements.size() == 6);
  CHECK(b3.rank == 6);
  // On the single plane e12 the margin is 1 + eps on the e12 perturbation and 1 otherwise.
  const auto xi = e(4, {1, 2});
  for (std::size_t k = 0; k < b3.elements.size(); ++k) {
    CHECK(b3.margins[k] == doctest::Approx(pairing(b3.elements[k], xi)).epsilon(1e-9));
    CHECK(b3.margins[k] >= 1.0 - 1e-12);
  }
}
