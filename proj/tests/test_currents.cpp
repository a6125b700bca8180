#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "calibr/currents.hpp"
#include "doctest.h"

using namespace calibr;

namespace {

const double kPi = std::numbers::pi;

PolyhedralCurrent unit_square(double mult = 1.0) {
  Eigen::MatrixXd v(2, 4);
  v << 0, 1, 1, 0, 0, 0, 1, 1;
  return PolyhedralCurrent(2, v, {{{0, 1, 2}, mult}, {{0, 2, 3}, mult}});
}

const ExteriorElement& omega() {
  static const ExteriorElement w = catalogue("omega4").form;
  return w;
}

const PlaneSampleSet& omega_samples() {
  static const PlaneSampleSet s = sample_grassmannian(catalogue("omega4"), SampleOptions{.count = 30});
  return s;
}

std::vector<ScalarField> green_tests() {
  return {builtin_field("re_z1", 4), builtin_field("abs_z1_sq", 4), builtin_field("re_z1_sq", 4),
          builtin_field("normsq", 4)};
}

PolyForm random_form(int n, int p, int deg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  PolyForm f(n, p);
  for (const auto& b : blades(n, p)) {
    Polynomial c(n);
    for (const auto& e : monomials_up_to(n, deg)) c.add_term(e, u(rng));
    f.add_term(b, c);
  }
  return f;
}

}  // namespace

TEST_CASE("boundary of a split square") {
  const auto sq = unit_square();
  const auto b = boundary(sq);
  CHECK(b.size() == 4);
  for (const auto& s : b.simplices()) CHECK(std::abs(s.multiplicity) == 1.0);
  CHECK(boundary(b).size() == 0);
  CHECK(mass(sq) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mass(unit_square(-2.0)) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("invalid currents are rejected") {
  Eigen::MatrixXd v(2, 3);
  v << 0, 1, 2, 0, 0, 0;
  CHECK_THROWS_AS(PolyhedralCurrent(2, v, {{{0, 1, 2}, 1.0}}), InputError);
  CHECK_THROWS_AS(PolyhedralCurrent(2, v, {{{0, 1}, 1.0}}), InputError);
  CHECK_THROWS_AS(PolyhedralCurrent(1, v, {{{0, 3}, 1.0}}), InputError);
}

TEST_CASE("disc meshes: rim boundary and area convergence") {
  double prev_err = 1.0;
  for (double h : {0.2, 0.1, 0.05}) {
    const auto d = disc_mesh(h);
    const int k = static_cast<int>(std::ceil(1.0 / h - 1e-12));
    const auto b = boundary(d);
    CHECK(b.size() == static_cast<std::size_t>(6 * k));
    for (const auto& s : b.simplices()) {
      for (int v : s.vertices) CHECK(d.vertex(v).norm() == doctest::Approx(1.0));
    }
    CHECK(boundary(b).size() == 0);
    // The mesh is the union of inscribed polygons; its area is the outer 6K-gon's.
    const int m = 6 * k;
    const double polygon = 0.5 * m * std::sin(2 * kPi / m);
    CHECK(mass(d) == doctest::Approx(polygon).epsilon(1e-12));
    const double err = kPi - mass(d);
    CHECK(err > 0.0);
    CHECK(err < prev_err / 3.0);
    prev_err = err;
  }
}

TEST_CASE("evaluate: exactness and Stokes") {
  // (a + b x + c y) dx^dy over the reference triangle.
  Eigen::MatrixXd v(2, 3);
  v << 0, 1, 0, 0, 0, 1;
  const PolyhedralCurrent tri(2, v, {{{0, 1, 2}, 1.0}});
  PolyForm a(2, 2);
  Polynomial c = Polynomial::constant(2, 0.7);
  c.add_term({1, 0}, -1.3);
  c.add_term({0, 1}, 2.9);
  a.add_term(Blade::from_indices(std::vector<int>{1, 2}), c);
  CHECK(std::abs(evaluate(tri, a, 1) - (0.7 / 2 - 1.3 / 6 + 2.9 / 6)) < 1e-12);

  const auto d = disc_mesh(0.2);
  CHECK(evaluate(d, PolyForm::from_constant(omega(), Polynomial::constant(4, 1.0))) == doctest::Approx(mass(d)));
  const double theta = 0.7;
  const auto t = tilted_disc_mesh(theta, 0.2);
  CHECK(evaluate(t, PolyForm::from_constant(omega(), Polynomial::constant(4, 1.0))) ==
        doctest::Approx(std::cos(theta) * mass(t)).epsilon(1e-12));

  std::mt19937_64 rng(3);
  for (const auto& cur : {graph_curve_mesh(0.34), cap_mesh(0.4, 0.34)}) {
    const PolyForm beta = random_form(4, 1, 3, rng);
    const double lhs = evaluate(boundary(cur), beta);
    const double rhs = evaluate(cur, beta.d());
    CHECK(std::abs(lhs - rhs) < 1e-11 * (1 + std::abs(lhs)));
  }
  CHECK_THROWS_AS(evaluate(d, PolyForm(4, 1)), DimensionError);
}

TEST_CASE("phi-positivity and calibration gap") {
  const auto d = disc_mesh(0.1);
  CHECK(phi_positive_check(d, omega()).positive);
  const auto r = phi_positive_check(d.reversed(), omega());
  CHECK_FALSE(r.positive);
  CHECK(r.violations.front().phi_value == doctest::Approx(-1.0));

  Eigen::MatrixXd lag = Eigen::MatrixXd::Zero(4, 3);
  lag(0, 1) = 1.0;
  lag(2, 2) = 1.0;
  const PolyhedralCurrent patch(2, lag, {{{0, 1, 2}, 1.0}});
  const auto lp = phi_positive_check(patch, omega());
  CHECK_FALSE(lp.positive);
  CHECK(std::abs(lp.violations.front().phi_value) < 1e-15);

  const auto g = calibration_gap(d, omega());
  CHECK(g.positive);
  for (std::size_t k = 0; k < d.size(); ++k) {
    CHECK(d.volume(k) - pairing(omega(), d.tangent(k)) * d.volume(k) < 1e-12);
  }
  CHECK(std::abs(g.gap) < 1e-12);

  for (double theta : {0.1, 0.5, 1.0}) {
    const auto t = tilted_disc_mesh(theta, 0.1);
    const auto tg = calibration_gap(t, omega());
    CHECK(std::abs(tg.gap - (1 - std::cos(theta)) * tg.mass) < 1e-9);
    CHECK_FALSE(tg.positive);
  }

  // The cap shares the rim; its area is pi (1 + H^2) in the limit.
  const double height = 0.5;
  const auto cap = cap_mesh(height, 0.05);
  CHECK(mass(cap) == doctest::Approx(kPi * (1 + height * height)).epsilon(5e-3));
  CHECK(mass(disc_mesh(0.05)) < mass(cap));
  // Same boundary: disc - cap is a cycle.
  const auto diff = add(disc_mesh(0.05), cap.reversed());
  CHECK(boundary(diff).size() == 0);
}

TEST_CASE("calibration gap is never negative") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (const char* sel : {"omega4", "special_lagrangian:3", "associative"}) {
    const auto cal = catalogue(sel);
    const int n = cal.form.dim(), p = cal.form.degree();
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::MatrixXd v(n, p + 1);
      for (auto& x : v.reshaped()) x = g(rng);
      std::vector<Simplex> s{{{}, g(rng)}};
      for (int i = 0; i <= p; ++i) s[0].vertices.push_back(i);
      const PolyhedralCurrent t(p, v, s);
      CHECK(calibration_gap(t, cal.form).gap >= -1e-12);
    }
  }
}

TEST_CASE("mesh file round trip and diagnostics") {
  const auto d = disc_mesh(0.5);
  std::stringstream ss;
  write_mesh(ss, d);
  const auto back = read_mesh(ss);
  CHECK(back.size() == d.size());
  CHECK((back.vertices() - d.vertices()).norm() == 0.0);

  std::istringstream bad("2 2\nv 0 0\nv 1 0\ns 0 1 5 1\n");
  try {
    read_mesh(bad);
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  std::istringstream junk("2 1\nv 0 0 0\n");
  CHECK_THROWS_AS(read_mesh(junk), InputError);
}

TEST_CASE("meshed submanifold validation") {
  CHECK_NOTHROW(MeshedSubmanifold::build(disc_mesh(0.2), omega()));
  CHECK_THROWS_AS(MeshedSubmanifold::build(tilted_disc_mesh(0.3, 0.2), omega()), InputError);
  auto t = disc_mesh(0.5);
  auto s = t.simplices();
  std::swap(s[0].vertices[1], s[0].vertices[2]);
  // One flipped triangle is both non-positive and inconsistently oriented.
  CHECK_THROWS_AS(MeshedSubmanifold::build(PolyhedralCurrent(2, t.vertices(), s), omega()), InputError);
  const auto m = MeshedSubmanifold::build(graph_curve_mesh(0.1), omega(), 0.1);
  CHECK(m.min_phi > 0.99);
  CHECK(m.min_phi < 1.0);
}

TEST_CASE("radial log integral oracle") {
  // int_0^1 -r log r dr = 1/4, by substitution r = u^4 and Gauss-Legendre.
  const auto rule = gauss_legendre(16);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double u = rule.nodes[i];
    const double r = std::pow(u, 4);
    s += rule.weights[i] * 4 * std::pow(u, 3) * (-r * std::log(r));
  }
  CHECK(s == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("Green check on the round disc") {
  const auto m = MeshedSubmanifold::build(disc_mesh(0.05), omega());
  const auto rep = green_check(m, 0, green_tests());
  CHECK(rep.exact);
  CHECK(rep.mu_sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.mu_min > 0.0);
  CHECK(rep.terms[0].lhs == doctest::Approx(0.0));
  CHECK(std::abs(rep.terms[0].rhs) < 1e-12);
  CHECK(rep.terms[1].rhs == doctest::Approx(1.0));
  CHECK(rep.terms[1].lhs == doctest::Approx(1.0).epsilon(5e-3));
  for (const auto& t : rep.terms) CHECK(t.residual < 5e-3);
  // Strict psh: the hull inequality f(x) < integral of f against mu.
  CHECK(rep.terms[3].rhs > 0.5);

  const auto fine = green_check(MeshedSubmanifold::build(disc_mesh(0.025), omega()), 0, green_tests());
  CHECK(fine.max_residual < rep.max_residual);

  CHECK_THROWS_AS(green_check(m, m.boundary_vertices().front(), green_tests()), InputError);
}

TEST_CASE("Green check via the discrete solve") {
  double prev = 1.0;
  for (double h : {0.1, 0.05}) {
    const auto m = MeshedSubmanifold::build(disc_mesh(h), omega());
    const auto rep = green_check(m, 0, green_tests(), GreenOptions{.allow_exact = false});
    CHECK_FALSE(rep.exact);
    CHECK(rep.mu_min >= -1e-12);
    CHECK(rep.mu_sum == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rep.g_min >= -1e-14);
    CHECK(rep.max_residual < prev);
    prev = rep.max_residual;
  }
  CHECK(prev < 5e-3);

  // Off-centre point of a disc: the rim is not equidistant, so the discrete solve is used.
  const auto m = MeshedSubmanifold::build(disc_mesh(0.1), omega());
  const auto rep = green_check(m, 5, green_tests());
  CHECK_FALSE(rep.exact);
  CHECK(rep.mu_sum == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.max_residual < 2e-2);
}

TEST_CASE("maximum principle checks") {
  const auto m = MeshedSubmanifold::build(disc_mesh(0.1), omega());
  const auto span = lambda_span(omega_samples());
  const auto re = max_principle_check(m, builtin_field("re_z1", 4), MaxPrincipleMode::Bounds, span);
  CHECK(re.precondition_ok);
  CHECK(re.holds);
  CHECK(re.worst < 0.0);

  // |z1|^2 fails the mod-d decomposition where its gradient vanishes, and the
  // lower bound indeed fails at the centre.
  const auto sq = max_principle_check(m, builtin_field("abs_z1_sq", 4), MaxPrincipleMode::Bounds, span);
  CHECK_FALSE(sq.precondition_ok);
  CHECK(sq.boundary_min == doctest::Approx(1.0));
  CHECK(sq.boundary_max == doctest::Approx(1.0));
  CHECK(sq.worst == doctest::Approx(1.0));

  // Off the centre the same function is pluriharmonic mod d, and the bounds hold.
  Eigen::MatrixXd frame = Eigen::MatrixXd::Zero(4, 2);
  frame(0, 0) = frame(1, 1) = 1.0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(4);
  c[0] = 2.0;
  const auto off = MeshedSubmanifold::build(embedded_disc_mesh(frame, c, 1.0, 0.1), omega());
  const auto sq2 = max_principle_check(off, builtin_field("abs_z1_sq", 4), MaxPrincipleMode::Bounds, span);
  CHECK(sq2.precondition_ok);
  CHECK(sq2.holds);

  const auto l58 = max_principle_check(m, builtin_field("coord:3", 4), MaxPrincipleMode::Lemma58, span);
  CHECK(l58.precondition_ok);
  CHECK(l58.holds);
  CHECK(l58.worst < 1e-15);
  const auto bad = max_principle_check(m, builtin_field("re_z1", 4), MaxPrincipleMode::Lemma58, span);
  CHECK_FALSE(bad.precondition_ok);
}

TEST_CASE("restriction subharmonicity") {
  const auto flat = MeshedSubmanifold::build(disc_mesh(0.1), omega());
  const auto r = restriction_subharmonicity(flat, builtin_field("normsq", 4), omega_samples());
  CHECK(r.precondition_ok);
  CHECK(r.holds);
  for (double v : r.laplacian) CHECK(v == doctest::Approx(4.0).epsilon(1e-9));

  const auto graph = MeshedSubmanifold::build(graph_curve_mesh(0.1), omega(), 0.1);
  for (const char* f : {"normsq", "abs_z1_sq"}) {
    const auto g = restriction_subharmonicity(graph, builtin_field(f, 4), omega_samples());
    CHECK(g.precondition_ok);
    CHECK(g.min_laplacian >= -1e-6);
  }
  const auto neg = restriction_subharmonicity(graph, builtin_field("neg_normsq", 4), omega_samples());
  CHECK_FALSE(neg.precondition_ok);
}

TEST_CASE("harmonic restriction on the holomorphic graph") {
  // Re z1^2 restricts to a harmonic function; the cotangent Laplacian is
  // only consistent up to the mesh error, which shrinks under refinement.
  double prev = 1e300;
  for (double h : {0.2, 0.1, 0.05}) {
    const auto graph = MeshedSubmanifold::build(graph_curve_mesh(h), omega(), 0.1);
    const auto r = restriction_subharmonicity(graph, builtin_field("re_z1_sq", 4), omega_samples());
    CHECK(r.precondition_ok);
    const double size = std::max(std::abs(r.min_laplacian), std::abs(r.max_laplacian));
    CHECK(size < prev);
    prev = size;
  }
}
