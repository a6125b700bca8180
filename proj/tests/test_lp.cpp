#include <cmath>
#include <random>

#include "calibr/exterior.hpp"
#include "calibr/lp.hpp"
#include "doctest.h"

using namespace calibr;

namespace {

// Vertex enumeration: every basis with non-basic variables at either bound.
double brute_force_min(const LinearProgram& lp, bool& feasible) {
  const int m = lp.rows(), n = lp.cols();
  double best = kInf;
  feasible = false;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    if (std::popcount(mask) != m) continue;
    std::vector<int> basic, nonbasic;
    for (int j = 0; j < n; ++j) ((mask >> j) & 1 ? basic : nonbasic).push_back(j);
    Eigen::MatrixXd bm(m, m);
    for (int k = 0; k < m; ++k) bm.col(k) = lp.A.col(basic[k]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(bm);
    if (lu.rank() < m) continue;
    for (std::uint64_t at = 0; at < (std::uint64_t{1} << nonbasic.size()); ++at) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
      for (std::size_t k = 0; k < nonbasic.size(); ++k) {
        const int j = nonbasic[k];
        x[j] = (at >> k) & 1 ? lp.upper[j] : lp.lower[j];
      }
      const Eigen::VectorXd xb = lu.solve(lp.b - lp.A * x);
      bool ok = true;
      for (int k = 0; k < m; ++k) {
        x[basic[k]] = xb[k];
        ok = ok && xb[k] >= lp.lower[basic[k]] - 1e-9 && xb[k] <= lp.upper[basic[k]] + 1e-9;
      }
      if (!ok) continue;
      feasible = true;
      best = std::min(best, lp.c.dot(x));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("small LP with known optimum") {
  // min -x - y  s.t.  x + y + s = 4,  x + 3y + t = 6, all >= 0.
  LinearProgram lp;
  lp.A.resize(2, 4);
  lp.A << 1, 1, 1, 0, 1, 3, 0, 1;
  lp.b = Eigen::Vector2d(4, 6);
  lp.c = Eigen::Vector4d(-1, -1, 0, 0);
  lp.lower = Eigen::VectorXd::Zero(4);
  lp.upper = Eigen::VectorXd::Constant(4, kInf);
  const auto r = solve_lp(lp);
  REQUIRE(r.optimal());
  CHECK(r.objective == doctest::Approx(-4.0));
  CHECK(r.primal_residual < 1e-12);
}

TEST_CASE("infeasible and unbounded programs") {
  LinearProgram lp = LinearProgram::with_rows(Eigen::VectorXd::Constant(1, -1.0));
  lp.add_column(Eigen::VectorXd::Constant(1, 1.0), 0.0);
  CHECK(solve_lp(lp).status == LpStatus::Infeasible);

  LinearProgram un = LinearProgram::with_rows(Eigen::VectorXd::Constant(1, 1.0));
  un.add_column(Eigen::VectorXd::Constant(1, 1.0), 0.0);
  un.add_column(Eigen::VectorXd::Constant(1, -1.0), -1.0);
  CHECK(solve_lp(un).status == LpStatus::Unbounded);
}

TEST_CASE("bounded variables and shifted lower bounds") {
  // min x - 2y with x + y = 1, -1 <= x <= 2, -3 <= y <= 1.
  LinearProgram lp = LinearProgram::with_rows(Eigen::VectorXd::Constant(1, 1.0));
  lp.add_column(Eigen::VectorXd::Constant(1, 1.0), 1.0, -1.0, 2.0);
  lp.add_column(Eigen::VectorXd::Constant(1, 1.0), -2.0, -3.0, 1.0);
  const auto r = solve_lp(lp);
  REQUIRE(r.optimal());
  CHECK(r.x[0] == doctest::Approx(0.0));
  CHECK(r.x[1] == doctest::Approx(1.0));
  CHECK(r.objective == doctest::Approx(-2.0));
}

TEST_CASE("property: random programs agree with vertex enumeration and satisfy KKT") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.5, 2.0);
  int feasible_count = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 1 + trial % 3;
    const int n = m + 2 + trial % 4;
    LinearProgram lp;
    lp.A.resize(m, n);
    for (auto& x : lp.A.reshaped()) x = g(rng);
    lp.b.resize(m);
    for (auto& x : lp.b) x = g(rng);
    lp.c.resize(n);
    for (auto& x : lp.c) x = g(rng);
    lp.lower.resize(n);
    lp.upper.resize(n);
    for (int j = 0; j < n; ++j) {
      lp.lower[j] = -u(rng);
      lp.upper[j] = u(rng);
    }
    bool feasible = false;
    const double ref = brute_force_min(lp, feasible);
    const auto r = solve_lp(lp);
    if (!feasible) {
      CHECK(r.status == LpStatus::Infeasible);
      continue;
    }
    ++feasible_count;
    REQUIRE(r.optimal());
    CHECK(r.objective == doctest::Approx(ref).epsilon(1e-8));
    CHECK(r.primal_residual < 1e-9);
    const Eigen::VectorXd d = lp.c - lp.A.transpose() * r.y;
    for (int j = 0; j < n; ++j) {
      CHECK(r.x[j] >= lp.lower[j] - 1e-9);
      CHECK(r.x[j] <= lp.upper[j] + 1e-9);
      if (r.x[j] > lp.lower[j] + 1e-7 && r.x[j] < lp.upper[j] - 1e-7) CHECK(std::abs(d[j]) < 1e-7);
      if (r.x[j] <= lp.lower[j] + 1e-7 && r.x[j] < lp.upper[j] - 1e-7) CHECK(d[j] > -1e-7);
      if (r.x[j] >= lp.upper[j] - 1e-7 && r.x[j] > lp.lower[j] + 1e-7) CHECK(d[j] < 1e-7);
    }
  }
  CHECK(feasible_count > 100);
}

TEST_CASE("degenerate program terminates") {
  // Classic cycling example (Beale) in equality form.
  LinearProgram lp;
  lp.A.resize(3, 7);
  lp.A << 0.25, -8, -1, 9, 1, 0, 0, 0.5, -12, -0.5, 3, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1;
  lp.b = Eigen::Vector3d(0, 0, 1);
  lp.c.resize(7);
  lp.c << -0.75, 20, -0.5, 6, 0, 0, 0;
  lp.lower = Eigen::VectorXd::Zero(7);
  lp.upper = Eigen::VectorXd::Constant(7, kInf);
  const auto r = solve_lp(lp);
  REQUIRE(r.optimal());
  CHECK(r.objective == doctest::Approx(-1.25));
}

TEST_CASE("property: long runs on boxed programs stay feasible") {
  // Separation-style programs: boxed free variables, many slack columns, hundreds of pivots.
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    const int m = 70, k = 60;
    const Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(m, k, [&]() { return g(rng); });
    LinearProgram lp = LinearProgram::with_rows(Eigen::VectorXd::Zero(m + 1));
    Eigen::VectorXd s(k);
    for (auto& x : s) x = g(rng);
    for (int j = 0; j < k; ++j) {
      Eigen::VectorXd col(m + 1);
      col.head(m) = a.col(j);
      col[m] = s[j];
      lp.add_column(col, 0.0, -1.0, 1.0);
    }
    lp.add_column(Eigen::VectorXd::Unit(m + 1, m), -1.0, -50.0, 50.0);
    for (int i = 0; i < m; ++i) lp.add_column(-Eigen::VectorXd::Unit(m + 1, i), 0.0);
    lp.add_column(Eigen::VectorXd::Unit(m + 1, m), 0.0);
    const auto r = solve_lp(lp);
    REQUIRE(r.optimal());
    CHECK(r.primal_residual < 1e-9);
    for (int j = 0; j < lp.cols(); ++j) {
      CHECK(r.x[j] >= lp.lower[j] - 1e-9);
      CHECK(r.x[j] <= lp.upper[j] + 1e-9);
    }
    const Eigen::VectorXd reduced = lp.c - lp.A.transpose() * r.y;
    for (int j = 0; j < lp.cols(); ++j) {
      if (r.x[j] > lp.lower[j] + 1e-7 && r.x[j] < lp.upper[j] - 1e-7) CHECK(std::abs(reduced[j]) < 1e-7);
    }
  }
}
