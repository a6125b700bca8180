#pragma once

#include <limits>

#include <Eigen/Dense>

namespace calibr {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// minimize c^T x  subject to  A x = b,  lower <= x <= upper.
/// Lower bounds must be finite; upper bounds may be +inf.
struct LinearProgram {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  /// Empty program with `rows` constraints, no columns yet.
  static LinearProgram with_rows(const Eigen::VectorXd& rhs);
  /// Appends a column and returns its index.
  int add_column(const Eigen::VectorXd& column, double cost, double lo = 0.0, double hi = kInf);
  int cols() const { return static_cast<int>(A.cols()); }
  int rows() const { return static_cast<int>(A.rows()); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(LpStatus s);

struct LpOptions {
  double tol = 1e-9;
  int max_iter = 50000;
};

struct LpResult {
  LpStatus status = LpStatus::IterationLimit;
  Eigen::VectorXd x;
  /// Equality multipliers: c - A^T y is the reduced cost vector.
  Eigen::VectorXd y;
  double objective = 0.0;
  /// Phase-one residual (sum of artificials) at termination.
  double infeasibility = 0.0;
  double primal_residual = 0.0;
  int iterations = 0;

  bool optimal() const { return status == LpStatus::Optimal; }
};

/// Two-phase bounded-variable primal simplex on a dense tableau with Bland's rule.
LpResult solve_lp(const LinearProgram& lp, const LpOptions& opts = {});

}  // namespace calibr
