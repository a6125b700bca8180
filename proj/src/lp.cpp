#include "calibr/lp.hpp"

#include <cmath>
#include <vector>

#include "calibr/exterior.hpp"

namespace calibr {

LinearProgram LinearProgram::with_rows(const Eigen::VectorXd& rhs) {
  LinearProgram lp;
  lp.b = rhs;
  lp.A.resize(rhs.size(), 0);
  return lp;
}

int LinearProgram::add_column(const Eigen::VectorXd& column, double cost, double lo, double hi) {
  if (column.size() != A.rows()) throw DimensionError("lp: column has wrong length");
  const Eigen::Index k = A.cols();
  A.conservativeResize(Eigen::NoChange, k + 1);
  A.col(k) = column;
  c.conservativeResize(k + 1);
  lower.conservativeResize(k + 1);
  upper.conservativeResize(k + 1);
  c[k] = cost;
  lower[k] = lo;
  upper[k] = hi;
  return static_cast<int>(k);
}

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
    case LpStatus::IterationLimit:
      return "iteration_limit";
  }
  return "unknown";
}

namespace {

class Simplex {
 public:
  Simplex(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& ub, double tol)
      : m_(static_cast<int>(a.rows())), n_(static_cast<int>(a.cols())), tol_(tol) {
    const int total = n_ + m_;
    t_ = Eigen::MatrixXd::Zero(m_, total);
    t_.leftCols(n_) = a;
    t_.rightCols(m_).setIdentity();
    ub_.resize(total);
    ub_.head(n_) = ub;
    ub_.tail(m_).setConstant(kInf);
    at_upper_.assign(total, false);
    is_basic_.assign(total, false);
    basis_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      basis_[i] = n_ + i;
      is_basic_[n_ + i] = true;
    }
    xb_ = b;
    a0_ = t_;
    b0_ = b;
  }

  // Rebuilds the tableau and basic values from the original data and the current basis.
  void refactor() {
    Eigen::MatrixXd bmat(m_, m_);
    for (int i = 0; i < m_; ++i) bmat.col(i) = a0_.col(basis_[i]);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(bmat);
    Eigen::VectorXd rhs = b0_;
    for (int j = 0; j < n_ + m_; ++j) {
      if (!is_basic_[j] && at_upper_[j]) rhs -= ub_[j] * a0_.col(j);
    }
    t_ = lu.solve(a0_);
    xb_ = lu.solve(rhs);
  }

  // Returns 0 optimal, 1 unbounded, 2 iteration limit.
  int run(const Eigen::VectorXd& cost, int& iter, int max_iter) {
    int since_refactor = 0;
    while (iter < max_iter) {
      if (since_refactor >= kRefactorEvery) {
        refactor();
        since_refactor = 0;
      }
      Eigen::RowVectorXd cb(m_);
      for (int i = 0; i < m_; ++i) cb[i] = cost[basis_[i]];
      int enter = -1;
      double dir = 0.0;
      for (int j = 0; j < n_ + m_; ++j) {
        if (is_basic_[j] || ub_[j] <= 0.0) continue;
        const double d = cost[j] - cb.dot(t_.col(j));
        if (!at_upper_[j] && d < -tol_) {
          enter = j;
          dir = 1.0;
          break;
        }
        if (at_upper_[j] && d > tol_) {
          enter = j;
          dir = -1.0;
          break;
        }
      }
      if (enter < 0) {
        if (since_refactor == 0) return 0;
        // Confirm optimality on a fresh factorization.
        refactor();
        since_refactor = 0;
        continue;
      }
      ++iter;
      ++since_refactor;
      const double pivot_tol = kPivotTol * std::max(1.0, t_.col(enter).lpNorm<Eigen::Infinity>());

      double step = ub_[enter];
      int leave = -1;
      bool leave_to_upper = false;
      for (int i = 0; i < m_; ++i) {
        const double g = dir * t_(i, enter);
        double ratio;
        bool to_upper;
        if (g > pivot_tol) {
          ratio = std::max(xb_[i], 0.0) / g;
          to_upper = false;
        } else if (g < -pivot_tol && std::isfinite(ub_[basis_[i]])) {
          ratio = std::max(ub_[basis_[i]] - xb_[i], 0.0) / -g;
          to_upper = true;
        } else {
          continue;
        }
        if (ratio < step - 1e-14 || (leave >= 0 && ratio <= step + 1e-14 && basis_[i] < basis_[leave])) {
          step = ratio;
          leave = i;
          leave_to_upper = to_upper;
        }
      }
      if (leave < 0 && !std::isfinite(step)) return 1;

      xb_ -= (dir * step) * t_.col(enter);
      if (leave < 0) {
        at_upper_[enter] = !at_upper_[enter];
        continue;
      }
      const double entering_value = (at_upper_[enter] ? ub_[enter] : 0.0) + dir * step;
      const int out = basis_[leave];
      is_basic_[out] = false;
      at_upper_[out] = leave_to_upper;
      is_basic_[enter] = true;
      at_upper_[enter] = false;
      basis_[leave] = enter;
      xb_[leave] = entering_value;

      const double piv = t_(leave, enter);
      t_.row(leave) /= piv;
      for (int i = 0; i < m_; ++i) {
        if (i == leave) continue;
        const double f = t_(i, enter);
        if (f != 0.0) t_.row(i) -= f * t_.row(leave);
      }
    }
    return 2;
  }

  void fix_artificials() {
    for (int i = 0; i < m_; ++i) ub_[n_ + i] = 0.0;
  }

  Eigen::VectorXd values() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_ + m_);
    for (int j = 0; j < n_ + m_; ++j) {
      if (!is_basic_[j] && at_upper_[j]) x[j] = ub_[j];
    }
    for (int i = 0; i < m_; ++i) x[basis_[i]] = xb_[i];
    return x;
  }

  Eigen::VectorXd duals(const Eigen::VectorXd& cost) const {
    Eigen::RowVectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = cost[basis_[i]];
    return (cb * t_.rightCols(m_)).transpose();
  }

 private:
  static constexpr double kPivotTol = 1e-9;
  static constexpr int kRefactorEvery = 50;
  int m_;
  int n_;
  double tol_;
  Eigen::MatrixXd t_;
  Eigen::MatrixXd a0_;
  Eigen::VectorXd b0_;
  Eigen::VectorXd ub_;
  Eigen::VectorXd xb_;
  std::vector<int> basis_;
  std::vector<bool> at_upper_;
  std::vector<bool> is_basic_;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, const LpOptions& opts) {
  const int m = lp.rows();
  const int n = lp.cols();
  if (lp.b.size() != m || lp.c.size() != n || lp.lower.size() != n || lp.upper.size() != n) {
    throw DimensionError("lp: inconsistent sizes");
  }
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(lp.lower[j])) throw InputError("lp: lower bounds must be finite");
    if (lp.upper[j] < lp.lower[j]) throw InputError("lp: empty variable range");
  }

  Eigen::VectorXd rhs = lp.b - lp.A * lp.lower;
  Eigen::VectorXd sigma = Eigen::VectorXd::Ones(m);
  Eigen::MatrixXd a = lp.A;
  for (int i = 0; i < m; ++i) {
    if (rhs[i] < 0.0) {
      sigma[i] = -1.0;
      rhs[i] = -rhs[i];
      a.row(i) *= -1.0;
    }
  }
  const Eigen::VectorXd ub = lp.upper - lp.lower;

  Simplex sx(a, rhs, ub, opts.tol);
  LpResult res;
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setOnes();
  int iter = 0;
  int code = sx.run(phase1, iter, opts.max_iter);
  Eigen::VectorXd full = sx.values();
  res.infeasibility = full.tail(m).sum();
  const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
  if (code == 2) {
    res.status = LpStatus::IterationLimit;
  } else if (res.infeasibility > opts.tol * scale) {
    res.status = LpStatus::Infeasible;
    res.y = sigma.cwiseProduct(sx.duals(phase1));
  } else {
    sx.fix_artificials();
    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
    phase2.head(n) = lp.c;
    code = sx.run(phase2, iter, opts.max_iter);
    full = sx.values();
    res.status = code == 0 ? LpStatus::Optimal : (code == 1 ? LpStatus::Unbounded : LpStatus::IterationLimit);
    res.y = sigma.cwiseProduct(sx.duals(phase2));
  }
  res.iterations = iter;
  res.x = full.head(n) + lp.lower;
  res.objective = lp.c.dot(res.x);
  res.primal_residual = m > 0 ? (lp.A * res.x - lp.b).lpNorm<Eigen::Infinity>() : 0.0;
  if (res.y.size() != m) res.y = Eigen::VectorXd::Zero(m);
  return res;
}

}  // namespace calibr
