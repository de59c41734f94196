#include "cgp/qp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "cgp/error.hpp"

namespace cgp {

namespace {

// Range-space primal active-set method. With S the (jittered) covariance,
// the minimizer over {A_W y = b_W} is y = c + S A_W^T nu where
// (A_W S A_W^T) nu = b_W - A_W c; a Cholesky factor of A_W S A_W^T is
// updated as rows enter and leave the working set.
class ActiveSetSolver {
 public:
  ActiveSetSolver(const Matrix& cov, const Vector& center, const LinearInequalitySystem& system)
      : cov_(cov), c_(center), sys_(system), n_(center.size()) {
    const Index cap = std::min<Index>(n_, system.row_count()) + 1;
    g_.resize(n_, cap);
    l_ = Matrix::Zero(cap, cap);
  }

  QpSolution run(Vector x, long max_iterations, const CholeskyFactor* objective_factor) {
    QpSolution sol;
    const double cscale = 1.0 + c_.cwiseAbs().maxCoeff();
    long it = 0;
    auto record = [&] {
      if (objective_factor) sol.objective_trace.push_back(0.5 * quad_form(*objective_factor, x - c_));
    };
    record();

    Vector nu;
    for (;;) {
      if (++it > max_iterations) {
        std::ostringstream msg;
        msg << "qp: iteration limit " << max_iterations << " reached";
        throw IterationLimitError(msg.str());
      }
      nu = multipliers();
      Vector y = c_;
      if (size_ > 0) y.noalias() += g_.leftCols(size_) * nu;
      const Vector p = y - x;

      // Ratio test over rows outside the working set; ties go to the lowest row.
      // A row in the span of the working set has a.p = 0 in exact arithmetic
      // and cannot block; such rows are excluded when roundoff says otherwise.
      std::vector<Index> excluded;
      bool stepped = false;
      for (;;) {
        double alpha = 1.0;
        Index block = -1;
        BoundSide block_side = BoundSide::Lower;
        const double pnorm = p.cwiseAbs().maxCoeff();
        if (pnorm > 0.0) {
          for (Index r = 0; r < sys_.row_count(); ++r) {
            if (in_working_set(r)) continue;
            if (std::find(excluded.begin(), excluded.end(), r) != excluded.end()) continue;
            const auto& row = sys_.rows[r];
            const double ap = row.apply(p);
            double anorm = 0.0;
            for (int k = 0; k < row.terms; ++k) anorm += std::abs(row.coeff[k]);
            const double thresh = 1e-13 * anorm * pnorm;
            const double ax = row.apply(x);
            if (ap < -thresh && std::isfinite(row.lower)) {
              const double a = std::max(0.0, (row.lower - ax) / ap);
              if (a < alpha) {
                alpha = a;
                block = r;
                block_side = BoundSide::Lower;
              }
            } else if (ap > thresh && std::isfinite(row.upper)) {
              const double a = std::max(0.0, (row.upper - ax) / ap);
              if (a < alpha) {
                alpha = a;
                block = r;
                block_side = BoundSide::Upper;
              }
            }
          }
        }
        if (block < 0) break;
        if (!add(block, block_side)) {
          excluded.push_back(block);
          continue;
        }
        x.noalias() += alpha * p;
        record();
        stepped = true;
        break;
      }
      if (stepped) continue;

      x = y;
      record();
      // Multiplier sign check at the working-set minimizer.
      const double ntol = 1e-10 * (1.0 + (size_ > 0 ? nu.cwiseAbs().maxCoeff() : 0.0));
      Index worst = -1;
      double worst_value = 0.0;
      for (Index w = 0; w < size_; ++w) {
        const double wrong = working_[w].side == BoundSide::Lower ? -nu[w] : nu[w];
        if (wrong > ntol && (wrong > worst_value ||
                             (wrong == worst_value && working_[w].row < working_[worst].row))) {
          worst = w;
          worst_value = wrong;
        }
      }
      if (worst < 0) break;
      remove(worst);
    }

    sol.mu = x;
    sol.iterations = it;
    sol.multipliers = Vector::Zero(sys_.row_count());
    for (Index w = 0; w < size_; ++w) {
      sol.active.push_back(working_[w]);
      sol.multipliers[working_[w].row] = nu[w];
    }
    std::sort(sol.active.begin(), sol.active.end(),
              [](const ActiveConstraint& a, const ActiveConstraint& b) { return a.row < b.row; });

    // KKT diagnostics.
    Vector grad_dir = Vector::Zero(n_);  // A_W^T nu
    double sign_violation = 0.0;
    for (Index w = 0; w < size_; ++w) {
      const auto& row = sys_.rows[working_[w].row];
      for (int k = 0; k < row.terms; ++k) grad_dir[row.index[k]] += row.coeff[k] * nu[w];
      sign_violation = std::max(sign_violation, working_[w].side == BoundSide::Lower ? -nu[w] : nu[w]);
    }
    const double stationarity = ((x - c_) - cov_ * grad_dir).cwiseAbs().maxCoeff();
    sol.kkt_residual = std::max({max_violation(sys_, x), sign_violation, stationarity}) / cscale;
    return sol;
  }

 private:
  bool in_working_set(Index r) const {
    for (Index w = 0; w < size_; ++w)
      if (working_[w].row == r) return true;
    return false;
  }

  double bound(const ActiveConstraint& a) const {
    const auto& row = sys_.rows[a.row];
    return a.side == BoundSide::Lower ? row.lower : row.upper;
  }

  Vector multipliers() const {
    Vector r(size_);
    for (Index w = 0; w < size_; ++w) r[w] = bound(working_[w]) - sys_.rows[working_[w].row].apply(c_);
    if (size_ == 0) return r;
    const auto lw = l_.topLeftCorner(size_, size_).triangularView<Eigen::Lower>();
    lw.solveInPlace(r);
    lw.transpose().solveInPlace(r);
    return r;
  }

  // Appends row r to the working set; false (and no change) when the row is
  // numerically dependent on the current working set.
  bool add(Index r, BoundSide side) {
    const auto& row = sys_.rows[r];
    Vector g = Vector::Zero(n_);
    for (int k = 0; k < row.terms; ++k) g.noalias() += row.coeff[k] * cov_.col(row.index[k]);
    Vector m(size_);
    for (Index w = 0; w < size_; ++w) m[w] = sys_.rows[working_[w].row].apply(g);
    const double diag = row.apply(g);
    if (size_ > 0) l_.topLeftCorner(size_, size_).triangularView<Eigen::Lower>().solveInPlace(m);
    const double d2 = diag - m.squaredNorm();
    if (!(d2 > 1e-12 * diag)) return false;
    if (size_ > 0) l_.row(size_).head(size_) = m.transpose();
    l_(size_, size_) = std::sqrt(d2);
    g_.col(size_) = g;
    working_.push_back({r, side});
    ++size_;
    return true;
  }

  void remove(Index k) {
    // Drop row k of L, then restore lower-triangular form with Givens
    // rotations on adjacent column pairs.
    for (Index i = k; i + 1 < size_; ++i) l_.row(i).head(size_) = l_.row(i + 1).head(size_);
    l_.row(size_ - 1).setZero();
    for (Index i = k; i + 1 < size_; ++i) {
      const double a = l_(i, i);
      const double b = l_(i, i + 1);
      const double r = std::hypot(a, b);
      const double cs = r > 0.0 ? a / r : 1.0;
      const double sn = r > 0.0 ? b / r : 0.0;
      for (Index row = i; row + 1 < size_; ++row) {
        const double u = l_(row, i);
        const double v = l_(row, i + 1);
        l_(row, i) = cs * u + sn * v;
        l_(row, i + 1) = -sn * u + cs * v;
      }
      if (l_(i, i) < 0.0) l_.col(i).head(size_ - 1) *= -1.0;
    }
    l_.col(size_ - 1).setZero();
    for (Index i = k; i + 1 < size_; ++i) g_.col(i) = g_.col(i + 1);
    working_.erase(working_.begin() + k);
    --size_;
  }

  const Matrix& cov_;
  const Vector& c_;
  const LinearInequalitySystem& sys_;
  Index n_;
  Matrix g_;  // columns S a_w
  Matrix l_;  // Cholesky factor of A_W S A_W^T
  std::vector<ActiveConstraint> working_;
  Index size_ = 0;
};

}  // namespace

QpSolution solve_qp(const QpProblem& problem, const QpOptions& options) {
  const auto& sys = problem.system;
  const Index n = problem.center.size();
  if (problem.covariance.dim() != n || sys.dim != n) throw ArgumentError("solve_qp: dimension mismatch");
  for (Index r = 0; r < sys.row_count(); ++r) {
    const auto& row = sys.rows[r];
    if (row.lower > row.upper) {
      std::ostringstream msg;
      msg << "qp: row " << r << " has lower bound above upper bound";
      throw InfeasibleError(msg.str(), static_cast<long>(r));
    }
    for (int k = 0; k < row.terms; ++k)
      if (row.index[k] < 0 || row.index[k] >= n) throw ArgumentError("solve_qp: row index out of range");
  }

  // A feasible center is the answer and needs no factorization, which also
  // covers the degenerate covariance of noise-free fully determined data.
  QpSolution sol;
  if (is_member(sys, problem.center)) {
    sol.mu = problem.center;
    sol.multipliers = Vector::Zero(sys.row_count());
    sol.kkt_residual = max_violation(sys, problem.center) / (1.0 + problem.center.cwiseAbs().maxCoeff());
    if (options.record_objective) sol.objective_trace.push_back(0.0);
    return sol;
  }

  Vector start;
  if (options.start) {
    start = *options.start;
  } else if (sys.witness) {
    start = *sys.witness;
  } else {
    throw ArgumentError("solve_qp: no feasible starting point supplied");
  }
  if (start.size() != n) throw ArgumentError("solve_qp: starting point length mismatch");
  if (!is_member(sys, start)) {
    Index worst = 0;
    double worst_v = -1.0;
    for (Index r = 0; r < sys.row_count(); ++r) {
      const double v = sys.rows[r].apply(start);
      const double viol = std::max(sys.rows[r].lower - v, v - sys.rows[r].upper);
      if (viol > worst_v) {
        worst_v = viol;
        worst = r;
      }
    }
    std::ostringstream msg;
    msg << "qp: starting point violates row " << worst << " by " << worst_v;
    throw InfeasibleError(msg.str(), static_cast<long>(worst));
  }

  const CholeskyFactor factor = chol(problem.covariance, options.jitter);
  Matrix cov = problem.covariance.dense();
  cov.diagonal().array() += factor.jitter();
  const long limit = options.max_iterations > 0 ? options.max_iterations : 50L * (sys.row_count() + n);
  ActiveSetSolver solver(cov, problem.center, sys);
  QpSolution out = solver.run(std::move(start), limit, options.record_objective ? &factor : nullptr);
  out.jitter = factor.jitter();
  return out;
}

QpSolution solve_map(const CoefficientPosterior& posterior, const LinearInequalitySystem& system,
                     const QpOptions& options) {
  return solve_qp(QpProblem{posterior.covariance, posterior.mean, system}, options);
}

double map_curve(const QpSolution& solution, const ModelKind& kind, const KnotGrid& grid,
                 std::span<const double> x) {
  return evaluate(grid, kind, solution.mu, x);
}

double map_curve(const QpSolution& solution, const ModelKind& kind, const KnotGrid& grid, double x) {
  return map_curve(solution, kind, grid, std::span<const double>(&x, 1));
}

}  // namespace cgp
