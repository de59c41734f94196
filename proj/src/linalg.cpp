#include "cgp/linalg.hpp"

#include <cmath>
#include <sstream>

#include "cgp/error.hpp"

namespace cgp {

namespace {

// A factor counts as successful only when the smallest pivot is not lost in
// rounding relative to the largest diagonal entry.
constexpr double kPivotFloor = 1e-14;

bool try_factor(const Matrix& a, double eps, Matrix& lower) {
  const Index n = a.rows();
  Matrix shifted = a;
  shifted.diagonal().array() += eps;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() != Eigen::Success) return false;
  lower = llt.matrixL();
  const double max_diag = shifted.diagonal().cwiseAbs().maxCoeff();
  for (Index i = 0; i < n; ++i) {
    const double pivot = lower(i, i);
    if (!(pivot * pivot > kPivotFloor * max_diag)) return false;
  }
  return true;
}

}  // namespace

double asymmetry(const Matrix& a) {
  if (a.rows() != a.cols()) throw ArgumentError("asymmetry: matrix is not square");
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

SymmetricMatrix::SymmetricMatrix(const Matrix& a) {
  if (a.rows() != a.cols()) throw ArgumentError("SymmetricMatrix: matrix is not square");
  if (asymmetry(a) > 1e-12) throw ArgumentError("SymmetricMatrix: input is not symmetric");
  data_ = 0.5 * (a + a.transpose());
}

SymmetricMatrix SymmetricMatrix::symmetrized(const Matrix& a) {
  if (a.rows() != a.cols()) throw ArgumentError("SymmetricMatrix: matrix is not square");
  SymmetricMatrix out;
  out.data_ = 0.5 * (a + a.transpose());
  return out;
}

Vector CholeskyFactor::solve(const Vector& b) const {
  if (b.size() != dim()) throw ArgumentError("CholeskyFactor::solve: size mismatch");
  Vector y = lower_.triangularView<Eigen::Lower>().solve(b);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix CholeskyFactor::solve(const Matrix& b) const {
  if (b.rows() != dim()) throw ArgumentError("CholeskyFactor::solve: size mismatch");
  Matrix y = lower_.triangularView<Eigen::Lower>().solve(b);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Vector CholeskyFactor::solve_lower(const Vector& b) const {
  if (b.size() != dim()) throw ArgumentError("CholeskyFactor::solve_lower: size mismatch");
  return lower_.triangularView<Eigen::Lower>().solve(b);
}

CholeskyFactor chol(const SymmetricMatrix& a, const JitterPolicy& policy) {
  const Index n = a.dim();
  if (n == 0) return CholeskyFactor(Matrix(0, 0), 0.0);
  Matrix lower;
  if (try_factor(a.dense(), 0.0, lower)) return CholeskyFactor(std::move(lower), 0.0);
  if (!policy.allow_jitter) throw ConditioningError("chol: matrix is not numerically positive definite");

  double eps = policy.initial_scale * std::abs(a.dense().trace()) / static_cast<double>(n);
  if (!(eps > 0.0)) eps = policy.initial_scale;
  for (int k = 0; k <= policy.max_doublings; ++k, eps *= 2.0) {
    if (try_factor(a.dense(), eps, lower)) return CholeskyFactor(std::move(lower), eps);
  }
  std::ostringstream msg;
  msg << "chol: factorization failed after jitter up to " << eps / 2.0;
  throw ConditioningError(msg.str());
}

Matrix solve_spd(const SymmetricMatrix& a, const Matrix& b, const JitterPolicy& policy) {
  return chol(a, policy).solve(b);
}

double quad_form(const CholeskyFactor& factor, const Vector& v) {
  return factor.solve_lower(v).squaredNorm();
}

double quad_form(const SymmetricMatrix& a, const Vector& v, const JitterPolicy& policy) {
  return quad_form(chol(a, policy), v);
}

}  // namespace cgp
