#pragma once

// Dense symmetric linear algebra shared by every module. All inverses are
// applied through a Cholesky factor; no explicit inverse is ever formed.

#include <Eigen/Dense>

namespace cgp {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Real symmetric matrix. Construction rejects inputs whose asymmetry exceeds
/// 1e-12 * max|A| and stores the exactly symmetrized average.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(const Matrix& a);

  /// Symmetrizes without the asymmetry check. For results of computations
  /// known to be symmetric up to rounding of arbitrary size.
  static SymmetricMatrix symmetrized(const Matrix& a);

  Index dim() const { return data_.rows(); }
  const Matrix& dense() const { return data_; }
  double operator()(Index i, Index j) const { return data_(i, j); }

 private:
  Matrix data_;
};

/// Diagonal jitter schedule: try the matrix as is, then add
/// eps = initial_scale * trace(A) / dim and double eps until the factor
/// succeeds, at most `max_doublings` times.
struct JitterPolicy {
  double initial_scale = 1e-10;
  int max_doublings = 10;
  bool allow_jitter = true;

  static JitterPolicy strict() { return {0.0, 0, false}; }
};

/// Lower Cholesky factor L with L L^T = A + jitter * I.
class CholeskyFactor {
 public:
  CholeskyFactor() = default;
  CholeskyFactor(Matrix lower, double jitter) : lower_(std::move(lower)), jitter_(jitter) {}

  Index dim() const { return lower_.rows(); }
  const Matrix& lower() const { return lower_; }
  double jitter() const { return jitter_; }

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;
  /// L^{-1} b
  Vector solve_lower(const Vector& b) const;

 private:
  Matrix lower_;
  double jitter_ = 0.0;
};

/// Throws ConditioningError when the jitter schedule is exhausted.
CholeskyFactor chol(const SymmetricMatrix& a, const JitterPolicy& policy = {});

/// X with A X = B.
Matrix solve_spd(const SymmetricMatrix& a, const Matrix& b, const JitterPolicy& policy = {});

/// v^T A^{-1} v.
double quad_form(const CholeskyFactor& factor, const Vector& v);
double quad_form(const SymmetricMatrix& a, const Vector& v, const JitterPolicy& policy = {});

/// max |A - A^T| relative to max |A| (0 for the zero matrix).
double asymmetry(const Matrix& a);

}  // namespace cgp
