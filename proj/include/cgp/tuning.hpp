#pragma once

#include <vector>

#include "cgp/basis.hpp"
#include "cgp/gpmodel.hpp"
#include "cgp/kernel.hpp"

namespace cgp {

/// Lengthscale search by cross-validation of the unconstrained mean.
/// Lengthscales are in unit coordinates; the score is the mean squared
/// held-out residual.
struct CvConfig {
  /// One strictly increasing grid per input dimension; the search runs over
  /// their tensor product.
  std::vector<std::vector<double>> theta_grid;
  /// 0 selects leave-one-out; k > 1 uses folds {i : i mod k = f}.
  int folds = 0;
  /// Kernel variance, held fixed.
  double variance = 1.0;
  unsigned threads = 1;

  /// 20 log-spaced points over [0.05, 100] (unit domain width) per dimension.
  static CvConfig default_grid(int dim);
  /// Copy with every grid sorted and duplicates dropped.
  CvConfig normalized() const;
  void validate(int dim) const;
};

struct CvResult {
  KernelSpec kernel;
  double score = 0.0;
  /// Score of every tensor grid point, last dimension varying fastest.
  std::vector<double> scores;
};

/// Held-out residuals y_F - m_{-F}(x_F) for the model `kind` with prior
/// `prior`, from a single factorization of A Gamma A^T + noise^2 I.
Vector cv_residuals(const CoefficientPrior& prior, const Matrix& observation, const Vector& values,
                    double noise_sd, int folds);

/// Grid point with the smallest score; ties go to the larger lengthscales.
CvResult cv_search(const ModelKind& kind, const KnotGrid& grid, KernelFamily family, const ObservationSet& data,
                   const CvConfig& config);

KernelSpec cv_select(const ModelKind& kind, const KnotGrid& grid, KernelFamily family, const ObservationSet& data,
                     const CvConfig& config);

}  // namespace cgp
