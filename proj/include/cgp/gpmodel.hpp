#pragma once

#include <span>

#include "cgp/basis.hpp"
#include "cgp/kernel.hpp"
#include "cgp/linalg.hpp"

namespace cgp {

/// Prior covariance of the coefficient vector. The raw matrix is kept
/// alongside the diagonal jitter that makes its Cholesky factor succeed.
struct CoefficientPrior {
  SymmetricMatrix gamma;
  double jitter = 0.0;

  Index dim() const { return gamma.dim(); }
  /// gamma + jitter * I
  Matrix covariance() const;
};

/// Noisy observations in unit coordinates: X is n x d.
struct ObservationSet {
  Matrix inputs;
  Vector values;
  double noise_sd = 0.0;

  Index size() const { return values.size(); }
};

/// Law of the coefficients given only the observations,
/// N(mean, covariance), with the observation operator kept for later use.
struct CoefficientPosterior {
  Vector mean;
  SymmetricMatrix covariance;
  Matrix observation;
  Vector values;
  double noise_sd = 0.0;

  Index dim() const { return mean.size(); }
};

/// Covariance of the coefficient layout of `kind` under `kernel` (unit
/// coordinates). Derivative layouts use the mixed kernel derivatives.
CoefficientPrior build_prior(const ModelKind& kind, const KnotGrid& grid, const KernelSpec& kernel,
                             const JitterPolicy& policy = {});

/// K_N(x, x') = Phi(x)^T Gamma Phi(x').
double approx_kernel(const ModelKind& kind, const KnotGrid& grid, const CoefficientPrior& prior,
                     std::span<const double> x, std::span<const double> xp);
double approx_kernel(const ModelKind& kind, const KnotGrid& grid, const CoefficientPrior& prior, double x,
                     double xp);

/// A_{i,:} = Phi(x^(i)) for the rows of `inputs` (n x d, unit coordinates).
Matrix observation_matrix(const ModelKind& kind, const KnotGrid& grid, const Matrix& inputs);

/// Gaussian conditioning on A zeta + eps = values, eps ~ N(0, noise_sd^2 I):
///   mean = (A G)^T S^{-1} y,  cov = G - (A G)^T S^{-1} A G,  S = A G A^T + noise_sd^2 I.
/// With noise_sd = 0 the factorization of S gets no jitter and a singular S
/// raises ConditioningError.
CoefficientPosterior condition(const CoefficientPrior& prior, const Matrix& observation, const Vector& values,
                               double noise_sd);

/// m^N(x) = Phi(x)^T zeta_I.
double unconstrained_mean(const CoefficientPosterior& posterior, const ModelKind& kind, const KnotGrid& grid,
                          std::span<const double> x);
double unconstrained_mean(const CoefficientPosterior& posterior, const ModelKind& kind, const KnotGrid& grid,
                          double x);

struct KrigingPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Exact-kernel simple kriging (zero trend) at x; inputs are n x d.
KrigingPrediction reference_kriging(const KernelSpec& kernel, const Matrix& inputs, const Vector& values,
                                    double noise_sd, std::span<const double> x);

/// Batch form sharing one factorization; row i of `points` is a query.
std::vector<KrigingPrediction> reference_kriging(const KernelSpec& kernel, const Matrix& inputs,
                                                 const Vector& values, double noise_sd, const Matrix& points);

}  // namespace cgp
