#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cgp/basis.hpp"
#include "cgp/constraint.hpp"
#include "cgp/gpmodel.hpp"
#include "cgp/kernel.hpp"
#include "cgp/qp.hpp"
#include "cgp/sampler.hpp"

namespace cgp {

struct ModelOptions {
  ShapeConstraint constraint;
  KernelFamily family = KernelFamily::SquaredExponential;
  double variance = 1.0;
  /// Lengthscales in the original input units, one per dimension.
  std::vector<double> lengthscales{0.2};
  int subdivisions = 50;
  DomainMap domain = DomainMap::unit(1);
  double noise_sd = 0.0;
  /// Subtract the mean of the training outputs before fitting and add it
  /// back at prediction. Bound constraints are shifted accordingly.
  bool center = false;
  JitterPolicy jitter{};
  QpOptions qp{};
};

/// Constrained finite-dimensional GP regression on a box domain: prior,
/// conditioning, mode and sampler wired together.
class Model {
 public:
  explicit Model(ModelOptions options);

  const ModelOptions& options() const { return options_; }
  const ModelKind& kind() const { return kind_; }
  const KnotGrid& grid() const { return grid_; }
  /// Kernel in unit coordinates.
  const KernelSpec& unit_kernel() const { return kernel_; }
  const CoefficientPrior& prior() const { return prior_; }
  const LinearInequalitySystem& system() const { return system_; }
  int dim() const { return grid_.dim(); }

  /// Rows of x are points in the original domain.
  void fit(const Matrix& x, const Vector& y);
  bool fitted() const { return posterior_.has_value(); }
  const CoefficientPosterior& posterior() const;
  const QpSolution& mode() const;
  double offset() const { return offset_; }

  double predict_unconstrained(std::span<const double> x) const;
  double predict_map(std::span<const double> x) const;
  std::vector<double> predict_unconstrained(const Matrix& points) const;
  std::vector<double> predict_map(const Matrix& points) const;

  SampleBatch sample(Index count, std::uint64_t seed, const SamplerOptions& options = {}) const;
  /// Path values of the batch at the rows of `points` (original domain),
  /// offset included; one row per sample.
  Matrix sample_paths(const SampleBatch& batch, const Matrix& points) const;
  std::pair<Vector, Vector> band(const SampleBatch& batch, const Matrix& points, double level) const;

  /// MAP coefficients pass the functional shape check at `probes` points per dimension.
  bool map_satisfies_shape(int probes) const;

  /// Rows of `points` mapped to unit coordinates.
  Matrix to_unit(const Matrix& points) const;

 private:
  ModelOptions options_;
  ModelKind kind_;
  KnotGrid grid_;
  KernelSpec kernel_;
  CoefficientPrior prior_;
  ShapeConstraint shifted_;
  LinearInequalitySystem system_;
  double offset_ = 0.0;
  std::optional<CoefficientPosterior> posterior_;
  std::optional<QpSolution> mode_;
};

}  // namespace cgp
