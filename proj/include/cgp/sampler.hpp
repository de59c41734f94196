#pragma once

#include <cstdint>
#include <utility>

#include "cgp/basis.hpp"
#include "cgp/constraint.hpp"
#include "cgp/gpmodel.hpp"
#include "cgp/qp.hpp"
#include "cgp/rng.hpp"

namespace cgp {

struct SamplerOptions {
  /// Stall check: after this many proposals in a sub-batch, an acceptance
  /// rate below `stall_rate` raises SamplerStallError.
  long stall_proposals = 10'000'000;
  double stall_rate = 1e-6;
  /// Draws per sub-batch; sub-batch c uses stream rng.split(c).
  Index chunk = 64;
  unsigned threads = 1;
  JitterPolicy jitter{};
};

struct SampleBatch {
  /// One accepted coefficient vector per row.
  Matrix samples;
  long proposals = 0;
  /// Proposals that landed inside the constraint set.
  long feasible_proposals = 0;
  double acceptance_rate = 0.0;
  /// Largest log acceptance ratio seen on a feasible proposal (<= 0 in exact
  /// arithmetic).
  double max_log_ratio = -kInfinity;
};

/// Exact draws from N(zeta_I, Gamma_cond) restricted to the system by
/// rejection sampling from the mode: propose N(mu, Gamma_cond), keep
/// proposals inside the system, accept with probability
/// exp((zeta_I - mu)^T Gamma_cond^{-1} (zeta - mu)). The exponent is
/// evaluated through the mode's multipliers, -lambda^T Lambda (zeta - mu).
SampleBatch sample_truncated(const CoefficientPosterior& posterior, const LinearInequalitySystem& system,
                             const QpSolution& mode, Index count, const RngStream& rng,
                             const SamplerOptions& options = {});

/// Column means of the samples.
Vector sample_mean(const SampleBatch& batch);

/// Phi(x)^T (column means of samples).
double posterior_mean(const SampleBatch& batch, const ModelKind& kind, const KnotGrid& grid,
                      std::span<const double> x);
double posterior_mean(const SampleBatch& batch, const ModelKind& kind, const KnotGrid& grid, double x);

/// Pointwise equal-tailed empirical quantiles ((1-level)/2, (1+level)/2) of
/// the sampled paths at each probe (rows of `probes`, unit coordinates),
/// linear interpolation between order statistics. level = 1 returns the
/// whole real line. Requires at least 100 samples.
std::pair<Vector, Vector> credible_band(const SampleBatch& batch, const ModelKind& kind, const KnotGrid& grid,
                                        const Matrix& probes, double level);

/// Empirical quantile of `values` (sorted in place), type-7 interpolation.
double empirical_quantile(std::vector<double>& values, double prob);

struct PosteriorSummary {
  Vector mean_coefficients;
  Vector map_coefficients;
  Vector band_lower;
  Vector band_upper;
  double level = 0.95;
};

PosteriorSummary summarize(const SampleBatch& batch, const QpSolution& mode, const ModelKind& kind,
                           const KnotGrid& grid, const Matrix& probes, double level);

}  // namespace cgp
