#include "cgp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "cgp/error.hpp"
#include "parallel.hpp"

namespace cgp {

namespace {

struct ChunkResult {
  Matrix samples;
  long proposals = 0;
  long feasible = 0;
  double max_log_ratio = -kInfinity;
};

}  // namespace

SampleBatch sample_truncated(const CoefficientPosterior& posterior, const LinearInequalitySystem& system,
                             const QpSolution& mode, Index count, const RngStream& rng,
                             const SamplerOptions& options) {
  const Index p = posterior.dim();
  if (count < 0) throw ArgumentError("sample_truncated: negative sample count");
  if (system.dim != p || mode.mu.size() != p) throw ArgumentError("sample_truncated: dimension mismatch");
  if (mode.multipliers.size() != system.row_count())
    throw ArgumentError("sample_truncated: mode does not belong to this constraint system");
  if (options.chunk < 1) throw ArgumentError("sample_truncated: chunk must be >= 1");

  const CholeskyFactor factor = chol(posterior.covariance, options.jitter);
  const Matrix& lower = factor.lower();
  const Vector& mu = mode.mu;

  struct ActiveTerm {
    Index row;
    double lambda;
    double at_mode;
  };
  std::vector<ActiveTerm> active;
  for (Index r = 0; r < system.row_count(); ++r)
    if (mode.multipliers[r] != 0.0) active.push_back({r, mode.multipliers[r], system.rows[r].apply(mu)});

  const Index chunks = (count + options.chunk - 1) / options.chunk;
  std::vector<ChunkResult> results(chunks);
  detail::parallel_for(static_cast<std::size_t>(chunks), options.threads, [&](std::size_t c) {
    RngStream stream = rng.split(c);
    const Index want = std::min(options.chunk, count - static_cast<Index>(c) * options.chunk);
    ChunkResult& out = results[c];
    out.samples.resize(want, p);
    Vector z(p);
    Vector zeta(p);
    Index got = 0;
    while (got < want) {
      for (Index i = 0; i < p; ++i) z[i] = stream.normal();
      zeta = mu;
      zeta.noalias() += lower.triangularView<Eigen::Lower>() * z;
      ++out.proposals;
      if (out.proposals >= options.stall_proposals &&
          static_cast<double>(got) / static_cast<double>(out.proposals) < options.stall_rate) {
        std::ostringstream msg;
        msg << "sampler stalled: " << got << " accepted out of " << out.proposals << " proposals ("
            << out.feasible << " feasible)";
        throw SamplerStallError(msg.str());
      }
      if (!is_member(system, zeta, 0.0)) continue;
      ++out.feasible;
      double log_ratio = 0.0;
      for (const auto& t : active) log_ratio -= t.lambda * (system.rows[t.row].apply(zeta) - t.at_mode);
      out.max_log_ratio = std::max(out.max_log_ratio, log_ratio);
      const double u = stream.uniform();
      if (log_ratio >= 0.0 || u < std::exp(log_ratio)) out.samples.row(got++) = zeta.transpose();
    }
  });

  SampleBatch batch;
  batch.samples.resize(count, p);
  Index offset = 0;
  for (const auto& r : results) {
    batch.samples.middleRows(offset, r.samples.rows()) = r.samples;
    offset += r.samples.rows();
    batch.proposals += r.proposals;
    batch.feasible_proposals += r.feasible;
    batch.max_log_ratio = std::max(batch.max_log_ratio, r.max_log_ratio);
  }
  batch.acceptance_rate = batch.proposals > 0 ? static_cast<double>(count) / batch.proposals : 1.0;
  return batch;
}

Vector sample_mean(const SampleBatch& batch) {
  if (batch.samples.rows() == 0) throw ArgumentError("sample_mean: empty batch");
  return batch.samples.colwise().mean().transpose();
}

double posterior_mean(const SampleBatch& batch, const ModelKind& kind, const KnotGrid& grid,
                      std::span<const double> x) {
  return evaluate(grid, kind, sample_mean(batch), x);
}

double posterior_mean(const SampleBatch& batch, const ModelKind& kind, const KnotGrid& grid, double x) {
  return posterior_mean(batch, kind, grid, std::span<const double>(&x, 1));
}

double empirical_quantile(std::vector<double>& values, double prob) {
  if (values.empty()) throw ArgumentError("empirical_quantile: no values");
  if (!(prob >= 0.0 && prob <= 1.0)) throw ArgumentError("empirical_quantile: probability outside [0,1]");
  std::sort(values.begin(), values.end());
  const double h = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::pair<Vector, Vector> credible_band(const SampleBatch& batch, const ModelKind& kind, const KnotGrid& grid,
                                        const Matrix& probes, double level) {
  if (batch.samples.rows() < 100) throw ArgumentError("credible_band: need at least 100 samples");
  if (!(level >= 0.0 && level <= 1.0)) throw ArgumentError("credible_band: level outside [0,1]");
  if (probes.cols() != kind.dim) throw ArgumentError("credible_band: probe dimension mismatch");
  const Index q = probes.rows();
  Vector lo(q), hi(q);
  if (level >= 1.0) {
    lo.setConstant(-kInfinity);
    hi.setConstant(kInfinity);
    return {lo, hi};
  }
  const Matrix design = observation_matrix(kind, grid, probes);      // q x p
  const Matrix paths = design * batch.samples.transpose();           // q x m
  std::vector<double> column(static_cast<std::size_t>(paths.cols()));
  for (Index i = 0; i < q; ++i) {
    for (Index s = 0; s < paths.cols(); ++s) column[s] = paths(i, s);
    lo[i] = empirical_quantile(column, 0.5 * (1.0 - level));
    hi[i] = empirical_quantile(column, 0.5 * (1.0 + level));
  }
  return {lo, hi};
}

PosteriorSummary summarize(const SampleBatch& batch, const QpSolution& mode, const ModelKind& kind,
                           const KnotGrid& grid, const Matrix& probes, double level) {
  PosteriorSummary s;
  s.mean_coefficients = sample_mean(batch);
  s.map_coefficients = mode.mu;
  std::tie(s.band_lower, s.band_upper) = credible_band(batch, kind, grid, probes, level);
  s.level = level;
  return s;
}

}  // namespace cgp
