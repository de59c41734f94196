#include "cgp/model.hpp"

#include <algorithm>

#include "cgp/error.hpp"

namespace cgp {

namespace {

KernelSpec unit_kernel_of(const ModelOptions& o) {
  const std::size_t d = o.domain.dim();
  if (o.lengthscales.size() != d) throw ConfigurationError("model: one lengthscale per input dimension is required");
  std::vector<double> unit(d);
  for (std::size_t m = 0; m < d; ++m) unit[m] = o.lengthscales[m] / o.domain.width(m);
  return KernelSpec(o.family, o.variance, std::move(unit));
}

}  // namespace

Model::Model(ModelOptions options)
    : options_(std::move(options)),
      kind_(default_model_kind(options_.constraint, static_cast<int>(options_.domain.dim()))),
      grid_(static_cast<int>(options_.domain.dim()), options_.subdivisions),
      kernel_(unit_kernel_of(options_)) {
  options_.constraint.validate();
  if (!(options_.noise_sd >= 0.0)) throw ConfigurationError("model: noise standard deviation must be >= 0");
  prior_ = build_prior(kind_, grid_, kernel_, options_.jitter);
  shifted_ = options_.constraint;
  system_ = encode(shifted_, grid_, kind_);
}

Matrix Model::to_unit(const Matrix& points) const {
  if (points.cols() != dim()) throw ArgumentError("model: point dimension mismatch");
  Matrix u(points.rows(), points.cols());
  std::vector<double> x(dim());
  for (Index i = 0; i < points.rows(); ++i) {
    for (int m = 0; m < dim(); ++m) x[m] = points(i, m);
    const auto v = options_.domain.to_unit(x);
    for (int m = 0; m < dim(); ++m) u(i, m) = v[m];
  }
  return u;
}

void Model::fit(const Matrix& x, const Vector& y) {
  if (x.rows() != y.size()) throw ArgumentError("model: input/output size mismatch");
  offset_ = options_.center && y.size() > 0 ? y.mean() : 0.0;
  shifted_ = options_.constraint;
  if (shifted_.kind == ShapeConstraint::Kind::Bounded) {
    shifted_.lower -= offset_;
    shifted_.upper -= offset_;
  }
  system_ = encode(shifted_, grid_, kind_);

  const Matrix a = observation_matrix(kind_, grid_, to_unit(x));
  const Vector yc = (y.array() - offset_).matrix();
  posterior_ = condition(prior_, a, yc, options_.noise_sd);
  QpOptions qp = options_.qp;
  // Noise-free data can determine the coefficients completely, leaving a
  // covariance made of rounding errors; a long jitter schedule then turns
  // the mode into a near-Euclidean projection onto the constraint set.
  if (options_.noise_sd == 0.0 && qp.jitter.allow_jitter) qp.jitter.max_doublings = std::max(qp.jitter.max_doublings, 60);
  if (!qp.start && !is_member(system_, posterior_->mean))
    qp.start = feasible_start(shifted_, grid_, kind_, system_, posterior_->mean);
  mode_ = solve_map(*posterior_, system_, qp);
}

const CoefficientPosterior& Model::posterior() const {
  if (!posterior_) throw ArgumentError("model: not fitted");
  return *posterior_;
}

const QpSolution& Model::mode() const {
  if (!mode_) throw ArgumentError("model: not fitted");
  return *mode_;
}

double Model::predict_unconstrained(std::span<const double> x) const {
  return offset_ + unconstrained_mean(posterior(), kind_, grid_, options_.domain.to_unit(x));
}

double Model::predict_map(std::span<const double> x) const {
  return offset_ + map_curve(mode(), kind_, grid_, options_.domain.to_unit(x));
}

std::vector<double> Model::predict_unconstrained(const Matrix& points) const {
  const Matrix u = to_unit(points);
  std::vector<double> out(u.rows());
  std::vector<double> x(dim());
  for (Index i = 0; i < u.rows(); ++i) {
    for (int m = 0; m < dim(); ++m) x[m] = u(i, m);
    out[i] = offset_ + unconstrained_mean(posterior(), kind_, grid_, x);
  }
  return out;
}

std::vector<double> Model::predict_map(const Matrix& points) const {
  const Matrix u = to_unit(points);
  std::vector<double> out(u.rows());
  std::vector<double> x(dim());
  for (Index i = 0; i < u.rows(); ++i) {
    for (int m = 0; m < dim(); ++m) x[m] = u(i, m);
    out[i] = offset_ + map_curve(mode(), kind_, grid_, x);
  }
  return out;
}

SampleBatch Model::sample(Index count, std::uint64_t seed, const SamplerOptions& options) const {
  return sample_truncated(posterior(), system_, mode(), count, RngStream(seed), options);
}

Matrix Model::sample_paths(const SampleBatch& batch, const Matrix& points) const {
  const Matrix a = observation_matrix(kind_, grid_, to_unit(points));
  Matrix paths = batch.samples * a.transpose();
  paths.array() += offset_;
  return paths;
}

std::pair<Vector, Vector> Model::band(const SampleBatch& batch, const Matrix& points, double level) const {
  auto [lo, hi] = credible_band(batch, kind_, grid_, to_unit(points), level);
  lo.array() += offset_;
  hi.array() += offset_;
  return {lo, hi};
}

bool Model::map_satisfies_shape(int probes) const {
  return check_function_shape(kind_, grid_, shifted_, mode().mu, probes);
}

}  // namespace cgp
