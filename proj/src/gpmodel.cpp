#include "cgp/gpmodel.hpp"

#include <array>
#include <vector>

#include "cgp/error.hpp"

namespace cgp {

namespace {

// Tensor coordinates of value-basis coefficient `index` (x1 index slowest).
std::array<double, 2> knot_point(const KnotGrid& grid, Index index) {
  const int k = grid.knots_per_dim();
  if (grid.dim() == 1) return {grid.knot(static_cast<int>(index)), 0.0};
  return {grid.knot(static_cast<int>(index / k)), grid.knot(static_cast<int>(index % k))};
}

void require_dim(const KernelSpec& kernel, int dim) {
  if (static_cast<int>(kernel.dim()) != dim)
    throw ArgumentError("kernel dimension does not match the model dimension");
}

Matrix value_prior(const KnotGrid& grid, const KernelSpec& kernel) {
  require_dim(kernel, grid.dim());
  Index p = 1;
  for (int m = 0; m < grid.dim(); ++m) p *= grid.knots_per_dim();
  Matrix g(p, p);
  for (Index a = 0; a < p; ++a) {
    const auto xa = knot_point(grid, a);
    for (Index b = 0; b <= a; ++b) {
      const auto xb = knot_point(grid, b);
      const double v = eval(kernel, std::span<const double>(xa.data(), grid.dim()),
                            std::span<const double>(xb.data(), grid.dim()));
      g(a, b) = v;
      g(b, a) = v;
    }
  }
  return g;
}

Matrix derivative_prior(const KnotGrid& grid, const KernelSpec& kernel, int order) {
  // Coefficients: derivatives of order 0..order-1 at x = 0, then the
  // derivative of order `order` at each knot.
  require_dim(kernel, 1);
  const int n = grid.subdivisions();
  const Index p = order + n + 1;
  std::vector<double> where(p);
  std::vector<int> degree(p);
  for (int r = 0; r < order; ++r) {
    where[r] = 0.0;
    degree[r] = r;
  }
  for (int j = 0; j <= n; ++j) {
    where[order + j] = grid.knot(j);
    degree[order + j] = order;
  }
  Matrix g(p, p);
  for (Index a = 0; a < p; ++a)
    for (Index b = 0; b < p; ++b) g(a, b) = eval_deriv(kernel, where[a], where[b], degree[a], degree[b]);
  return g;
}

}  // namespace

Matrix CoefficientPrior::covariance() const {
  Matrix c = gamma.dense();
  c.diagonal().array() += jitter;
  return c;
}

CoefficientPrior build_prior(const ModelKind& kind, const KnotGrid& grid, const KernelSpec& kernel,
                             const JitterPolicy& policy) {
  if (kind.dim != grid.dim()) throw ArgumentError("build_prior: model kind and grid dimensions differ");
  Matrix g;
  switch (kind.basis) {
    case ModelKind::Basis::Value: g = value_prior(grid, kernel); break;
    case ModelKind::Basis::MonotoneDeriv1D: g = derivative_prior(grid, kernel, 1); break;
    case ModelKind::Basis::ConvexSecondDeriv1D: g = derivative_prior(grid, kernel, 2); break;
  }
  CoefficientPrior prior;
  prior.gamma = SymmetricMatrix(g);
  prior.jitter = chol(prior.gamma, policy).jitter();
  return prior;
}

double approx_kernel(const ModelKind& kind, const KnotGrid& grid, const CoefficientPrior& prior,
                     std::span<const double> x, std::span<const double> xp) {
  const Vector a = design_row(grid, kind, x);
  const Vector b = design_row(grid, kind, xp);
  const Matrix& g = prior.gamma.dense();
  // Averaging both orders makes K_N(x, x') == K_N(x', x) bit for bit.
  return 0.5 * (a.dot(g * b) + b.dot(g * a)) + prior.jitter * a.dot(b);
}

double approx_kernel(const ModelKind& kind, const KnotGrid& grid, const CoefficientPrior& prior, double x,
                     double xp) {
  return approx_kernel(kind, grid, prior, std::span<const double>(&x, 1), std::span<const double>(&xp, 1));
}

Matrix observation_matrix(const ModelKind& kind, const KnotGrid& grid, const Matrix& inputs) {
  if (inputs.rows() > 0 && inputs.cols() != kind.dim)
    throw ArgumentError("observation_matrix: input dimension mismatch");
  Matrix a(inputs.rows(), coefficient_count(kind, grid));
  std::vector<double> x(kind.dim);
  for (Index i = 0; i < inputs.rows(); ++i) {
    for (int m = 0; m < kind.dim; ++m) x[m] = inputs(i, m);
    a.row(i) = design_row(grid, kind, x).transpose();
  }
  return a;
}

CoefficientPosterior condition(const CoefficientPrior& prior, const Matrix& observation, const Vector& values,
                               double noise_sd) {
  if (!(noise_sd >= 0.0)) throw ArgumentError("condition: noise standard deviation must be >= 0");
  if (observation.rows() != values.size()) throw ArgumentError("condition: observation/value size mismatch");
  if (observation.rows() > 0 && observation.cols() != prior.dim())
    throw ArgumentError("condition: observation matrix width differs from the prior dimension");

  const Matrix g = prior.covariance();
  CoefficientPosterior post;
  post.observation = observation;
  post.values = values;
  post.noise_sd = noise_sd;
  if (values.size() == 0) {
    post.mean = Vector::Zero(prior.dim());
    post.covariance = SymmetricMatrix::symmetrized(g);
    return post;
  }

  const Matrix ag = observation * g;  // n x p
  Matrix s = ag * observation.transpose();
  s.diagonal().array() += noise_sd * noise_sd;
  const JitterPolicy policy = noise_sd > 0.0 ? JitterPolicy{} : JitterPolicy::strict();
  CholeskyFactor factor;
  try {
    factor = chol(SymmetricMatrix::symmetrized(s), policy);
  } catch (const ConditioningError&) {
    throw ConditioningError(
        "condition: A Gamma A^T + noise^2 I is singular (duplicated design points without noise?)");
  }
  const Matrix w = factor.lower().triangularView<Eigen::Lower>().solve(ag);  // L^{-1} A G
  const Vector z = factor.solve_lower(values);
  post.mean = w.transpose() * z;
  Matrix cov = g;
  cov.noalias() -= w.transpose() * w;
  post.covariance = SymmetricMatrix::symmetrized(cov);
  return post;
}

double unconstrained_mean(const CoefficientPosterior& posterior, const ModelKind& kind, const KnotGrid& grid,
                          std::span<const double> x) {
  return evaluate(grid, kind, posterior.mean, x);
}

double unconstrained_mean(const CoefficientPosterior& posterior, const ModelKind& kind, const KnotGrid& grid,
                          double x) {
  return unconstrained_mean(posterior, kind, grid, std::span<const double>(&x, 1));
}

std::vector<KrigingPrediction> reference_kriging(const KernelSpec& kernel, const Matrix& inputs,
                                                 const Vector& values, double noise_sd, const Matrix& points) {
  if (inputs.rows() != values.size()) throw ArgumentError("reference_kriging: input/value size mismatch");
  if (!(noise_sd >= 0.0)) throw ArgumentError("reference_kriging: noise standard deviation must be >= 0");
  const Index n = inputs.rows();
  const Index d = static_cast<Index>(kernel.dim());
  if ((n > 0 && inputs.cols() != d) || points.cols() != d)
    throw ArgumentError("reference_kriging: dimension mismatch");

  auto point = [&](const Matrix& m, Index i) {
    std::vector<double> p(d);
    for (Index c = 0; c < d; ++c) p[c] = m(i, c);
    return p;
  };

  std::vector<KrigingPrediction> out(points.rows());
  if (n == 0) {
    for (Index q = 0; q < points.rows(); ++q) {
      const auto x = point(points, q);
      out[q] = {0.0, eval(kernel, x, x)};
    }
    return out;
  }

  Matrix k(n, n);
  std::vector<std::vector<double>> xs(n);
  for (Index i = 0; i < n; ++i) xs[i] = point(inputs, i);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = eval(kernel, xs[i], xs[j]);
  k.diagonal().array() += noise_sd * noise_sd;
  const JitterPolicy policy = noise_sd > 0.0 ? JitterPolicy{} : JitterPolicy::strict();
  CholeskyFactor factor;
  try {
    factor = chol(SymmetricMatrix::symmetrized(k), policy);
  } catch (const ConditioningError&) {
    throw ConditioningError("reference_kriging: covariance of the observations is singular");
  }
  const Vector alpha = factor.solve(values);
  for (Index q = 0; q < points.rows(); ++q) {
    const auto x = point(points, q);
    Vector kx(n);
    for (Index i = 0; i < n; ++i) kx[i] = eval(kernel, x, xs[i]);
    const double var = eval(kernel, x, x) - factor.solve_lower(kx).squaredNorm();
    out[q] = {kx.dot(alpha), var};
  }
  return out;
}

KrigingPrediction reference_kriging(const KernelSpec& kernel, const Matrix& inputs, const Vector& values,
                                    double noise_sd, std::span<const double> x) {
  Matrix p(1, static_cast<Index>(x.size()));
  for (std::size_t m = 0; m < x.size(); ++m) p(0, static_cast<Index>(m)) = x[m];
  return reference_kriging(kernel, inputs, values, noise_sd, p)[0];
}

}  // namespace cgp
