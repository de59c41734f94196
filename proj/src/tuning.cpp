#include "cgp/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cgp/error.hpp"
#include "parallel.hpp"

namespace cgp {

CvConfig CvConfig::default_grid(int dim) {
  CvConfig config;
  std::vector<double> g(20);
  const double lo = std::log(0.05), hi = std::log(100.0);
  for (int k = 0; k < 20; ++k) g[k] = std::exp(lo + (hi - lo) * k / 19.0);
  config.theta_grid.assign(dim, g);
  return config;
}

CvConfig CvConfig::normalized() const {
  CvConfig out = *this;
  for (auto& g : out.theta_grid) {
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
  }
  return out;
}

void CvConfig::validate(int dim) const {
  if (static_cast<int>(theta_grid.size()) != dim)
    throw ConfigurationError("cv: one lengthscale grid per input dimension is required");
  for (const auto& g : theta_grid) {
    if (g.empty()) throw ConfigurationError("cv: empty lengthscale grid");
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (!(g[k] > 0.0) || !std::isfinite(g[k])) throw ConfigurationError("cv: lengthscales must be positive");
      if (k > 0 && !(g[k] > g[k - 1])) throw ConfigurationError("cv: lengthscale grid must be strictly increasing");
    }
  }
  if (folds < 0 || folds == 1) throw ConfigurationError("cv: folds must be 0 (leave-one-out) or at least 2");
  if (!(variance > 0.0)) throw ConfigurationError("cv: variance must be positive");
}

Vector cv_residuals(const CoefficientPrior& prior, const Matrix& observation, const Vector& values,
                    double noise_sd, int folds) {
  const Index n = values.size();
  const Matrix g = prior.covariance();
  Matrix c = observation * g * observation.transpose();
  c.diagonal().array() += noise_sd * noise_sd;
  const CholeskyFactor factor = chol(SymmetricMatrix::symmetrized(c));
  // With C^{-1} = L^{-T} L^{-1}, the held-out residual of fold F is
  // (C^{-1})_{FF}^{-1} (C^{-1} y)_F.
  const Matrix linv = factor.lower().triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));
  const Vector alpha = factor.solve(values);
  Vector r(n);
  if (folds == 0 || folds >= n) {
    for (Index i = 0; i < n; ++i) r[i] = alpha[i] / linv.col(i).squaredNorm();
    return r;
  }
  for (int f = 0; f < folds; ++f) {
    std::vector<Index> idx;
    for (Index i = f; i < n; i += folds) idx.push_back(i);
    const Index m = static_cast<Index>(idx.size());
    Matrix cols(n, m);
    Vector a(m);
    for (Index k = 0; k < m; ++k) {
      cols.col(k) = linv.col(idx[k]);
      a[k] = alpha[idx[k]];
    }
    const Matrix block = cols.transpose() * cols;
    const Vector rf = block.llt().solve(a);
    for (Index k = 0; k < m; ++k) r[idx[k]] = rf[k];
  }
  return r;
}

CvResult cv_search(const ModelKind& kind, const KnotGrid& grid, KernelFamily family, const ObservationSet& data,
                   const CvConfig& config) {
  const int d = kind.dim;
  config.validate(d);
  const Index n = data.size();
  if (n < 3) throw ArgumentError("cv: at least 3 observations are required");
  if (data.inputs.rows() != n || data.inputs.cols() != d) throw ArgumentError("cv: input shape mismatch");
  for (int m = 0; m < d; ++m)
    if (data.inputs.col(m).maxCoeff() - data.inputs.col(m).minCoeff() <= 0.0)
      throw ConfigurationError("cv: input column " + std::to_string(m + 1) + " is constant");

  std::size_t total = 1;
  for (const auto& g : config.theta_grid) total *= g.size();
  auto thetas_at = [&](std::size_t flat) {
    std::vector<double> t(d);
    for (int m = d - 1; m >= 0; --m) {
      const std::size_t s = config.theta_grid[m].size();
      t[m] = config.theta_grid[m][flat % s];
      flat /= s;
    }
    return t;
  };

  const Matrix a = observation_matrix(kind, grid, data.inputs);
  std::vector<double> scores(total);
  detail::parallel_for(total, config.threads, [&](std::size_t k) {
    const KernelSpec kernel(family, config.variance, thetas_at(k));
    const CoefficientPrior prior = build_prior(kind, grid, kernel);
    const Vector r = cv_residuals(prior, a, data.values, data.noise_sd, config.folds);
    scores[k] = r.squaredNorm() / static_cast<double>(n);
  });

  // Walk from the largest lengthscales down so that equal scores keep the
  // smoother candidate.
  std::size_t best = total - 1;
  for (std::size_t k = total; k-- > 0;)
    if (scores[k] < scores[best]) best = k;
  return {KernelSpec(family, config.variance, thetas_at(best)), scores[best], std::move(scores)};
}

KernelSpec cv_select(const ModelKind& kind, const KnotGrid& grid, KernelFamily family, const ObservationSet& data,
                     const CvConfig& config) {
  return cv_search(kind, grid, family, data, config).kernel;
}

}  // namespace cgp
