#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cgp/error.hpp"
#include "cgp/tuning.hpp"
#include "support.hpp"

using namespace cgp;

namespace {

ObservationSet smooth_data(RngStream& rng, Index n, double noise) {
  ObservationSet d;
  d.inputs.resize(n, 1);
  d.values.resize(n);
  d.noise_sd = noise;
  for (Index i = 0; i < n; ++i) {
    d.inputs(i, 0) = rng.uniform();
    d.values[i] = std::sin(5.0 * d.inputs(i, 0)) + noise * rng.normal();
  }
  return d;
}

CvConfig grid_of(std::vector<double> g) {
  CvConfig c;
  c.theta_grid = {std::move(g)};
  return c;
}

/// Held-out residuals by refitting without each fold.
Vector refit_residuals(const CoefficientPrior& prior, const Matrix& a, const Vector& y, double noise, int folds) {
  const Index n = y.size();
  const int k = folds == 0 ? static_cast<int>(n) : folds;
  Vector r(n);
  for (int f = 0; f < k; ++f) {
    std::vector<Index> train, test;
    for (Index i = 0; i < n; ++i) (i % k == f ? test : train).push_back(i);
    Matrix at(static_cast<Index>(train.size()), a.cols());
    Vector yt(static_cast<Index>(train.size()));
    for (std::size_t t = 0; t < train.size(); ++t) {
      at.row(t) = a.row(train[t]);
      yt[t] = y[train[t]];
    }
    const auto post = condition(prior, at, yt, noise);
    for (Index i : test) r[i] = y[i] - a.row(i).dot(post.mean);
  }
  return r;
}

}  // namespace

TEST_CASE("selection is the argmin over the grid") {
  RngStream rng(81);
  const auto data = smooth_data(rng, 30, 0.1);
  const KnotGrid g(1, 40);
  const auto r = cv_search(ModelKind::value(1), g, KernelFamily::SquaredExponential, data, grid_of({0.1, 1, 10}));
  REQUIRE(r.scores.size() == 3);
  const double best = *std::min_element(r.scores.begin(), r.scores.end());
  CHECK(r.score == best);
  const auto idx = std::min_element(r.scores.begin(), r.scores.end()) - r.scores.begin();
  CHECK(r.kernel.lengthscales()[0] == std::vector<double>{0.1, 1, 10}[idx]);
  CHECK(r.kernel.variance() == 1.0);
}

TEST_CASE("constant data selects the largest lengthscale") {
  RngStream rng(82);
  ObservationSet d;
  d.inputs.resize(25, 1);
  for (Index i = 0; i < 25; ++i) d.inputs(i, 0) = rng.uniform();
  d.values = Vector::Constant(25, 3.0);
  d.noise_sd = 0.1;
  const auto cfg = CvConfig::default_grid(1);
  const auto k = cv_select(ModelKind::value(1), KnotGrid(1, 30), KernelFamily::SquaredExponential, d, cfg);
  CHECK(k.lengthscales()[0] == cfg.theta_grid[0].back());
}

TEST_CASE("duplicated grid points do not change the selection") {
  RngStream rng(83);
  const auto data = smooth_data(rng, 20, 0.2);
  const KnotGrid g(1, 30);
  const auto base = cv_select(ModelKind::value(1), g, KernelFamily::SquaredExponential, data, grid_of({0.05, 0.2, 0.8}));
  const auto dup = grid_of({0.2, 0.05, 0.8, 0.2});
  CHECK_THROWS_AS(dup.validate(1), ConfigurationError);
  const auto sel = cv_select(ModelKind::value(1), g, KernelFamily::SquaredExponential, data, dup.normalized());
  CHECK(sel.lengthscales() == base.lengthscales());
}

TEST_CASE("single-factorization residuals match refits") {
  RngStream rng(84);
  for (const auto kind : {ModelKind::value(1), ModelKind::monotone()}) {
    const KnotGrid g(1, 15);
    const auto prior = build_prior(kind, g, KernelSpec(KernelFamily::SquaredExponential, 1, {0.3}));
    const auto d = smooth_data(rng, 12, 0.15);
    const Matrix a = observation_matrix(kind, g, d.inputs);
    for (int folds : {0, 3, 4}) {
      const Vector fast = cv_residuals(prior, a, d.values, 0.15, folds);
      const Vector slow = refit_residuals(prior, a, d.values, 0.15, folds);
      CAPTURE(folds);
      CHECK((fast - slow).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("selection does not depend on the data order") {
  RngStream rng(85);
  const auto d = smooth_data(rng, 25, 0.1);
  std::vector<Index> perm(25);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  ObservationSet s = d;
  for (Index i = 0; i < 25; ++i) {
    s.inputs(i, 0) = d.inputs(perm[i], 0);
    s.values[i] = d.values[perm[i]];
  }
  const KnotGrid g(1, 30);
  const auto cfg = CvConfig::default_grid(1);
  const auto a = cv_search(ModelKind::value(1), g, KernelFamily::SquaredExponential, d, cfg);
  const auto b = cv_search(ModelKind::value(1), g, KernelFamily::SquaredExponential, s, cfg);
  CHECK(a.kernel.lengthscales() == b.kernel.lengthscales());
  for (std::size_t i = 0; i < a.scores.size(); ++i) CHECK(std::abs(a.scores[i] - b.scores[i]) <= 1e-10 * (1 + a.scores[i]));
}

TEST_CASE("two-dimensional search covers the tensor grid") {
  RngStream rng(86);
  ObservationSet d;
  d.inputs.resize(30, 2);
  d.values.resize(30);
  d.noise_sd = 0.05;
  for (Index i = 0; i < 30; ++i) {
    d.inputs(i, 0) = rng.uniform();
    d.inputs(i, 1) = rng.uniform();
    d.values[i] = d.inputs(i, 0) + 0.1 * d.inputs(i, 1);
  }
  CvConfig c;
  c.theta_grid = {{0.1, 0.5, 2.0}, {0.2, 1.0}};
  CvConfig threaded = c;
  threaded.threads = 3;
  const auto r = cv_search(ModelKind::value(2), KnotGrid(2, 8), KernelFamily::SquaredExponential, d, c);
  const auto t = cv_search(ModelKind::value(2), KnotGrid(2, 8), KernelFamily::SquaredExponential, d, threaded);
  CHECK(r.scores.size() == 6);
  CHECK(r.scores == t.scores);
  const auto best = std::min_element(r.scores.begin(), r.scores.end()) - r.scores.begin();
  CHECK(r.kernel.lengthscales()[0] == c.theta_grid[0][best / 2]);
  CHECK(r.kernel.lengthscales()[1] == c.theta_grid[1][best % 2]);
}

TEST_CASE("configuration and data errors") {
  RngStream rng(87);
  const KnotGrid g(1, 10);
  auto small = smooth_data(rng, 2, 0.1);
  CHECK_THROWS_AS(cv_search(ModelKind::value(1), g, KernelFamily::SquaredExponential, small, grid_of({0.1, 1})),
                  ArgumentError);
  auto flat_x = smooth_data(rng, 10, 0.1);
  flat_x.inputs.setConstant(0.4);
  CHECK_THROWS_AS(cv_search(ModelKind::value(1), g, KernelFamily::SquaredExponential, flat_x, grid_of({0.1, 1})),
                  ConfigurationError);
  CHECK_THROWS_AS(grid_of({}).validate(1), ConfigurationError);
  CHECK_THROWS_AS(grid_of({-1.0, 1.0}).validate(1), ConfigurationError);
  CHECK_THROWS_AS(grid_of({0.1, 1.0}).validate(2), ConfigurationError);
  auto one_fold = grid_of({0.1, 1.0});
  one_fold.folds = 1;
  CHECK_THROWS_AS(one_fold.validate(1), ConfigurationError);
  const auto def = CvConfig::default_grid(2);
  REQUIRE(def.theta_grid.size() == 2);
  CHECK(def.theta_grid[0].size() == 20);
  CHECK(def.theta_grid[0].front() == doctest::Approx(0.05));
  CHECK(def.theta_grid[0].back() == doctest::Approx(100.0));
}
