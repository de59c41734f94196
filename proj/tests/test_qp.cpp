#include <doctest.h>

#include <cmath>
#include <vector>

#include "cgp/error.hpp"
#include "cgp/qp.hpp"
#include "oracles.hpp"

using namespace cgp;
using cgp::testing::random_qp;

namespace {

ConstraintRow bound(Index i, double lo, double hi) {
  ConstraintRow r;
  r.terms = 1;
  r.index[0] = i;
  r.coeff[0] = 1.0;
  r.lower = lo;
  r.upper = hi;
  return r;
}

QpProblem orthant(const Vector& center, const Matrix& cov) {
  QpProblem p;
  p.covariance = SymmetricMatrix(cov);
  p.center = center;
  p.system.dim = center.size();
  for (Index i = 0; i < center.size(); ++i) p.system.rows.push_back(bound(i, 0.0, kInfinity));
  p.system.witness = Vector::Zero(center.size());
  return p;
}

}  // namespace

TEST_CASE("projection onto the orthant") {
  Vector c(2);
  c << -1.0, 2.0;
  const auto s = solve_qp(orthant(c, Matrix::Identity(2, 2)));
  CHECK(s.mu[0] == doctest::Approx(0.0));
  CHECK(s.mu[1] == doctest::Approx(2.0));
  CHECK(std::abs(s.mu[0]) <= 1e-12);
  CHECK(s.multipliers[0] == doctest::Approx(1.0));
  CHECK(s.multipliers[1] == 0.0);
  REQUIRE(s.active.size() == 1);
  CHECK(s.active[0] == ActiveConstraint{0, BoundSide::Lower});
  CHECK(s.kkt_residual <= 1e-12);
}

TEST_CASE("feasible centers are returned unchanged") {
  RngStream rng(61);
  for (int t = 0; t < 20; ++t) {
    Vector c(4);
    for (Index i = 0; i < 4; ++i) c[i] = rng.uniform() + 0.1;
    const auto s = solve_qp(orthant(c, cgp::testing::random_spd(rng, 4)));
    CHECK(s.mu == c);
    CHECK(s.iterations == 0);
  }
}

TEST_CASE("upper bound multipliers are nonpositive") {
  QpProblem p;
  p.covariance = SymmetricMatrix(Matrix::Identity(1, 1));
  p.center = Vector::Constant(1, 2.0);
  p.system.dim = 1;
  p.system.rows.push_back(bound(0, -1.0, 1.0));
  p.system.witness = Vector::Zero(1);
  const auto s = solve_qp(p);
  CHECK(s.mu[0] == doctest::Approx(1.0));
  CHECK(s.multipliers[0] == doctest::Approx(-1.0));
  REQUIRE(s.active.size() == 1);
  CHECK(s.active[0].side == BoundSide::Upper);
}

TEST_CASE("box-constrained solution agrees with a lattice search") {
  RngStream rng(62);
  for (int rep = 0; rep < 3; ++rep) {
    const Index n = 4;
    Matrix cov = cgp::testing::random_spd(rng, n, 0.0) * 0.25;
    cov.diagonal().array() += 1.0;
    QpProblem p;
    p.covariance = SymmetricMatrix(0.5 * (cov + cov.transpose()));
    p.center = 1.5 * cgp::testing::random_vector(rng, n);
    p.system.dim = n;
    for (Index i = 0; i < n; ++i) p.system.rows.push_back(bound(i, -1.0, 1.0));
    p.system.witness = Vector::Zero(n);
    const auto s = solve_qp(p);

    const Matrix prec = p.covariance.dense().inverse();
    auto objective = [&](const Vector& x) { return 0.5 * (x - p.center).dot(prec * (x - p.center)); };
    const int m = 41;
    const double h = 2.0 / (m - 1);
    Vector best(n), x(n);
    double best_f = kInfinity;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; ++c)
          for (int d = 0; d < m; ++d) {
            x << -1 + a * h, -1 + b * h, -1 + c * h, -1 + d * h;
            const double f = objective(x);
            if (f < best_f) {
              best_f = f;
              best = x;
            }
          }
    CHECK(objective(s.mu) <= best_f + 1e-12);
    CHECK((s.mu - best).cwiseAbs().maxCoeff() <= h);
  }
}

TEST_CASE("KKT conditions on random problems") {
  for (int k = 0; k < 100; ++k) {
    const auto p = random_qp(k);
    const auto s = solve_qp(p);
    CAPTURE(k);
    CHECK(s.kkt_residual <= 1e-6);
    CHECK(cgp::testing::independent_kkt(p, s) <= 1e-6);
    CHECK(is_member(p.system, s.mu, 1e-8 * (1.0 + s.mu.cwiseAbs().maxCoeff())));
  }
}

TEST_CASE("the mode does not depend on the covariance scale") {
  for (int k = 0; k < 30; ++k) {
    const auto p = random_qp(k);
    const auto base = solve_qp(p);
    for (double c : {0.01, 100.0}) {
      QpProblem q = p;
      q.covariance = SymmetricMatrix(c * p.covariance.dense());
      const auto s = solve_qp(q);
      CAPTURE(k);
      CAPTURE(c);
      CHECK((s.mu - base.mu).cwiseAbs().maxCoeff() <= 1e-7);
    }
  }
}

TEST_CASE("objective never increases across iterations") {
  QpOptions opts;
  opts.record_objective = true;
  for (int k = 0; k < 50; ++k) {
    const auto s = solve_qp(random_qp(k), opts);
    REQUIRE_FALSE(s.objective_trace.empty());
    for (std::size_t i = 1; i < s.objective_trace.size(); ++i) {
      CAPTURE(k);
      CAPTURE(s.objective_trace[i] - s.objective_trace[i - 1]);
      // Slack covers rounding in evaluating the quadratic form itself.
      CHECK(s.objective_trace[i] <= s.objective_trace[i - 1] + 1e-10 * (1.0 + s.objective_trace[i - 1]));
    }
  }
}

TEST_CASE("solutions are bit-identical across calls") {
  for (int k = 0; k < 10; ++k) {
    const auto p = random_qp(k);
    const auto a = solve_qp(p);
    const auto b = solve_qp(p);
    CHECK(a.mu == b.mu);
    CHECK(a.multipliers == b.multipliers);
    CHECK(a.active == b.active);
  }
}

TEST_CASE("error reporting") {
  Vector c(2);
  c << -1.0, -2.0;
  auto p = orthant(c, Matrix::Identity(2, 2));

  QpOptions bad_start;
  bad_start.start = Vector::Constant(2, -1.0);
  CHECK_THROWS_AS(solve_qp(p, bad_start), InfeasibleError);

  auto crossed = p;
  crossed.system.rows.push_back(bound(0, 1.0, 0.5));
  try {
    solve_qp(crossed);
    FAIL("expected InfeasibleError");
  } catch (const InfeasibleError& e) {
    CHECK(e.row() == 2);
  }

  QpOptions short_run;
  short_run.max_iterations = 1;
  CHECK_THROWS_AS(solve_qp(p, short_run), IterationLimitError);

  auto wrong = p;
  wrong.center = Vector::Zero(3);
  CHECK_THROWS_AS(solve_qp(wrong), ArgumentError);
}

TEST_CASE("MAP curve of a positivity fit") {
  const KnotGrid g(1, 30);
  const auto prior = build_prior(ModelKind::value(1), g, KernelSpec(KernelFamily::SquaredExponential, 1, {0.1}));
  Matrix x(6, 1);
  Vector y(6);
  x << 0.05, 0.2, 0.4, 0.55, 0.7, 0.95;
  y << 0.5, -0.3, 0.1, -0.8, 0.4, 0.9;
  const auto post = condition(prior, observation_matrix(ModelKind::value(1), g, x), y, 0.05);
  const auto sys = encode(ShapeConstraint::positive(), g, ModelKind::value(1));
  const auto s = solve_map(post, sys);
  for (int i = 0; i <= 1000; ++i) CHECK(map_curve(s, ModelKind::value(1), g, i / 1000.0) >= -1e-8);

  // Shift the data up so the unconstrained mean is feasible: MAP = mean.
  const auto post2 = condition(prior, observation_matrix(ModelKind::value(1), g, x), (y.array() + 5.0).matrix(), 0.05);
  const auto s2 = solve_map(post2, sys);
  for (int i = 0; i <= 100; ++i) {
    const double z = i / 100.0;
    CHECK(std::abs(map_curve(s2, ModelKind::value(1), g, z) - unconstrained_mean(post2, ModelKind::value(1), g, z)) <= 1e-8);
  }
}

TEST_CASE("monotone MAP on a noisy sinusoidal trend is nondecreasing") {
  RngStream rng(63);
  const KnotGrid g(1, 50);
  const auto kind = ModelKind::monotone();
  const auto prior = build_prior(kind, g, KernelSpec(KernelFamily::SquaredExponential, 1, {0.25}));
  const int n = 100;
  Matrix x(n, 1);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform();
    const double t = 10.0 * x(i, 0);
    y[i] = std::log(20.0 * t + 1.0) + 0.5 * std::sin(t) + rng.normal() - 3.0;
  }
  const auto post = condition(prior, observation_matrix(kind, g, x), y, 1.0);
  const auto sys = encode(ShapeConstraint::monotone(), g, kind);
  const auto s = solve_map(post, sys);
  CHECK(check_function_shape(kind, g, ShapeConstraint::monotone(), s.mu, 1000));
  double prev = -kInfinity;
  for (int i = 0; i <= 1000; ++i) {
    const double v = map_curve(s, kind, g, i / 1000.0);
    CHECK(v >= prev - 1e-9);
    prev = v;
  }
}
