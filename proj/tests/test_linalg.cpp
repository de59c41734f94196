#include <doctest.h>

#include <cmath>

#include "cgp/error.hpp"
#include "cgp/linalg.hpp"
#include "support.hpp"

using namespace cgp;
using cgp::testing::random_matrix;
using cgp::testing::random_spd;

TEST_CASE("chol of the identity is the identity without jitter") {
  const auto f = chol(SymmetricMatrix(Matrix::Identity(5, 5)));
  CHECK(f.jitter() == 0.0);
  CHECK((f.lower() - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("chol of a 2x2 matches the hand factorization") {
  Matrix a(2, 2);
  a << 4, 2, 2, 3;
  const auto f = chol(SymmetricMatrix(a));
  CHECK(f.lower()(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(f.lower()(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f.lower()(1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(f.lower()(0, 1) == 0.0);
}

TEST_CASE("chol reconstructs random positive definite matrices") {
  RngStream rng(11);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = random_spd(rng, 6);
    const auto f = chol(SymmetricMatrix(a));
    const Matrix r = f.lower() * f.lower().transpose();
    CHECK((r - a).norm() <= 1e-10 * a.norm());
  }
}

TEST_CASE("jitter rescues a singular PSD matrix and strict mode refuses it") {
  Vector v(4);
  v << 1, 2, 3, 4;
  const Matrix a = v * v.transpose();
  const auto f = chol(SymmetricMatrix(a));
  CHECK(f.jitter() > 0.0);
  Matrix shifted = a;
  shifted.diagonal().array() += f.jitter();
  CHECK((f.lower() * f.lower().transpose() - shifted).norm() <= 1e-10 * shifted.norm());
  CHECK_THROWS_AS(chol(SymmetricMatrix(a), JitterPolicy::strict()), ConditioningError);
}

TEST_CASE("negative definite input exhausts the jitter schedule") {
  CHECK_THROWS_AS(chol(SymmetricMatrix(Matrix(-Matrix::Identity(3, 3)))), ConditioningError);
}

TEST_CASE("SymmetricMatrix rejects clearly asymmetric input") {
  Matrix a(2, 2);
  a << 1, 0.5, 0.4, 1;
  CHECK_THROWS_AS(SymmetricMatrix{a}, ArgumentError);
  const auto s = SymmetricMatrix::symmetrized(a);
  CHECK(s(0, 1) == doctest::Approx(0.45));
  CHECK(s(0, 1) == s(1, 0));
  CHECK(asymmetry(a) == doctest::Approx(0.1));
}

TEST_CASE("solve_spd and quad_form") {
  RngStream rng(12);
  const Matrix b = random_matrix(rng, 5, 3);
  CHECK((solve_spd(SymmetricMatrix(Matrix::Identity(5, 5)), b) - b).cwiseAbs().maxCoeff() == 0.0);
  const Vector v = b.col(0);
  CHECK(quad_form(SymmetricMatrix(Matrix::Identity(5, 5)), v) == doctest::Approx(v.squaredNorm()));

  for (int t = 0; t < 20; ++t) {
    const Matrix a = random_spd(rng, 5);
    const Matrix x = solve_spd(SymmetricMatrix(a), b);
    CHECK((a * x - b).norm() <= 1e-9 * b.norm());
    // Explicit inverse only as a test oracle.
    const double expect = v.dot(a.inverse() * v);
    CHECK(std::abs(quad_form(SymmetricMatrix(a), v) - expect) <= 1e-9 * std::abs(expect));
  }
}

TEST_CASE("factorization is deterministic") {
  RngStream rng(13);
  const Matrix a = random_spd(rng, 8);
  const auto f1 = chol(SymmetricMatrix(a));
  const auto f2 = chol(SymmetricMatrix(a));
  CHECK(f1.lower() == f2.lower());
}
