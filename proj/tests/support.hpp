#pragma once

#include <cmath>
#include <cstdint>

#include "cgp/linalg.hpp"
#include "cgp/rng.hpp"

namespace cgp::testing {

inline Matrix random_matrix(RngStream& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

inline Vector random_vector(RngStream& rng, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

/// B B^T + shift * I with B standard normal.
inline Matrix random_spd(RngStream& rng, Index n, double shift = 0.5) {
  const Matrix b = random_matrix(rng, n, n);
  Matrix a = b * b.transpose();
  a.diagonal().array() += shift;
  return 0.5 * (a + a.transpose());
}

/// Composite Simpson rule with `panels` panels (even).
template <typename F>
double simpson(F&& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

}  // namespace cgp::testing
