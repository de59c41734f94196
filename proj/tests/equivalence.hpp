#pragma once

#include <string>
#include <vector>

#include "cgp/basis.hpp"
#include "cgp/constraint.hpp"
#include "cgp/rng.hpp"

namespace cgp::testing {

struct EquivalenceCase {
  std::string name;
  ShapeConstraint constraint;
  int dim;
};

inline std::vector<EquivalenceCase> equivalence_cases() {
  return {
      {"bounded-1d", ShapeConstraint::bounded(0.0, 2.0), 1},
      {"positive-1d", ShapeConstraint::positive(), 1},
      {"monotone", ShapeConstraint::monotone(), 1},
      {"monotone-decreasing", ShapeConstraint::monotone(Direction::Decreasing), 1},
      {"convex-1d", ShapeConstraint::convex1d(), 1},
      {"bounded-2d", ShapeConstraint::bounded(0.0, 2.0), 2},
      {"isotonic", ShapeConstraint::isotonic2d(AxisOrder::Increasing, AxisOrder::Increasing), 2},
      {"isotonic-x1", ShapeConstraint::isotonic2d(AxisOrder::Increasing, AxisOrder::None), 2},
      {"isotonic-mixed", ShapeConstraint::isotonic2d(AxisOrder::Decreasing, AxisOrder::Increasing), 2},
      {"convex-2d", ShapeConstraint::convex2d(), 2},
  };
}

inline int small_int(RngStream& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

/// Integer-lattice coefficients: a member of the encoded set built by
/// construction, then with probability 1/2 one entry shifted by a nonzero
/// integer (which may or may not leave the set).
inline Vector lattice_coefficients(RngStream& rng, const ShapeConstraint& c, const ModelKind& kind,
                                   const KnotGrid& grid) {
  const Index dim = coefficient_count(kind, grid);
  const int n = grid.subdivisions();
  const int k = n + 1;
  Vector z = Vector::Zero(dim);
  using Kind = ShapeConstraint::Kind;
  switch (c.kind) {
    case Kind::Unconstrained:
      for (Index i = 0; i < dim; ++i) z[i] = small_int(rng, -3, 3);
      break;
    case Kind::Bounded:
      for (Index i = 0; i < dim; ++i) z[i] = small_int(rng, 0, 2);
      break;
    case Kind::Monotone1D: {
      const double s = c.direction == Direction::Increasing ? 1.0 : -1.0;
      z[0] = small_int(rng, -3, 3);
      for (Index i = 1; i < dim; ++i) z[i] = s * small_int(rng, 0, 3);
      break;
    }
    case Kind::Convex1D:
      z[0] = small_int(rng, -3, 3);
      z[1] = small_int(rng, -3, 3);
      for (Index i = 2; i < dim; ++i) z[i] = small_int(rng, 0, 3);
      break;
    case Kind::Isotonic2D: {
      auto sign = [](AxisOrder o) { return o == AxisOrder::Decreasing ? -1.0 : o == AxisOrder::Increasing ? 1.0 : 0.0; };
      // Sum of per-axis monotone integer ramps plus free noise on unordered axes.
      std::vector<double> a(k, 0.0), b(k, 0.0);
      for (int i = 1; i < k; ++i) a[i] = a[i - 1] + small_int(rng, 0, 2);
      for (int j = 1; j < k; ++j) b[j] = b[j - 1] + small_int(rng, 0, 2);
      std::vector<double> free_a(k), free_b(k);
      for (int i = 0; i < k; ++i) free_a[i] = small_int(rng, -2, 2);
      for (int j = 0; j < k; ++j) free_b[j] = small_int(rng, -2, 2);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
          const double u = c.axes[1] == AxisOrder::None ? free_b[j] : sign(c.axes[1]) * b[j];
          const double v = c.axes[0] == AxisOrder::None ? free_a[i] : sign(c.axes[0]) * a[i];
          z[i * k + j] = u + v;
        }
      break;
    }
    case Kind::Convex2D: {
      // Separable sum of convex integer sequences (cumulative sums of nondecreasing slopes).
      auto convex_seq = [&] {
        std::vector<double> s(k, 0.0);
        double slope = small_int(rng, -3, 0);
        for (int i = 1; i < k; ++i) {
          s[i] = s[i - 1] + slope;
          slope += small_int(rng, 0, 2);
        }
        return s;
      };
      const auto a = convex_seq();
      const auto b = convex_seq();
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) z[i * k + j] = a[i] + b[j];
      break;
    }
  }
  if (rng.below(2) == 1) {
    const Index i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(dim)));
    int shift = 0;
    while (shift == 0) shift = small_int(rng, -2, 2);
    z[i] += shift;
  }
  return z;
}

struct EquivalenceTally {
  int trials = 0;
  int members = 0;
  int disagreements = 0;
};

/// is_member against check_function_shape at 10 N + 1 probes per dimension.
inline EquivalenceTally run_equivalence(const EquivalenceCase& ec, int n, int vectors, RngStream rng) {
  const KnotGrid grid(ec.dim, n);
  const ModelKind kind = default_model_kind(ec.constraint, ec.dim);
  const LinearInequalitySystem system = encode(ec.constraint, grid, kind);
  EquivalenceTally t;
  for (int v = 0; v < vectors; ++v) {
    const Vector z = lattice_coefficients(rng, ec.constraint, kind, grid);
    const bool member = is_member(system, z);
    const bool shape = check_function_shape(kind, grid, ec.constraint, z, 10 * n + 1);
    ++t.trials;
    t.members += member ? 1 : 0;
    t.disagreements += member == shape ? 0 : 1;
  }
  return t;
}

}  // namespace cgp::testing
