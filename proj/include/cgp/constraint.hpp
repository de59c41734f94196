#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cgp/basis.hpp"
#include "cgp/linalg.hpp"

namespace cgp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Direction { Increasing, Decreasing };
enum class AxisOrder { None, Increasing, Decreasing };

/// Functional shape constraint on Y^N over the whole domain.
struct ShapeConstraint {
  enum class Kind { Unconstrained, Bounded, Monotone1D, Convex1D, Isotonic2D, Convex2D };

  Kind kind = Kind::Unconstrained;
  double lower = -kInfinity;  // Bounded
  double upper = kInfinity;   // Bounded
  Direction direction = Direction::Increasing;  // Monotone1D
  std::array<AxisOrder, 2> axes{AxisOrder::None, AxisOrder::None};  // Isotonic2D

  static ShapeConstraint unconstrained();
  static ShapeConstraint bounded(double a, double b);
  static ShapeConstraint positive() { return bounded(0.0, kInfinity); }
  static ShapeConstraint monotone(Direction direction = Direction::Increasing);
  static ShapeConstraint convex1d();
  static ShapeConstraint isotonic2d(AxisOrder x1, AxisOrder x2);
  static ShapeConstraint convex2d();

  /// Throws ConfigurationError on inconsistent parameters.
  void validate() const;
};

/// Textual form used by the CLI and config files:
///   none | positive | bounded:<a>:<b> | monotone | monotone-decreasing |
///   convex | isotonic | isotonic-x1 | isotonic-x2 | convex2d
/// Bounds accept "inf" / "-inf".
ShapeConstraint parse_constraint(std::string_view text);
std::string to_string(const ShapeConstraint& constraint);

/// The model layout a constraint is encoded on (1-D Bounded uses the value basis).
ModelKind default_model_kind(const ShapeConstraint& constraint, int dim);

/// One row l <= sum_k coeff_k * zeta[index_k] <= u with at most three terms.
struct ConstraintRow {
  std::array<Index, 3> index{0, 0, 0};
  std::array<double, 3> coeff{0.0, 0.0, 0.0};
  int terms = 0;
  double lower = -kInfinity;
  double upper = kInfinity;

  double apply(const Vector& zeta) const {
    double v = 0.0;
    for (int k = 0; k < terms; ++k) v += coeff[k] * zeta[index[k]];
    return v;
  }
  bool operator==(const ConstraintRow&) const = default;
};

/// Polyhedron {zeta : l <= Lambda zeta <= u}. Infinite bounds mark absent sides.
struct LinearInequalitySystem {
  Index dim = 0;
  std::vector<ConstraintRow> rows;
  /// Explicit feasible point, when the producer knows one.
  std::optional<Vector> witness;

  Index row_count() const { return static_cast<Index>(rows.size()); }
  Matrix dense_matrix() const;
  Vector lower_bounds() const;
  Vector upper_bounds() const;
  bool operator==(const LinearInequalitySystem&) const = default;
};

/// Throws ConfigurationError for incompatible kind/model pairings.
LinearInequalitySystem encode(const ShapeConstraint& constraint, const KnotGrid& grid,
                              const ModelKind& kind);

/// 1e-9 * (1 + ||zeta||_inf)
double default_tolerance(const Vector& zeta);

bool is_member(const LinearInequalitySystem& system, const Vector& zeta, double tol);
bool is_member(const LinearInequalitySystem& system, const Vector& zeta);

/// Largest violation max(l - a.zeta, a.zeta - u, 0) over rows.
double max_violation(const LinearInequalitySystem& system, const Vector& zeta);

/// A feasible point close to `zeta`: clipping for bound rows, running maxima
/// for isotonic grids, the system witness otherwise.
Vector feasible_start(const ShapeConstraint& constraint, const KnotGrid& grid, const ModelKind& kind,
                      const LinearInequalitySystem& system, const Vector& zeta);

/// Probes Y^N = Phi^T zeta on `probes` equispaced points per dimension
/// (endpoints included) and checks the functional shape property directly:
/// pointwise bounds, ordered pairs for monotonicity, and three-point
/// midpoint inequalities for convexity (axis-wise in 2-D).
bool check_function_shape(const ModelKind& kind, const KnotGrid& grid, const ShapeConstraint& constraint,
                          const Vector& zeta, int probes);

}  // namespace cgp
