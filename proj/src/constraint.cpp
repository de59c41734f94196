#include "cgp/constraint.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "cgp/error.hpp"

namespace cgp {

namespace {

ConstraintRow bound_row(Index i, double lower, double upper) {
  ConstraintRow row;
  row.index[0] = i;
  row.coeff[0] = 1.0;
  row.terms = 1;
  row.lower = lower;
  row.upper = upper;
  return row;
}

// lower <= zeta[hi] - zeta[lo] <= upper
ConstraintRow difference_row(Index lo, Index hi, double lower, double upper) {
  ConstraintRow row;
  row.index = {lo, hi, 0};
  row.coeff = {-1.0, 1.0, 0.0};
  row.terms = 2;
  row.lower = lower;
  row.upper = upper;
  return row;
}

// zeta[prev] - 2 zeta[mid] + zeta[next] >= 0
ConstraintRow second_difference_row(Index prev, Index mid, Index next) {
  ConstraintRow row;
  row.index = {prev, mid, next};
  row.coeff = {1.0, -2.0, 1.0};
  row.terms = 3;
  row.lower = 0.0;
  row.upper = kInfinity;
  return row;
}

[[noreturn]] void incompatible(const ShapeConstraint& c, const ModelKind& kind) {
  throw ConfigurationError("constraint '" + to_string(c) + "' cannot be encoded on model '" +
                           std::string(to_string(kind)) + "'");
}

double parse_bound(const std::string& s) {
  if (s == "inf" || s == "+inf") return kInfinity;
  if (s == "-inf") return -kInfinity;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ConfigurationError("bad bound '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigurationError("bad bound '" + s + "'");
  }
}

std::vector<double> probe_points(int probes) {
  std::vector<double> p(probes);
  for (int k = 0; k < probes; ++k) p[k] = static_cast<double>(k) / (probes - 1);
  p.back() = 1.0;
  return p;
}

double sign_of(AxisOrder order) { return order == AxisOrder::Decreasing ? -1.0 : 1.0; }

}  // namespace

ShapeConstraint ShapeConstraint::unconstrained() { return {}; }

ShapeConstraint ShapeConstraint::bounded(double a, double b) {
  ShapeConstraint c;
  c.kind = Kind::Bounded;
  c.lower = a;
  c.upper = b;
  c.validate();
  return c;
}

ShapeConstraint ShapeConstraint::monotone(Direction direction) {
  ShapeConstraint c;
  c.kind = Kind::Monotone1D;
  c.direction = direction;
  return c;
}

ShapeConstraint ShapeConstraint::convex1d() {
  ShapeConstraint c;
  c.kind = Kind::Convex1D;
  return c;
}

ShapeConstraint ShapeConstraint::isotonic2d(AxisOrder x1, AxisOrder x2) {
  ShapeConstraint c;
  c.kind = Kind::Isotonic2D;
  c.axes = {x1, x2};
  c.validate();
  return c;
}

ShapeConstraint ShapeConstraint::convex2d() {
  ShapeConstraint c;
  c.kind = Kind::Convex2D;
  return c;
}

void ShapeConstraint::validate() const {
  if (kind == Kind::Bounded) {
    if (std::isnan(lower) || std::isnan(upper)) throw ConfigurationError("bounded: NaN bound");
    if (!std::isfinite(lower) && !std::isfinite(upper))
      throw ConfigurationError("bounded: at least one bound must be finite");
    if (!(lower < upper)) throw ConfigurationError("bounded: require a < b");
    if (lower == kInfinity || upper == -kInfinity) throw ConfigurationError("bounded: empty interval");
  }
  if (kind == Kind::Isotonic2D && axes[0] == AxisOrder::None && axes[1] == AxisOrder::None)
    throw ConfigurationError("isotonic: at least one input must be ordered");
}

ShapeConstraint parse_constraint(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "none" || s == "unconstrained") return ShapeConstraint::unconstrained();
  if (s == "positive" || s == "positivity") return ShapeConstraint::positive();
  if (s == "monotone" || s == "monotone-increasing" || s == "increasing") return ShapeConstraint::monotone();
  if (s == "monotone-decreasing" || s == "decreasing")
    return ShapeConstraint::monotone(Direction::Decreasing);
  if (s == "convex" || s == "convex1d") return ShapeConstraint::convex1d();
  if (s == "convex2d") return ShapeConstraint::convex2d();
  if (s == "isotonic" || s == "isotonic2d")
    return ShapeConstraint::isotonic2d(AxisOrder::Increasing, AxisOrder::Increasing);
  if (s == "isotonic-x1") return ShapeConstraint::isotonic2d(AxisOrder::Increasing, AxisOrder::None);
  if (s == "isotonic-x2") return ShapeConstraint::isotonic2d(AxisOrder::None, AxisOrder::Increasing);
  if (s.rfind("bounded:", 0) == 0) {
    const std::string rest = s.substr(8);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw ConfigurationError("bounded constraint needs bounded:<a>:<b>");
    return ShapeConstraint::bounded(parse_bound(rest.substr(0, colon)), parse_bound(rest.substr(colon + 1)));
  }
  throw ConfigurationError("unknown constraint '" + std::string(text) + "'");
}

std::string to_string(const ShapeConstraint& c) {
  std::ostringstream out;
  switch (c.kind) {
    case ShapeConstraint::Kind::Unconstrained: return "none";
    case ShapeConstraint::Kind::Bounded: out << "bounded:" << c.lower << ":" << c.upper; return out.str();
    case ShapeConstraint::Kind::Monotone1D:
      return c.direction == Direction::Increasing ? "monotone" : "monotone-decreasing";
    case ShapeConstraint::Kind::Convex1D: return "convex";
    case ShapeConstraint::Kind::Isotonic2D:
      if (c.axes[0] != AxisOrder::None && c.axes[1] != AxisOrder::None) return "isotonic";
      return c.axes[0] != AxisOrder::None ? "isotonic-x1" : "isotonic-x2";
    case ShapeConstraint::Kind::Convex2D: return "convex2d";
  }
  return "unknown";
}

ModelKind default_model_kind(const ShapeConstraint& constraint, int dim) {
  switch (constraint.kind) {
    case ShapeConstraint::Kind::Monotone1D: return ModelKind::monotone();
    case ShapeConstraint::Kind::Convex1D: return ModelKind::convex();
    case ShapeConstraint::Kind::Isotonic2D:
    case ShapeConstraint::Kind::Convex2D: return ModelKind::value(2);
    case ShapeConstraint::Kind::Unconstrained:
    case ShapeConstraint::Kind::Bounded: return ModelKind::value(dim);
  }
  return ModelKind::value(dim);
}

Matrix LinearInequalitySystem::dense_matrix() const {
  Matrix m = Matrix::Zero(row_count(), dim);
  for (Index r = 0; r < row_count(); ++r) {
    const auto& row = rows[r];
    for (int k = 0; k < row.terms; ++k) m(r, row.index[k]) += row.coeff[k];
  }
  return m;
}

Vector LinearInequalitySystem::lower_bounds() const {
  Vector v(row_count());
  for (Index r = 0; r < row_count(); ++r) v[r] = rows[r].lower;
  return v;
}

Vector LinearInequalitySystem::upper_bounds() const {
  Vector v(row_count());
  for (Index r = 0; r < row_count(); ++r) v[r] = rows[r].upper;
  return v;
}

LinearInequalitySystem encode(const ShapeConstraint& constraint, const KnotGrid& grid,
                              const ModelKind& kind) {
  constraint.validate();
  LinearInequalitySystem system;
  system.dim = coefficient_count(kind, grid);
  Vector witness = Vector::Zero(system.dim);
  const int n = grid.subdivisions();
  const Index k = grid.knots_per_dim();
  using Kind = ShapeConstraint::Kind;

  switch (constraint.kind) {
    case Kind::Unconstrained: break;

    case Kind::Bounded: {
      if (kind.basis != ModelKind::Basis::Value) incompatible(constraint, kind);
      double inside = 0.0;
      if (std::isfinite(constraint.lower) && constraint.lower > 0.0) inside = constraint.lower;
      if (std::isfinite(constraint.upper) && constraint.upper < 0.0) inside = constraint.upper;
      for (Index i = 0; i < system.dim; ++i) system.rows.push_back(bound_row(i, constraint.lower, constraint.upper));
      witness.setConstant(inside);
      break;
    }

    case Kind::Monotone1D: {
      if (kind.basis != ModelKind::Basis::MonotoneDeriv1D) incompatible(constraint, kind);
      const bool up = constraint.direction == Direction::Increasing;
      for (int j = 0; j <= n; ++j)
        system.rows.push_back(bound_row(1 + j, up ? 0.0 : -kInfinity, up ? kInfinity : 0.0));
      break;
    }

    case Kind::Convex1D: {
      if (kind.basis != ModelKind::Basis::ConvexSecondDeriv1D) incompatible(constraint, kind);
      for (int j = 0; j <= n; ++j) system.rows.push_back(bound_row(2 + j, 0.0, kInfinity));
      break;
    }

    case Kind::Isotonic2D: {
      if (kind.basis != ModelKind::Basis::Value || kind.dim != 2) incompatible(constraint, kind);
      // zeta_{i-1,j} <= zeta_{i,j} and zeta_{i,j-1} <= zeta_{i,j} over the
      // whole grid, boundary lines included; reversed for decreasing axes.
      for (Index i = 0; i <= n; ++i) {
        for (Index j = 0; j <= n; ++j) {
          if (i >= 1 && constraint.axes[0] != AxisOrder::None) {
            const bool up = constraint.axes[0] == AxisOrder::Increasing;
            system.rows.push_back(difference_row((i - 1) * k + j, i * k + j, up ? 0.0 : -kInfinity,
                                                 up ? kInfinity : 0.0));
          }
          if (j >= 1 && constraint.axes[1] != AxisOrder::None) {
            const bool up = constraint.axes[1] == AxisOrder::Increasing;
            system.rows.push_back(difference_row(i * k + j - 1, i * k + j, up ? 0.0 : -kInfinity,
                                                 up ? kInfinity : 0.0));
          }
        }
      }
      break;
    }

    case Kind::Convex2D: {
      if (kind.basis != ModelKind::Basis::Value || kind.dim != 2) incompatible(constraint, kind);
      // Second differences along x1 on every grid line j = 0..N, then along x2
      // on every line i = 0..N (uniform spacing cancels the slope denominators).
      for (Index j = 0; j <= n; ++j)
        for (Index i = 1; i < n; ++i)
          system.rows.push_back(second_difference_row((i - 1) * k + j, i * k + j, (i + 1) * k + j));
      for (Index i = 0; i <= n; ++i)
        for (Index j = 1; j < n; ++j)
          system.rows.push_back(second_difference_row(i * k + j - 1, i * k + j, i * k + j + 1));
      break;
    }
  }
  system.witness = witness;
  return system;
}

double default_tolerance(const Vector& zeta) {
  const double scale = zeta.size() > 0 ? zeta.cwiseAbs().maxCoeff() : 0.0;
  return 1e-9 * (1.0 + scale);
}

bool is_member(const LinearInequalitySystem& system, const Vector& zeta, double tol) {
  if (zeta.size() != system.dim) throw ArgumentError("is_member: coefficient length mismatch");
  for (const auto& row : system.rows) {
    const double v = row.apply(zeta);
    if (!(v >= row.lower - tol) || !(v <= row.upper + tol)) return false;
  }
  return true;
}

bool is_member(const LinearInequalitySystem& system, const Vector& zeta) {
  return is_member(system, zeta, default_tolerance(zeta));
}

double max_violation(const LinearInequalitySystem& system, const Vector& zeta) {
  if (zeta.size() != system.dim) throw ArgumentError("max_violation: coefficient length mismatch");
  double worst = 0.0;
  for (const auto& row : system.rows) {
    const double v = row.apply(zeta);
    worst = std::max({worst, row.lower - v, v - row.upper});
  }
  return worst;
}

Vector feasible_start(const ShapeConstraint& constraint, const KnotGrid& grid, const ModelKind& kind,
                      const LinearInequalitySystem& system, const Vector& zeta) {
  if (zeta.size() != system.dim) throw ArgumentError("feasible_start: coefficient length mismatch");
  Vector x = zeta;
  using Kind = ShapeConstraint::Kind;
  switch (constraint.kind) {
    case Kind::Unconstrained: return x;
    case Kind::Bounded:
    case Kind::Monotone1D:
    case Kind::Convex1D:
      for (const auto& row : system.rows) {
        const Index i = row.index[0];
        x[i] = std::min(row.upper, std::max(row.lower, x[i]));
      }
      return x;
    case Kind::Isotonic2D: {
      const int k = grid.knots_per_dim();
      // Running maxima in coordinates where every ordered axis increases.
      auto at = [&](int i, int j) -> double& {
        const int ii = constraint.axes[0] == AxisOrder::Decreasing ? k - 1 - i : i;
        const int jj = constraint.axes[1] == AxisOrder::Decreasing ? k - 1 - j : j;
        return x[ii * k + jj];
      };
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
          double v = at(i, j);
          if (i > 0 && constraint.axes[0] != AxisOrder::None) v = std::max(v, at(i - 1, j));
          if (j > 0 && constraint.axes[1] != AxisOrder::None) v = std::max(v, at(i, j - 1));
          at(i, j) = v;
        }
      }
      (void)kind;
      return x;
    }
    case Kind::Convex2D: break;
  }
  if (system.witness) return *system.witness;
  return Vector::Zero(system.dim);
}

bool check_function_shape(const ModelKind& kind, const KnotGrid& grid, const ShapeConstraint& constraint,
                          const Vector& zeta, int probes) {
  if (probes < 2) throw ArgumentError("check_function_shape: need at least 2 probes per dimension");
  using Kind = ShapeConstraint::Kind;
  if (constraint.kind == Kind::Unconstrained) return true;
  const std::vector<double> p = probe_points(probes);
  const int d = kind.dim;
  const int P = probes;

  // Probe values, row-major over (x1, x2) in 2-D.
  std::vector<double> y(d == 1 ? P : static_cast<std::size_t>(P) * P);
  if (d == 1) {
    for (int a = 0; a < P; ++a) y[a] = evaluate(grid, kind, zeta, p[a]);
  } else {
    for (int a = 0; a < P; ++a)
      for (int b = 0; b < P; ++b) {
        const double pt[2] = {p[a], p[b]};
        y[static_cast<std::size_t>(a) * P + b] = evaluate(grid, kind, zeta, pt);
      }
  }
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  const double tol = 1e-9 * (1.0 + scale);
  auto at = [&](int a, int b) { return y[static_cast<std::size_t>(a) * P + b]; };

  switch (constraint.kind) {
    case Kind::Unconstrained: return true;
    case Kind::Bounded:
      for (double v : y)
        if (v < constraint.lower - tol || v > constraint.upper + tol) return false;
      return true;
    case Kind::Monotone1D: {
      const double s = constraint.direction == Direction::Increasing ? 1.0 : -1.0;
      for (int a = 1; a < P; ++a)
        if (s * (y[a] - y[a - 1]) < -tol) return false;
      return true;
    }
    case Kind::Convex1D:
      for (int a = 1; a + 1 < P; ++a)
        if (y[a - 1] + y[a + 1] - 2.0 * y[a] < -tol) return false;
      return true;
    case Kind::Isotonic2D: {
      if (d != 2) throw ArgumentError("check_function_shape: isotonic needs a 2-D model");
      for (int a = 0; a < P; ++a)
        for (int b = 0; b < P; ++b) {
          if (a > 0 && constraint.axes[0] != AxisOrder::None &&
              sign_of(constraint.axes[0]) * (at(a, b) - at(a - 1, b)) < -tol)
            return false;
          if (b > 0 && constraint.axes[1] != AxisOrder::None &&
              sign_of(constraint.axes[1]) * (at(a, b) - at(a, b - 1)) < -tol)
            return false;
        }
      return true;
    }
    case Kind::Convex2D: {
      if (d != 2) throw ArgumentError("check_function_shape: convex2d needs a 2-D model");
      for (int a = 0; a < P; ++a)
        for (int b = 0; b < P; ++b) {
          if (a > 0 && a + 1 < P && at(a - 1, b) + at(a + 1, b) - 2.0 * at(a, b) < -tol) return false;
          if (b > 0 && b + 1 < P && at(a, b - 1) + at(a, b + 1) - 2.0 * at(a, b) < -tol) return false;
        }
      return true;
    }
  }
  return true;
}

}  // namespace cgp
