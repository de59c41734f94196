#include "cgp/basis.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cgp/error.hpp"

namespace cgp {

namespace {

constexpr double kDomainSlack = 1e-12;

// Antiderivatives of the reference hat phi(u) = max(0, 1 - |u|):
// once and twice integrated from -infinity.
double hat_cdf(double u) {
  if (u <= -1.0) return 0.0;
  if (u <= 0.0) return 0.5 * (1.0 + u) * (1.0 + u);
  if (u <= 1.0) return 1.0 - 0.5 * (1.0 - u) * (1.0 - u);
  return 1.0;
}

double hat_cdf2(double u) {
  if (u <= -1.0) return 0.0;
  if (u <= 0.0) return (1.0 + u) * (1.0 + u) * (1.0 + u) / 6.0;
  if (u <= 1.0) return u + (1.0 - u) * (1.0 - u) * (1.0 - u) / 6.0;
  return u;
}

void check_index(const KnotGrid& grid, int j) {
  if (j < 0 || j > grid.subdivisions()) {
    std::ostringstream msg;
    msg << "knot index " << j << " outside 0.." << grid.subdivisions();
    throw ArgumentError(msg.str());
  }
}

// Cell k and local coordinate s with x = (k + s) / N, snapping x N to an
// integer when it is within rounding of one so knots give exact indicators.
void locate(const KnotGrid& grid, double x, int& cell, double& local) {
  const int n = grid.subdivisions();
  double v = x * n;
  const double r = std::round(v);
  if (std::abs(v - r) <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(v))) v = r;
  int k = static_cast<int>(std::floor(v));
  if (k >= n) k = n - 1;
  if (k < 0) k = 0;
  cell = k;
  local = v - k;
}

double unit_coordinate(double x) {
  if (!(x >= -kDomainSlack && x <= 1.0 + kDomainSlack)) {
    std::ostringstream msg;
    msg << "point " << x << " outside the unit domain";
    throw ArgumentError(msg.str());
  }
  return std::min(1.0, std::max(0.0, x));
}

}  // namespace

KnotGrid::KnotGrid(int dim, int subdivisions) : dim_(dim), n_(subdivisions) {
  if (dim < 1) throw ArgumentError("KnotGrid: dimension must be >= 1");
  if (subdivisions < 1) throw ArgumentError("KnotGrid: subdivisions must be >= 1");
}

double KnotGrid::knot(int j) const {
  check_index(*this, j);
  return static_cast<double>(j) / n_;
}

DomainMap::DomainMap(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.empty())
    throw ArgumentError("DomainMap: bounds must be nonempty and of equal length");
  for (std::size_t m = 0; m < lower_.size(); ++m) {
    if (!std::isfinite(lower_[m]) || !std::isfinite(upper_[m]) || !(upper_[m] > lower_[m]))
      throw ArgumentError("DomainMap: require finite lower < upper in every dimension");
  }
}

DomainMap DomainMap::unit(int dim) {
  return DomainMap(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
}

bool DomainMap::contains(std::span<const double> x) const {
  if (x.size() != dim()) return false;
  for (std::size_t m = 0; m < x.size(); ++m) {
    const double u = (x[m] - lower_[m]) / width(m);
    if (!(u >= -kDomainSlack && u <= 1.0 + kDomainSlack)) return false;
  }
  return true;
}

std::vector<double> DomainMap::to_unit(std::span<const double> x) const {
  if (x.size() != dim()) throw ArgumentError("DomainMap::to_unit: dimension mismatch");
  std::vector<double> u(x.size());
  for (std::size_t m = 0; m < x.size(); ++m) {
    const double v = (x[m] - lower_[m]) / width(m);
    if (!(v >= -kDomainSlack && v <= 1.0 + kDomainSlack)) {
      std::ostringstream msg;
      msg << "input " << x[m] << " outside domain [" << lower_[m] << ", " << upper_[m] << "]";
      throw ArgumentError(msg.str());
    }
    u[m] = std::min(1.0, std::max(0.0, v));
  }
  return u;
}

std::vector<double> DomainMap::from_unit(std::span<const double> u) const {
  if (u.size() != dim()) throw ArgumentError("DomainMap::from_unit: dimension mismatch");
  std::vector<double> x(u.size());
  for (std::size_t m = 0; m < u.size(); ++m) x[m] = lower_[m] + u[m] * width(m);
  return x;
}

int ModelKind::knot_offset() const {
  switch (basis) {
    case Basis::Value: return 0;
    case Basis::MonotoneDeriv1D: return 1;
    case Basis::ConvexSecondDeriv1D: return 2;
  }
  return 0;
}

std::string_view to_string(const ModelKind& kind) {
  switch (kind.basis) {
    case ModelKind::Basis::Value: return kind.dim == 1 ? "value-1d" : "value-2d";
    case ModelKind::Basis::MonotoneDeriv1D: return "monotone-deriv-1d";
    case ModelKind::Basis::ConvexSecondDeriv1D: return "convex-second-deriv-1d";
  }
  return "unknown";
}

Index coefficient_count(const ModelKind& kind, const KnotGrid& grid) {
  if (kind.dim != grid.dim()) throw ArgumentError("model kind and grid dimensions differ");
  const Index k = grid.knots_per_dim();
  switch (kind.basis) {
    case ModelKind::Basis::Value: {
      Index total = 1;
      for (int m = 0; m < kind.dim; ++m) total *= k;
      return total;
    }
    case ModelKind::Basis::MonotoneDeriv1D: return k + 1;
    case ModelKind::Basis::ConvexSecondDeriv1D: return k + 2;
  }
  return 0;
}

double hat(const KnotGrid& grid, int j, double x) {
  check_index(grid, j);
  if (x < 0.0 || x > 1.0) {
    const double u = (x - grid.knot(j)) * grid.subdivisions();
    return std::max(0.0, 1.0 - std::abs(u));
  }
  int cell = 0;
  double s = 0.0;
  locate(grid, x, cell, s);
  if (j == cell) return 1.0 - s;
  if (j == cell + 1) return s;
  return 0.0;
}

double hat_primitive(const KnotGrid& grid, int j, double x) {
  check_index(grid, j);
  const double delta = grid.spacing();
  const double u = x * grid.subdivisions() - j;
  const double u0 = -static_cast<double>(j);
  return delta * (hat_cdf(u) - hat_cdf(u0));
}

double hat_second_primitive(const KnotGrid& grid, int j, double x) {
  check_index(grid, j);
  const double delta = grid.spacing();
  const double u = x * grid.subdivisions() - j;
  const double u0 = -static_cast<double>(j);
  return delta * (delta * (hat_cdf2(u) - hat_cdf2(u0)) - hat_cdf(u0) * x);
}

Vector design_row(const KnotGrid& grid, const ModelKind& kind, std::span<const double> x) {
  if (static_cast<int>(x.size()) != kind.dim || kind.dim != grid.dim())
    throw ArgumentError("design_row: dimension mismatch");
  const int n = grid.subdivisions();
  const int k = grid.knots_per_dim();
  Vector row = Vector::Zero(coefficient_count(kind, grid));
  switch (kind.basis) {
    case ModelKind::Basis::Value: {
      if (kind.dim == 1) {
        int cell = 0;
        double s = 0.0;
        locate(grid, unit_coordinate(x[0]), cell, s);
        row[cell] = 1.0 - s;
        row[cell + 1] += s;
      } else if (kind.dim == 2) {
        int c1 = 0, c2 = 0;
        double s1 = 0.0, s2 = 0.0;
        locate(grid, unit_coordinate(x[0]), c1, s1);
        locate(grid, unit_coordinate(x[1]), c2, s2);
        row[c1 * k + c2] += (1.0 - s1) * (1.0 - s2);
        row[c1 * k + c2 + 1] += (1.0 - s1) * s2;
        row[(c1 + 1) * k + c2] += s1 * (1.0 - s2);
        row[(c1 + 1) * k + c2 + 1] += s1 * s2;
      } else {
        throw ArgumentError("design_row: value basis supports d <= 2");
      }
      break;
    }
    case ModelKind::Basis::MonotoneDeriv1D: {
      const double u = unit_coordinate(x[0]);
      row[0] = 1.0;
      for (int j = 0; j <= n; ++j) row[1 + j] = hat_primitive(grid, j, u);
      break;
    }
    case ModelKind::Basis::ConvexSecondDeriv1D: {
      const double u = unit_coordinate(x[0]);
      row[0] = 1.0;
      row[1] = u;
      for (int j = 0; j <= n; ++j) row[2 + j] = hat_second_primitive(grid, j, u);
      break;
    }
  }
  return row;
}

Vector design_row(const KnotGrid& grid, const ModelKind& kind, double x) {
  return design_row(grid, kind, std::span<const double>(&x, 1));
}

double evaluate(const KnotGrid& grid, const ModelKind& kind, const Vector& coefficients,
                std::span<const double> x) {
  if (coefficients.size() != coefficient_count(kind, grid))
    throw ArgumentError("evaluate: coefficient length mismatch");
  if (kind.basis == ModelKind::Basis::Value && static_cast<int>(x.size()) == kind.dim) {
    const int k = grid.knots_per_dim();
    if (kind.dim == 1) {
      int cell = 0;
      double s = 0.0;
      locate(grid, unit_coordinate(x[0]), cell, s);
      return (1.0 - s) * coefficients[cell] + s * coefficients[cell + 1];
    }
    if (kind.dim == 2) {
      int c1 = 0, c2 = 0;
      double s1 = 0.0, s2 = 0.0;
      locate(grid, unit_coordinate(x[0]), c1, s1);
      locate(grid, unit_coordinate(x[1]), c2, s2);
      return (1.0 - s1) * ((1.0 - s2) * coefficients[c1 * k + c2] + s2 * coefficients[c1 * k + c2 + 1]) +
             s1 * ((1.0 - s2) * coefficients[(c1 + 1) * k + c2] + s2 * coefficients[(c1 + 1) * k + c2 + 1]);
    }
  }
  return design_row(grid, kind, x).dot(coefficients);
}

double evaluate(const KnotGrid& grid, const ModelKind& kind, const Vector& coefficients, double x) {
  return evaluate(grid, kind, coefficients, std::span<const double>(&x, 1));
}

}  // namespace cgp
