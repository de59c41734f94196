#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "cgp/linalg.hpp"

namespace cgp {

/// Uniform knots t_j = j / N, j = 0..N, in each of `dim` unit directions.
class KnotGrid {
 public:
  KnotGrid(int dim, int subdivisions);

  int dim() const { return dim_; }
  int subdivisions() const { return n_; }
  int knots_per_dim() const { return n_ + 1; }
  double spacing() const { return 1.0 / n_; }
  double knot(int j) const;

 private:
  int dim_;
  int n_;
};

/// Per-dimension affine map [lower_m, upper_m] <-> [0, 1].
class DomainMap {
 public:
  DomainMap(std::vector<double> lower, std::vector<double> upper);
  static DomainMap unit(int dim);

  std::size_t dim() const { return lower_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  double width(std::size_t m) const { return upper_[m] - lower_[m]; }

  /// Throws ArgumentError for points outside the box (beyond rounding).
  std::vector<double> to_unit(std::span<const double> x) const;
  std::vector<double> from_unit(std::span<const double> u) const;
  bool contains(std::span<const double> x) const;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// Coefficient layout of a finite-dimensional model.
///   ValueBasis             values at the (N+1)^d knots, row-major, x1 index slowest
///   MonotoneDerivBasis1D   (gamma, zeta_0..zeta_N): Y(0) and Y' at the knots
///   ConvexSecondDerivBasis1D (gamma, kappa, zeta_0..zeta_N): Y(0), Y'(0), Y'' at the knots
struct ModelKind {
  enum class Basis { Value, MonotoneDeriv1D, ConvexSecondDeriv1D };
  Basis basis = Basis::Value;
  int dim = 1;

  static ModelKind value(int d) { return {Basis::Value, d}; }
  static ModelKind monotone() { return {Basis::MonotoneDeriv1D, 1}; }
  static ModelKind convex() { return {Basis::ConvexSecondDeriv1D, 1}; }

  /// Offset of the first knot coefficient (0, 1 or 2).
  int knot_offset() const;
  bool operator==(const ModelKind&) const = default;
};

std::string_view to_string(const ModelKind& kind);
Index coefficient_count(const ModelKind& kind, const KnotGrid& grid);

/// Hat function phi_j(x) = phi((x - t_j) N), phi(u) = max(0, 1 - |u|).
double hat(const KnotGrid& grid, int j, double x);
/// I_j(x) = int_0^x phi_j.
double hat_primitive(const KnotGrid& grid, int j, double x);
/// int_0^x I_j.
double hat_second_primitive(const KnotGrid& grid, int j, double x);

/// Basis row Phi(x) for the layout of `kind`; x in [0,1]^d.
Vector design_row(const KnotGrid& grid, const ModelKind& kind, std::span<const double> x);
Vector design_row(const KnotGrid& grid, const ModelKind& kind, double x);

/// Phi(x)^T coefficients, with a sparse path for the value basis.
double evaluate(const KnotGrid& grid, const ModelKind& kind, const Vector& coefficients,
                std::span<const double> x);
double evaluate(const KnotGrid& grid, const ModelKind& kind, const Vector& coefficients, double x);

}  // namespace cgp
