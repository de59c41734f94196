#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cgp/basis.hpp"
#include "cgp/constraint.hpp"
#include "cgp/gpmodel.hpp"
#include "cgp/linalg.hpp"

namespace cgp {

/// minimize 1/2 (x - center)^T covariance^{-1} (x - center)  s.t.  x in system.
///
/// The quadratic form is given through its inverse (the Gaussian covariance),
/// so the mode of a truncated N(center, covariance) is found without ever
/// inverting the covariance.
struct QpProblem {
  SymmetricMatrix covariance;
  Vector center;
  LinearInequalitySystem system;
};

enum class BoundSide { Lower, Upper };

struct ActiveConstraint {
  Index row = 0;
  BoundSide side = BoundSide::Lower;
  bool operator==(const ActiveConstraint&) const = default;
};

struct QpOptions {
  /// Feasible starting point; defaults to the system witness.
  std::optional<Vector> start;
  /// 0 selects 50 * (rows + dims).
  long max_iterations = 0;
  bool record_objective = false;
  JitterPolicy jitter{};
};

struct QpSolution {
  Vector mu;
  std::vector<ActiveConstraint> active;
  /// One entry per system row: covariance^{-1} (mu - center) = Lambda^T multipliers,
  /// nonnegative on active lower rows, nonpositive on active upper rows, zero elsewhere.
  Vector multipliers;
  long iterations = 0;
  /// max of primal violation, multiplier sign violation and stationarity
  /// residual, each scaled by 1 + ||center||_inf.
  double kkt_residual = 0.0;
  /// Diagonal jitter added to the covariance before solving.
  double jitter = 0.0;
  /// Objective after each iteration (only with record_objective).
  std::vector<double> objective_trace;
};

QpSolution solve_qp(const QpProblem& problem, const QpOptions& options = {});

/// Mode of N(zeta_I, Gamma_cond) truncated to the system.
QpSolution solve_map(const CoefficientPosterior& posterior, const LinearInequalitySystem& system,
                     const QpOptions& options = {});

/// M^N(x) = Phi(x)^T mu.
double map_curve(const QpSolution& solution, const ModelKind& kind, const KnotGrid& grid,
                 std::span<const double> x);
double map_curve(const QpSolution& solution, const ModelKind& kind, const KnotGrid& grid, double x);

}  // namespace cgp
