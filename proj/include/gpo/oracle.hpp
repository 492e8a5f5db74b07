#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gpo/problem.hpp"

namespace gpo {

struct GridOptions {
  int points_per_axis = 201;
  /// Inequalities g_i >= -feas_tol count as satisfied.
  double feas_tol = 1e-9;
  /// Equalities |h_j| <= eq_tol count as satisfied.
  double eq_tol = 1e-3;
  /// Refuse grids with more points than this.
  double max_points = 1e8;
};

struct GridResult {
  /// False when no grid point is feasible; point and value are then unset.
  bool found = false;
  std::vector<double> point;
  double value = 0.0;
  int points_per_axis = 0;
  std::uint64_t feasible_count = 0;
  std::uint64_t total_points = 0;
};

/// Exhaustive scan of a uniform grid that includes the box corners. Ties keep
/// the first point in lexicographic index order (first variable slowest).
GridResult grid_minimize(const NormalizedProblem& problem, const HyperRectangle& box,
                         const GridOptions& options = {});

struct ConstraintCheck {
  std::string label;
  double value = 0.0;
  /// Amount by which the constraint is violated (0 when satisfied exactly).
  double violation = 0.0;
  bool ok = true;
};

struct PointReport {
  double objective = 0.0;
  std::vector<ConstraintCheck> inequalities;
  std::vector<ConstraintCheck> equalities;
  /// w_j(x) for a declared box; empty otherwise.
  std::vector<ConstraintCheck> box;
  double ineq_violation_sum = 0.0;
  double eq_violation_sum = 0.0;
  bool pass = true;
};

/// Evaluates f and every constraint at x; flags g_i < -delta, |h_j| > delta
/// and w_j < -delta.
PointReport check_point(const GpoProblem& problem, std::span<const double> x, double delta);

}  // namespace gpo
