#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gpo/problem.hpp"
#include "gpo/relaxation.hpp"

namespace gpo {

struct Branch {
  int id = 0;
  HyperRectangle box;
  /// Lower bound on f over S within the box; +inf once pruned.
  double lambda = 0.0;
  int parent = -1;
  int depth = 0;
  /// Sum of log edge lengths, tracked as parent - ln 2 so siblings tie exactly.
  double log_volume = 0.0;
};

/// What the driver does with a child whose bound evaluation failed.
enum class FailurePolicy {
  Prune,          // lambda = +inf
  InheritParent,  // keep the parent's bound
};

struct BnBConfig {
  int k = 2;
  double eta = 0.01;
  int loops = 1;
  HyperRectangle initial_box;
  GlbOptions glb;
  FailurePolicy on_failure = FailurePolicy::Prune;
};

struct TraceRow {
  int m = 0;
  int branch_id = 0;
  /// Bound of the selected branch.
  double lambda_m = 0.0;
  /// min_j lambda(j) over the branch list after the iteration.
  double lambda_star = 0.0;
  double longest_edge = 0.0;
  double volume = 0.0;
  std::vector<double> center;
  double f_center = 0.0;
  double ineq_violation_sum = 0.0;
  double eq_violation_sum = 0.0;
  double gap = 0.0;
};

struct BnbResult {
  std::vector<double> x;
  std::vector<TraceRow> trace;
  double lambda_star = 0.0;
  int solver_failures = 0;
  std::vector<Branch> branches;
  std::vector<std::string> warnings;
};

/// Halves the box across its longest edge (ties: smallest index).
std::pair<HyperRectangle, HyperRectangle> bisect(const HyperRectangle& box);

/// Index into `branches` of the smallest-volume branch whose bound is within
/// m * eta / (1 + l) of the smallest bound. Throws GlobalInfeasibility if every
/// bound is +inf.
std::size_t select_branch(std::span<const Branch> branches, int m, double eta, int l);

/// Bound evaluator used by the drivers; defaults to glb_bound.
using BoxBound = std::function<GlbResult(const HyperRectangle&)>;

/// Algorithm E_k: exactly cfg.loops iterations of select, bisect, re-bound.
BnbResult run_modified_bnb(const NormalizedProblem& problem, const BnBConfig& cfg);
BnbResult run_modified_bnb(const NormalizedProblem& problem, const BnBConfig& cfg,
                           const BoxBound& bound);

/// Scalar lower-bound oracle for the ideal algorithm.
using ScalarBound = std::function<double(const HyperRectangle&)>;

/// Keeps the half with the smaller bound at every step (ties keep the lower half).
HyperRectangle run_ideal_bnb(const HyperRectangle& initial, int iterations,
                             const ScalarBound& bound);

/// delta = L * eps with L a bound on |grad h| over the box for h in {f, g_i}.
double lipschitz_tolerance(const NormalizedProblem& problem, const HyperRectangle& box,
                           double eps);

/// Smallest integer l > n log2(L sqrt(n) / eta), L the longest initial edge.
int recommended_loops(std::size_t nvars, double longest_edge, double eta);

/// Writes the trace as CSV with a fixed header and 17 significant digits.
void write_trace_csv(std::ostream& os, std::span<const TraceRow> trace, std::size_t nvars);

}  // namespace gpo
