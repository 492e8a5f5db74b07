#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace gpo::sdp {

/// One upper-triangular entry (row <= col) of a symmetric block matrix. An
/// off-diagonal entry stands for both (row, col) and (col, row).
struct Entry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// <A, X> + sum_j a_j u_j = rhs, with A symmetric and block diagonal.
struct Constraint {
  std::vector<Entry> entries;
  std::vector<std::pair<int, double>> free_coefficients;
  double rhs = 0.0;
};

/// Primal standard form over PSD blocks X_b and free scalars u:
///
///   minimize   <C, X> + c_f' u
///   subject to <A_i, X> + f_i' u = b_i,  X_b PSD.
///
/// Its dual is   maximize b'y  s.t.  C - sum_i y_i A_i = S PSD,  F'y = c_f.
struct Problem {
  std::vector<int> block_dims;
  int free_vars = 0;
  std::vector<Entry> objective;
  std::vector<double> free_objective;
  std::vector<Constraint> constraints;

  /// Throws InvalidInput on out-of-range indices or a size mismatch.
  void validate() const;
};

enum class Status {
  Optimal,
  PrimalInfeasible,
  DualInfeasibleOrUnbounded,
  NumericalFailure,
  IterationLimit,
};

std::string to_string(Status s);

struct Options {
  double gap_tol = 1e-8;
  double psd_tol = 1e-9;
  int max_iter = 200;
  /// Relative primal/dual equality residual accepted at optimality.
  double feas_tol = 1e-8;
  /// Relative residual of an improving ray accepted as an infeasibility proof.
  double infeas_tol = 1e-8;
  /// Print one line per iteration to standard error.
  bool verbose = false;
};

struct Solution {
  Status status = Status::NumericalFailure;
  int iterations = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  /// |primal - dual| on the returned iterate.
  double gap = 0.0;
  /// ||A(X) + F u - b|| / (1 + ||b||) on the returned primal point.
  double primal_residual = 0.0;
  /// ||C - A'(y) - S|| + ||c_f - F'y||, relative to 1 + ||c||.
  double dual_residual = 0.0;
  /// Residual of the improving ray when status is an infeasibility.
  double certificate_residual = 0.0;
  double min_primal_eigenvalue = 0.0;

  /// Optimal: primal point. DualInfeasibleOrUnbounded: normalized primal ray.
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<double> free_values;
  /// Optimal: dual multipliers y. PrimalInfeasible: normalized dual ray.
  std::vector<double> multipliers;
  std::vector<Eigen::MatrixXd> dual_slacks;
  std::string message;
};

/// Homogeneous self-dual interior-point method with Nesterov-Todd scaling
/// and a Mehrotra predictor-corrector. Deterministic and reentrant.
Solution solve(const Problem& problem, const Options& options = {});

/// Writes the problem in SDPA sparse format. Our primal is SDPA's dual:
/// F_i = A_i, c_i = b_i, F_0 = -C. Free scalars become split LP pairs.
void write_sdpa(std::ostream& os, const Problem& problem);

}  // namespace gpo::sdp
