#include "gpo/oracle.hpp"

#include <cmath>
#include <sstream>

#include "gpo/errors.hpp"
#include "gpo/relaxation.hpp"

namespace gpo {

GridResult grid_minimize(const NormalizedProblem& problem, const HyperRectangle& box,
                         const GridOptions& options) {
  const std::size_t n = problem.nvars();
  if (box.nvars() != n) throw InvalidInput("grid box dimension does not match the problem");
  const int N = options.points_per_axis;
  if (N < 2) throw InvalidInput("grid needs at least 2 points per axis");
  const double needed = std::pow(static_cast<double>(N), static_cast<double>(n));
  if (needed > options.max_points) {
    std::ostringstream os;
    os << "grid of " << N << "^" << n << " = " << needed << " points exceeds the budget of "
       << options.max_points;
    throw InvalidInput(os.str());
  }

  std::vector<std::vector<double>> axis(n, std::vector<double>(static_cast<std::size_t>(N)));
  for (std::size_t j = 0; j < n; ++j) {
    for (int i = 0; i < N; ++i) {
      axis[j][static_cast<std::size_t>(i)] =
          box.lower(j) + box.edge(j) * static_cast<double>(i) / static_cast<double>(N - 1);
    }
    axis[j].back() = box.upper(j);
  }

  const std::size_t s = problem.original_inequality_count;
  GridResult out;
  out.points_per_axis = N;
  std::vector<int> idx(n, 0);
  std::vector<double> x(n);
  for (;;) {
    for (std::size_t j = 0; j < n; ++j) x[j] = axis[j][static_cast<std::size_t>(idx[j])];
    ++out.total_points;
    bool feasible = true;
    for (std::size_t i = 0; i < s && feasible; ++i) {
      feasible = problem.inequalities[i].evaluate(x) >= -options.feas_tol;
    }
    for (std::size_t j = 0; j < problem.equalities.size() && feasible; ++j) {
      feasible = std::abs(problem.equalities[j].evaluate(x)) <= options.eq_tol;
    }
    if (feasible) {
      ++out.feasible_count;
      const double v = problem.objective.evaluate(x);
      if (!out.found || v < out.value) {
        out.found = true;
        out.value = v;
        out.point = x;
      }
    }
    // Odometer increment, last variable fastest.
    std::size_t j = n;
    while (j > 0) {
      --j;
      if (++idx[j] < N) break;
      idx[j] = 0;
      if (j == 0) return out;
    }
  }
}

PointReport check_point(const GpoProblem& problem, std::span<const double> x, double delta) {
  problem.validate();
  if (x.size() != problem.nvars()) {
    throw InvalidInput("point has " + std::to_string(x.size()) + " coordinates, expected " +
                       std::to_string(problem.nvars()));
  }
  PointReport r;
  r.objective = problem.objective.evaluate(x);
  for (std::size_t i = 0; i < problem.inequalities.size(); ++i) {
    ConstraintCheck c;
    c.label = "g" + std::to_string(i + 1);
    c.value = problem.inequalities[i].evaluate(x);
    c.violation = c.value < 0.0 ? -c.value : 0.0;
    c.ok = c.value >= -delta;
    r.ineq_violation_sum += c.violation;
    r.pass = r.pass && c.ok;
    r.inequalities.push_back(c);
  }
  for (std::size_t j = 0; j < problem.equalities.size(); ++j) {
    ConstraintCheck c;
    c.label = "h" + std::to_string(j + 1);
    c.value = problem.equalities[j].evaluate(x);
    c.violation = std::abs(c.value);
    c.ok = c.violation <= delta;
    r.eq_violation_sum += c.violation;
    r.pass = r.pass && c.ok;
    r.equalities.push_back(c);
  }
  if (problem.box) {
    const auto w = box_polynomials(*problem.box);
    for (std::size_t j = 0; j < w.size(); ++j) {
      ConstraintCheck c;
      c.label = "w" + std::to_string(j + 1);
      c.value = w[j].evaluate(x);
      c.violation = c.value < 0.0 ? -c.value : 0.0;
      c.ok = c.value >= -delta;
      r.pass = r.pass && c.ok;
      r.box.push_back(c);
    }
  }
  return r;
}

}  // namespace gpo
