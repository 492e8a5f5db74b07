#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gpo/polynomial.hpp"

namespace gpo {

/// Axis-aligned box C(a, b) = { x : a <= x <= b } with a_i < b_i.
class HyperRectangle {
 public:
  HyperRectangle() = default;
  HyperRectangle(std::vector<double> lower, std::vector<double> upper);

  static HyperRectangle cube(std::size_t nvars, double lo, double hi);

  std::size_t nvars() const noexcept { return lower_.size(); }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }
  double lower(std::size_t i) const { return lower_[i]; }
  double upper(std::size_t i) const { return upper_[i]; }
  double edge(std::size_t i) const { return upper_[i] - lower_[i]; }

  /// Index of the longest edge; ties go to the smallest index.
  std::size_t longest_axis() const;
  double longest_edge() const { return edge(longest_axis()); }
  double volume() const;
  double log_volume() const;
  double half_diagonal() const;
  std::vector<double> centroid() const;

  bool contains(std::span<const double> x, double tol = 0.0) const;
  bool contains(const HyperRectangle& inner, double tol = 0.0) const;

  bool operator==(const HyperRectangle&) const = default;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// min f(x) s.t. g_i(x) >= 0, h_j(x) = 0, optionally with a declared box.
struct GpoProblem {
  std::vector<std::string> variables;
  Polynomial objective;
  std::vector<Polynomial> inequalities;
  std::vector<Polynomial> equalities;
  std::optional<HyperRectangle> box;

  std::size_t nvars() const noexcept { return variables.size(); }
  /// Throws InvalidInput if any polynomial or the box disagrees on nvars.
  void validate() const;
};

/// Inequality-only form: [g_1..g_s, h_1, -h_1, ..., h_t, -h_t]. The original
/// equalities are kept for violation reporting.
struct NormalizedProblem {
  std::vector<std::string> variables;
  Polynomial objective;
  std::vector<Polynomial> inequalities;
  std::vector<Polynomial> equalities;
  std::size_t original_inequality_count = 0;
  std::optional<HyperRectangle> box;

  std::size_t nvars() const noexcept { return variables.size(); }
  /// True for entries of `inequalities` that came from an equality pair.
  bool is_equality_derived(std::size_t index) const {
    return index >= original_inequality_count;
  }
};

NormalizedProblem normalize(const GpoProblem& problem);

/// The declared box if present, otherwise [-r, r]^n.
HyperRectangle initial_box(const GpoProblem& problem, double radius);
HyperRectangle initial_box(const NormalizedProblem& problem, double radius);

/// Parses the line-oriented problem grammar:
///   vars x y z
///   minimize <expr>
///   st <expr> >= 0      (also <=, ==; both sides may be expressions)
///   box <lo> <hi>       or   box <var> <lo> <hi>
/// '#' starts a comment. Throws ParseError with line and column.
GpoProblem parse_problem(std::string_view text);

/// Renders a problem back into the grammar accepted by parse_problem.
std::string format_problem(const GpoProblem& problem);

/// Parses a standalone polynomial expression over the given variable names.
Polynomial parse_polynomial(std::string_view text,
                            std::span<const std::string> variables);

}  // namespace gpo
