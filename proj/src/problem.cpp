#include "gpo/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gpo/errors.hpp"

namespace gpo {

HyperRectangle::HyperRectangle(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw InvalidInput("box corners have different lengths");
  }
  if (lower_.empty()) throw InvalidInput("box must have at least one dimension");
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!(lower_[i] < upper_[i]) || !std::isfinite(lower_[i]) ||
        !std::isfinite(upper_[i])) {
      throw InvalidInput("box edge " + std::to_string(i + 1) +
                         " must satisfy a < b with finite endpoints");
    }
  }
}

HyperRectangle HyperRectangle::cube(std::size_t nvars, double lo, double hi) {
  return HyperRectangle(std::vector<double>(nvars, lo), std::vector<double>(nvars, hi));
}

std::size_t HyperRectangle::longest_axis() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < nvars(); ++i) {
    if (edge(i) > edge(best)) best = i;
  }
  return best;
}

double HyperRectangle::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < nvars(); ++i) v *= edge(i);
  return v;
}

double HyperRectangle::log_volume() const {
  double v = 0.0;
  for (std::size_t i = 0; i < nvars(); ++i) v += std::log(edge(i));
  return v;
}

double HyperRectangle::half_diagonal() const {
  double s = 0.0;
  for (std::size_t i = 0; i < nvars(); ++i) s += edge(i) * edge(i);
  return 0.5 * std::sqrt(s);
}

std::vector<double> HyperRectangle::centroid() const {
  std::vector<double> c(nvars());
  for (std::size_t i = 0; i < nvars(); ++i) c[i] = 0.5 * (lower_[i] + upper_[i]);
  return c;
}

bool HyperRectangle::contains(std::span<const double> x, double tol) const {
  if (x.size() != nvars()) return false;
  for (std::size_t i = 0; i < nvars(); ++i) {
    if (x[i] < lower_[i] - tol || x[i] > upper_[i] + tol) return false;
  }
  return true;
}

bool HyperRectangle::contains(const HyperRectangle& inner, double tol) const {
  if (inner.nvars() != nvars()) return false;
  for (std::size_t i = 0; i < nvars(); ++i) {
    if (inner.lower_[i] < lower_[i] - tol || inner.upper_[i] > upper_[i] + tol) {
      return false;
    }
  }
  return true;
}

void GpoProblem::validate() const {
  const std::size_t n = nvars();
  if (n == 0) throw InvalidInput("problem declares no variables");
  auto check = [n](const Polynomial& p, const std::string& what) {
    if (p.nvars() != n) {
      throw InvalidInput(what + " has " + std::to_string(p.nvars()) +
                         " variables, expected " + std::to_string(n));
    }
  };
  check(objective, "objective");
  for (std::size_t i = 0; i < inequalities.size(); ++i) {
    check(inequalities[i], "inequality " + std::to_string(i + 1));
  }
  for (std::size_t j = 0; j < equalities.size(); ++j) {
    check(equalities[j], "equality " + std::to_string(j + 1));
  }
  if (box && box->nvars() != n) throw InvalidInput("declared box has wrong dimension");
}

NormalizedProblem normalize(const GpoProblem& problem) {
  problem.validate();
  NormalizedProblem out;
  out.variables = problem.variables;
  out.objective = problem.objective;
  out.inequalities = problem.inequalities;
  out.inequalities.reserve(problem.inequalities.size() + 2 * problem.equalities.size());
  for (const auto& h : problem.equalities) {
    out.inequalities.push_back(h);
    out.inequalities.push_back(-h);
  }
  out.equalities = problem.equalities;
  out.original_inequality_count = problem.inequalities.size();
  out.box = problem.box;
  return out;
}

namespace {

HyperRectangle box_or_radius(const std::optional<HyperRectangle>& declared,
                             std::size_t nvars, double radius) {
  if (declared) return *declared;
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InvalidInput("no declared box and outer radius r = " + std::to_string(radius) +
                       " is not positive");
  }
  return HyperRectangle::cube(nvars, -radius, radius);
}

}  // namespace

HyperRectangle initial_box(const GpoProblem& problem, double radius) {
  return box_or_radius(problem.box, problem.nvars(), radius);
}

HyperRectangle initial_box(const NormalizedProblem& problem, double radius) {
  return box_or_radius(problem.box, problem.nvars(), radius);
}

std::string format_problem(const GpoProblem& problem) {
  std::ostringstream os;
  os.precision(17);
  os << "vars";
  for (const auto& v : problem.variables) os << ' ' << v;
  os << '\n';
  os << "minimize " << to_string(problem.objective, problem.variables) << '\n';
  for (const auto& g : problem.inequalities) {
    os << "st " << to_string(g, problem.variables) << " >= 0\n";
  }
  for (const auto& h : problem.equalities) {
    os << "st " << to_string(h, problem.variables) << " == 0\n";
  }
  if (problem.box) {
    for (std::size_t i = 0; i < problem.nvars(); ++i) {
      os << "box " << problem.variables[i] << ' ' << problem.box->lower(i) << ' '
         << problem.box->upper(i) << '\n';
    }
  }
  return os.str();
}

}  // namespace gpo
