#include "gpo/bnb.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>

#include "gpo/errors.hpp"

namespace gpo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::pair<HyperRectangle, HyperRectangle> bisect(const HyperRectangle& box) {
  const std::size_t r = box.longest_axis();
  const double mid = 0.5 * (box.lower(r) + box.upper(r));
  std::vector<double> lo_upper = box.upper();
  std::vector<double> hi_lower = box.lower();
  lo_upper[r] = mid;
  hi_lower[r] = mid;
  return {HyperRectangle(box.lower(), lo_upper), HyperRectangle(hi_lower, box.upper())};
}

std::size_t select_branch(std::span<const Branch> branches, int m, double eta, int l) {
  std::size_t star = branches.size();
  for (std::size_t j = 0; j < branches.size(); ++j) {
    if (branches[j].lambda == kInf) continue;
    if (star == branches.size() || branches[j].lambda < branches[star].lambda ||
        (branches[j].lambda == branches[star].lambda && branches[j].id < branches[star].id)) {
      star = j;
    }
  }
  if (star == branches.size()) {
    throw GlobalInfeasibility("every branch is certified empty at this relaxation order");
  }
  const double threshold =
      branches[star].lambda + static_cast<double>(m) * eta / (1.0 + static_cast<double>(l));
  std::size_t best = star;
  for (std::size_t j = 0; j < branches.size(); ++j) {
    const Branch& b = branches[j];
    if (b.lambda == kInf || b.lambda > threshold) continue;
    const Branch& cur = branches[best];
    if (b.log_volume < cur.log_volume || (b.log_volume == cur.log_volume && b.id < cur.id)) {
      best = j;
    }
  }
  return best;
}

BnbResult run_modified_bnb(const NormalizedProblem& problem, const BnBConfig& cfg) {
  const BoxBound bound = [&](const HyperRectangle& box) {
    return glb_bound(problem, box, cfg.k, cfg.glb);
  };
  return run_modified_bnb(problem, cfg, bound);
}

BnbResult run_modified_bnb(const NormalizedProblem& problem, const BnBConfig& cfg,
                           const BoxBound& bound) {
  if (!(cfg.eta > 0.0)) throw InvalidInput("eta must be positive");
  if (cfg.loops < 1) throw InvalidInput("loop count must be at least 1");
  if (cfg.initial_box.nvars() != problem.nvars()) {
    throw InvalidInput("initial box dimension does not match the problem");
  }

  BnbResult res;
  auto evaluate = [&](const HyperRectangle& box, double parent_lambda, bool root) {
    const GlbResult g = bound(box);
    switch (g.status) {
      case GlbStatus::Bound:
        return std::max(g.lambda, parent_lambda);
      case GlbStatus::BoxInfeasible:
        return kInf;
      case GlbStatus::SolverFailure:
        break;
    }
    ++res.solver_failures;
    res.warnings.push_back(g.message);
    std::cerr << "warning: bound evaluation failed: " << g.message << '\n';
    // The root has no parent to inherit from; -inf is its only safe bound.
    if (root) return -kInf;
    return cfg.on_failure == FailurePolicy::Prune ? kInf : parent_lambda;
  };

  Branch root;
  root.id = 0;
  root.box = cfg.initial_box;
  root.log_volume = cfg.initial_box.log_volume();
  root.lambda = evaluate(root.box, -kInf, true);
  if (root.lambda == kInf) {
    throw GlobalInfeasibility("the initial box is certified empty at this relaxation order");
  }
  res.branches.push_back(root);

  const std::size_t s = problem.original_inequality_count;
  for (int m = 0; m < cfg.loops; ++m) {
    const std::size_t j = select_branch(res.branches, m, cfg.eta, cfg.loops);
    const Branch parent = res.branches[j];
    auto [lower, upper] = bisect(parent.box);

    Branch a{parent.id, lower, 0.0, parent.id, parent.depth + 1,
             parent.log_volume - std::numbers::ln2};
    Branch b{m + 1, upper, 0.0, parent.id, parent.depth + 1,
             parent.log_volume - std::numbers::ln2};
    a.lambda = evaluate(a.box, parent.lambda, false);
    b.lambda = evaluate(b.box, parent.lambda, false);
    res.branches[j] = a;
    res.branches.push_back(b);

    TraceRow row;
    row.m = m;
    row.branch_id = parent.id;
    row.lambda_m = parent.lambda;
    row.lambda_star = kInf;
    for (const auto& br : res.branches) row.lambda_star = std::min(row.lambda_star, br.lambda);
    row.longest_edge = parent.box.longest_edge();
    row.volume = parent.box.volume();
    row.center = parent.box.centroid();
    row.f_center = problem.objective.evaluate(row.center);
    for (std::size_t i = 0; i < s; ++i) {
      const double g = problem.inequalities[i].evaluate(row.center);
      if (g < 0.0) row.ineq_violation_sum += -g;
    }
    for (const auto& h : problem.equalities) row.eq_violation_sum += std::abs(h.evaluate(row.center));
    row.gap = std::abs(row.f_center - row.lambda_star);
    res.trace.push_back(std::move(row));
  }
  res.x = res.trace.back().center;
  res.lambda_star = res.trace.back().lambda_star;
  return res;
}

HyperRectangle run_ideal_bnb(const HyperRectangle& initial, int iterations,
                             const ScalarBound& bound) {
  HyperRectangle box = initial;
  for (int it = 0; it < iterations; ++it) {
    auto [a1, a2] = bisect(box);
    box = bound(a1) <= bound(a2) ? a1 : a2;
  }
  return box;
}

double lipschitz_tolerance(const NormalizedProblem& problem, const HyperRectangle& box,
                           double eps) {
  const std::size_t n = problem.nvars();
  std::vector<double> radius(n);
  for (std::size_t j = 0; j < n; ++j) {
    radius[j] = std::max(std::abs(box.lower(j)), std::abs(box.upper(j)));
  }
  auto grad_bound = [&](const Polynomial& h) {
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double bi = 0.0;
      const Polynomial d = h.derivative(i);
      for (const auto& [mono, c] : d.terms()) {
        double t = std::abs(c);
        for (std::size_t j = 0; j < n; ++j) t *= std::pow(radius[j], mono[j]);
        bi += t;
      }
      sq += bi * bi;
    }
    return std::sqrt(sq);
  };
  double L = grad_bound(problem.objective);
  for (const auto& g : problem.inequalities) L = std::max(L, grad_bound(g));
  return L * eps;
}

int recommended_loops(std::size_t nvars, double longest_edge, double eta) {
  if (!(eta > 0.0) || !(longest_edge > 0.0)) {
    throw InvalidInput("recommended_loops needs positive edge length and eta");
  }
  const double n = static_cast<double>(nvars);
  const double v = n * std::log2(longest_edge * std::sqrt(n) / eta);
  if (v < 0.0) return 1;
  return static_cast<int>(std::floor(v)) + 1;
}

}  // namespace gpo
