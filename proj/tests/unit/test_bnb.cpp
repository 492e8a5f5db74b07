#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gpo/bnb.hpp"
#include "gpo/errors.hpp"
#include "gpo/oracle.hpp"

using namespace gpo;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

NormalizedProblem problem(const std::string& text) { return normalize(parse_problem(text)); }

Branch branch(int id, double lambda, double log_volume) {
  Branch b;
  b.id = id;
  b.box = HyperRectangle({0.0}, {1.0});
  b.lambda = lambda;
  b.log_volume = log_volume;
  return b;
}

// Exact minimum of sum_i (x_i - t_i)^2 over a box: clamp t into the box.
ScalarBound distance_oracle(std::vector<double> t) {
  return [t](const HyperRectangle& box) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double c = std::clamp(t[i], box.lower(i), box.upper(i));
      s += (c - t[i]) * (c - t[i]);
    }
    return s;
  };
}

}  // namespace

TEST_CASE("bisect") {
  auto [a, b] = bisect(HyperRectangle({0.0, 0.0}, {2.0, 1.0}));
  CHECK(a == HyperRectangle({0.0, 0.0}, {1.0, 1.0}));
  CHECK(b == HyperRectangle({1.0, 0.0}, {2.0, 1.0}));
  std::tie(a, b) = bisect(HyperRectangle({0.0, 0.0}, {1.0, 1.0}));
  CHECK(a == HyperRectangle({0.0, 0.0}, {0.5, 1.0}));
  std::tie(a, b) = bisect(HyperRectangle({0.0}, {1.0}));
  CHECK(a == HyperRectangle({0.0}, {0.5}));
  CHECK(b == HyperRectangle({0.5}, {1.0}));
}

TEST_CASE("select_branch") {
  const double eta = 0.1;
  const int l = 9;
  std::vector<Branch> bs{branch(0, 5.0, std::log(8.0)), branch(1, 7.0, std::log(1.0))};
  CHECK(select_branch(bs, 0, eta, l) == 0);

  // Window at m = 3 is 3 * 0.1 / 10 = 0.03.
  bs = {branch(0, 5.0, std::log(8.0)), branch(1, 5.0 + 0.015, std::log(1.0))};
  CHECK(select_branch(bs, 0, eta, l) == 0);
  CHECK(select_branch(bs, 3, eta, l) == 1);

  bs = {branch(0, kInf, 0.0), branch(1, 3.0, 0.0)};
  CHECK(select_branch(bs, 5, eta, l) == 1);

  bs = {branch(0, 2.0, 0.0), branch(1, 2.0, 0.0)};
  CHECK(select_branch(bs, 0, eta, l) == 0);
  bs.push_back(branch(2, 2.0, -1.0));
  CHECK(select_branch(bs, 0, eta, l) == 2);

  bs = {branch(0, kInf, 0.0), branch(1, kInf, 0.0)};
  CHECK_THROWS_AS(select_branch(bs, 0, eta, l), GlobalInfeasibility);
}

TEST_CASE("modified branch and bound on a linear objective") {
  const auto np = problem("vars x1 x2\nminimize x1\nbox 0 1");
  BnBConfig cfg;
  cfg.k = 2;
  cfg.eta = 0.01;
  cfg.loops = 12;
  cfg.initial_box = *np.box;
  const auto r = run_modified_bnb(np, cfg);
  CHECK(r.trace.size() == 12);
  CHECK(r.branches.size() == 13);
  CHECK(r.x[0] <= 0.01);
  CHECK(std::abs(r.trace.back().f_center - r.lambda_star) <= 0.02);
  CHECK(r.solver_failures == 0);
  const GridResult g = grid_minimize(np, cfg.initial_box);
  CHECK(g.value == 0.0);
}

TEST_CASE("modified branch and bound on a shifted square") {
  const auto np = problem("vars x\nminimize (x - 0.5)^2\nbox 0 1");
  BnBConfig cfg;
  cfg.k = 4;
  // The window m * eta / 11 admits boxes with f up to about 0.8 * eta.
  cfg.eta = 0.001;
  cfg.loops = 10;
  cfg.initial_box = *np.box;
  const auto r = run_modified_bnb(np, cfg);
  CHECK(std::abs(np.objective.evaluate(r.x)) <= 1e-3);
}

TEST_CASE("trace invariants") {
  const auto np = problem(
      "vars x y\nminimize x^4 + y^4 - 3*x*y + 0.2*x\nst 2 - x^2 - y^2 >= 0\nst x + y == 0.3\nbox -2 2");
  BnBConfig cfg;
  cfg.k = 4;
  cfg.eta = 0.05;
  cfg.loops = 15;
  cfg.initial_box = *np.box;
  const auto r = run_modified_bnb(np, cfg);
  REQUIRE(r.trace.size() == 15);
  for (std::size_t m = 0; m < r.trace.size(); ++m) {
    const auto& row = r.trace[m];
    CHECK(row.m == static_cast<int>(m));
    if (m > 0) CHECK(row.lambda_star >= r.trace[m - 1].lambda_star);
    CHECK(cfg.initial_box.contains(row.center));
    CHECK(row.f_center == np.objective.evaluate(row.center));
  }
  CHECK(cfg.initial_box.contains(r.x));
  CHECK(r.x == r.trace.back().center);
  for (const auto& b : r.branches) {
    CHECK(cfg.initial_box.contains(b.box));
    CHECK(b.log_volume == doctest::Approx(b.box.log_volume()).epsilon(1e-12));
  }
  const auto again = run_modified_bnb(np, cfg);
  std::ostringstream a, b;
  write_trace_csv(a, r.trace, 2);
  write_trace_csv(b, again.trace, 2);
  CHECK(a.str() == b.str());
}

TEST_CASE("trace csv layout") {
  TraceRow row;
  row.m = 3;
  row.branch_id = 2;
  row.lambda_m = 0.1;
  row.lambda_star = -1.0;
  row.longest_edge = 0.5;
  row.volume = 0.25;
  row.center = {1.0, -2.0};
  row.f_center = 3.0;
  row.gap = 4.0;
  std::ostringstream os;
  write_trace_csv(os, std::vector<TraceRow>{row}, 2);
  CHECK(os.str() ==
        "m,branch_id,lambda_m,lambda_star,longest_edge,volume,center_1,center_2,f_center,"
        "ineq_violation_sum,eq_violation_sum,gap\n"
        "3,2,0.10000000000000001,-1,0.5,0.25,1,-2,3,0,0,4\n");
}

TEST_CASE("failure policy and global infeasibility") {
  const auto np = problem("vars x\nminimize x\nbox 0 1");
  BnBConfig cfg;
  cfg.loops = 3;
  cfg.initial_box = *np.box;
  int calls = 0;
  const BoxBound flaky = [&](const HyperRectangle& box) {
    GlbResult g;
    if (++calls == 3) {
      g.status = GlbStatus::SolverFailure;
      g.message = "injected";
      return g;
    }
    g.status = GlbStatus::Bound;
    g.lambda = box.lower(0);
    return g;
  };
  auto r = run_modified_bnb(np, cfg, flaky);
  CHECK(r.solver_failures == 1);
  // The failed upper child of the first split is pruned.
  CHECK(r.branches[1].lambda == kInf);

  calls = 0;
  cfg.on_failure = FailurePolicy::InheritParent;
  r = run_modified_bnb(np, cfg, flaky);
  CHECK(r.branches[1].lambda == 0.0);

  const auto empty = problem("vars x\nminimize x\nst 1 - x^2 >= 0\nbox 2 3");
  BnBConfig c2;
  c2.initial_box = *empty.box;
  CHECK_THROWS_AS(run_modified_bnb(empty, c2), GlobalInfeasibility);
  c2.eta = 0.0;
  CHECK_THROWS_AS(run_modified_bnb(empty, c2), InvalidInput);
}

TEST_CASE("ideal branch and bound") {
  const ScalarBound left = [](const HyperRectangle& b) { return b.lower(0); };
  const auto box = run_ideal_bnb(HyperRectangle({0.0}, {1.0}), 10, left);
  CHECK(box == HyperRectangle({0.0}, {std::ldexp(1.0, -10)}));

  const auto b2 = run_ideal_bnb(HyperRectangle::cube(2, 0, 1), 8, distance_oracle({0.3, 0.7}));
  CHECK(b2.longest_edge() == 1.0 / 16.0);
  CHECK(b2.contains(std::vector<double>{0.3, 0.7}));

  for (int m = 0; m <= 12; ++m) {
    const auto b = run_ideal_bnb(HyperRectangle::cube(2, 0, 1), m, distance_oracle({0.3, 0.7}));
    CHECK(b.contains(std::vector<double>{0.3, 0.7}));
  }
}

TEST_CASE("lipschitz tolerance") {
  const auto lin = problem("vars x\nminimize x");
  CHECK(lipschitz_tolerance(lin, HyperRectangle({-3.0}, {5.0}), 0.25) == 0.25);
  const auto sq = problem("vars x\nminimize x^2");
  CHECK(lipschitz_tolerance(sq, HyperRectangle({-1.0}, {1.0}), 0.1) == doctest::Approx(0.2));
  const auto cst = problem("vars x y\nminimize 3\nst 2 >= 0");
  CHECK(lipschitz_tolerance(cst, HyperRectangle::cube(2, -1, 1), 0.1) == 0.0);
}

TEST_CASE("recommended loops") {
  // 2 * log2(6 * sqrt(2) / 0.01) = 19.46...
  CHECK(recommended_loops(2, 6.0, 0.01) == 20);
  CHECK(recommended_loops(1, 1.0, 0.5) == 2);
  CHECK(recommended_loops(1, 0.1, 0.5) == 1);
}
