#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gpo/bnb.hpp"
#include "gpo/errors.hpp"
#include "gpo/oracle.hpp"
#include "gpo/problem.hpp"
#include "gpo/relaxation.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kSolverFailure = 2;
constexpr int kInfeasible = 3;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string vec(const std::vector<double>& x) {
  std::string out;
  for (std::size_t i = 0; i < x.size(); ++i) out += (i ? "," : "") + num(x[i]);
  return out;
}

gpo::GpoProblem load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gpo::InvalidInput("cannot open problem file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return gpo::parse_problem(ss.str());
}

std::vector<double> parse_point(const std::string& text) {
  std::vector<double> x;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw gpo::InvalidInput("bad coordinate '" + item + "' in --point");
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw gpo::InvalidInput("bad coordinate '" + item + "' in --point");
    x.push_back(v);
  }
  return x;
}

struct Args {
  std::string problem;
  int k = 2;
  double eta = 0.01;
  int loops = 0;
  double radius = 0.0;
  int grid = 201;
  double eq_tol = 1e-3;
  std::string trace;
  std::string point;
  double delta = 1e-6;
  double gap_tol = 1e-8;
  double psd_tol = 1e-9;
  int max_iter = 200;
  std::string on_failure = "prune";
};

gpo::GlbOptions glb_options(const Args& a) {
  gpo::GlbOptions o;
  o.sdp.gap_tol = a.gap_tol;
  o.sdp.psd_tol = a.psd_tol;
  o.sdp.max_iter = a.max_iter;
  return o;
}

int run_solve(const Args& a) {
  const gpo::GpoProblem p = load(a.problem);
  const gpo::NormalizedProblem np = gpo::normalize(p);
  gpo::BnBConfig cfg;
  cfg.k = a.k;
  cfg.eta = a.eta;
  cfg.initial_box = gpo::initial_box(p, a.radius);
  cfg.loops = a.loops > 0 ? a.loops
                          : gpo::recommended_loops(np.nvars(), cfg.initial_box.longest_edge(), a.eta);
  cfg.glb = glb_options(a);
  cfg.on_failure = a.on_failure == "inherit" ? gpo::FailurePolicy::InheritParent
                                             : gpo::FailurePolicy::Prune;
  const gpo::BnbResult r = gpo::run_modified_bnb(np, cfg);
  if (!a.trace.empty()) {
    std::ofstream out(a.trace);
    if (!out) throw gpo::InvalidInput("cannot write trace file " + a.trace);
    gpo::write_trace_csv(out, r.trace, np.nvars());
  }
  const auto& last = r.trace.back();
  std::cout << "loops " << cfg.loops << '\n'
            << "x " << vec(r.x) << '\n'
            << "f " << num(last.f_center) << '\n'
            << "lambda_star " << num(r.lambda_star) << '\n'
            << "gap " << num(last.gap) << '\n'
            << "ineq_violation_sum " << num(last.ineq_violation_sum) << '\n'
            << "eq_violation_sum " << num(last.eq_violation_sum) << '\n'
            << "solver_failures " << r.solver_failures << '\n';
  return kOk;
}

int run_glb(const Args& a) {
  const gpo::GpoProblem p = load(a.problem);
  const gpo::NormalizedProblem np = gpo::normalize(p);
  const gpo::HyperRectangle box = gpo::initial_box(p, a.radius);
  gpo::GlbOptions opts = glb_options(a);
  const gpo::GlbResult r = gpo::glb_bound(np, box, a.k, opts);
  std::cout << "status " << gpo::to_string(r.status) << '\n';
  switch (r.status) {
    case gpo::GlbStatus::Bound:
      std::cout << "bound " << num(r.lambda) << '\n';
      if (r.moment_bound) std::cout << "moment_bound " << num(*r.moment_bound) << '\n';
      std::cout << "iterations " << r.iterations << '\n';
      return kOk;
    case gpo::GlbStatus::BoxInfeasible:
      std::cout << "bound inf\n";
      return kInfeasible;
    case gpo::GlbStatus::SolverFailure:
      std::cerr << "error: " << r.message << '\n';
      return kSolverFailure;
  }
  return kSolverFailure;
}

int run_oracle(const Args& a) {
  const gpo::GpoProblem p = load(a.problem);
  const gpo::NormalizedProblem np = gpo::normalize(p);
  gpo::GridOptions opts;
  opts.points_per_axis = a.grid;
  opts.eq_tol = a.eq_tol;
  const gpo::GridResult r = gpo::grid_minimize(np, gpo::initial_box(p, a.radius), opts);
  std::cout << "points_per_axis " << r.points_per_axis << '\n'
            << "feasible_points " << r.feasible_count << '\n';
  if (!r.found) {
    std::cout << "result none\n";
    std::cerr << "note: no grid point is feasible\n";
    return kOk;
  }
  std::cout << "x " << vec(r.point) << '\n' << "f " << num(r.value) << '\n';
  return kOk;
}

int run_check(const Args& a) {
  const gpo::GpoProblem p = load(a.problem);
  const std::vector<double> x = parse_point(a.point);
  const gpo::PointReport r = gpo::check_point(p, x, a.delta);
  std::cout << "f " << num(r.objective) << '\n';
  auto show = [](const std::vector<gpo::ConstraintCheck>& list) {
    for (const auto& c : list) {
      std::cout << c.label << ' ' << num(c.value) << ' ' << (c.ok ? "ok" : "VIOLATED") << '\n';
    }
  };
  show(r.inequalities);
  show(r.equalities);
  show(r.box);
  std::cout << "ineq_violation_sum " << num(r.ineq_violation_sum) << '\n'
            << "eq_violation_sum " << num(r.eq_violation_sum) << '\n'
            << "delta " << num(a.delta) << '\n'
            << (r.pass ? "PASS" : "FAIL") << '\n';
  return kOk;
}

void add_solver_flags(CLI::App* cmd, Args& a) {
  cmd->add_option("--gap-tol", a.gap_tol, "SDP duality gap tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--psd-tol", a.psd_tol, "SDP eigenvalue tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", a.max_iter, "SDP iteration limit")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global polynomial optimization over boxes"};
  app.require_subcommand(1);
  Args a;

  auto* solve = app.add_subcommand("solve", "run the modified branch and bound");
  solve->add_option("problem", a.problem, "problem file")->required();
  solve->add_option("--k", a.k, "relaxation order");
  solve->add_option("--eta", a.eta, "trim tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--loops", a.loops, "loop count (default: recommended)");
  solve->add_option("--radius", a.radius, "outer radius when no box is declared");
  solve->add_option("--trace", a.trace, "trace CSV output path");
  solve->add_option("--on-failure", a.on_failure, "bound failure policy")
      ->check(CLI::IsMember({"prune", "inherit"}));
  add_solver_flags(solve, a);

  auto* glb = app.add_subcommand("glb", "one bound evaluation on the initial box");
  glb->add_option("problem", a.problem, "problem file")->required();
  glb->add_option("--k", a.k, "relaxation order");
  glb->add_option("--radius", a.radius, "outer radius when no box is declared");
  add_solver_flags(glb, a);

  auto* oracle = app.add_subcommand("oracle", "dense grid minimization");
  oracle->add_option("problem", a.problem, "problem file")->required();
  oracle->add_option("--grid", a.grid, "points per axis")->check(CLI::Range(2, 1 << 30));
  oracle->add_option("--radius", a.radius, "outer radius when no box is declared");
  oracle->add_option("--eq-tol", a.eq_tol, "equality slack")->check(CLI::NonNegativeNumber);

  auto* check = app.add_subcommand("check", "evaluate constraints at a point");
  check->add_option("problem", a.problem, "problem file")->required();
  check->add_option("--point", a.point, "comma-separated coordinates")->required();
  check->add_option("--delta", a.delta, "violation tolerance")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (solve->parsed()) return run_solve(a);
    if (glb->parsed()) return run_glb(a);
    if (oracle->parsed()) return run_oracle(a);
    return run_check(a);
  } catch (const gpo::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kUsage;
  } catch (const gpo::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const gpo::GlobalInfeasibility& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolverFailure;
  }
}
