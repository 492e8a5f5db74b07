#include <doctest.h>

#include <cmath>
#include <random>

#include "gpo/errors.hpp"
#include "gpo/oracle.hpp"
#include "gpo/relaxation.hpp"

using namespace gpo;

namespace {

NormalizedProblem problem(const std::string& text) { return normalize(parse_problem(text)); }

Polynomial poly(const std::string& text, std::size_t n = 1) {
  std::vector<std::string> names;
  if (n == 1) {
    names = {"x"};
  } else {
    for (std::size_t i = 0; i < n; ++i) names.push_back("x" + std::to_string(i + 1));
  }
  return parse_polynomial(text, names);
}

double split_residual(double a, double b, double c, double d, const BoxQuadraticSplit& s) {
  const Polynomial x = Polynomial::variable(1, 0);
  auto k = [](double v) { return Polynomial::constant(1, v); };
  const Polynomial g = (x - k(a)) * (k(b) - x);
  const Polynomial h = (x - k(c)) * (k(d) - x);
  const Polynomial sq = (x + k(s.gamma)) * (x + k(s.gamma));
  return (g - s.alpha * h - s.beta * sq).max_abs_coefficient();
}

}  // namespace

TEST_CASE("box polynomials") {
  auto w = box_polynomials(HyperRectangle({0.0}, {1.0}));
  CHECK(w[0] == poly("x - x^2"));
  w = box_polynomials(HyperRectangle({-1.0}, {1.0}));
  CHECK(w[0] == poly("1 - x^2"));
  w = box_polynomials(HyperRectangle({1.0}, {3.0}));
  CHECK(w[0] == poly("-x^2 + 4*x - 3"));
  const auto w2 = box_polynomials(HyperRectangle({0.0, -2.0}, {1.0, 2.0}));
  REQUIRE(w2.size() == 2);
  CHECK(w2[1] == poly("4 - x2^2", 2));
}

TEST_CASE("module degrees and degree errors") {
  const auto np = problem("vars x y\nminimize x\nst x^3 - y >= 0\nst x == y^2");
  const auto spec = module_spec(np, HyperRectangle::cube(2, -1, 1), 4);
  REQUIRE(spec.generators.size() == 1 + 3 + 2);
  CHECK(spec.multiplier_degrees == std::vector<int>{2, 0, 1, 1, 1, 1});
  CHECK_THROWS_AS(module_spec(np, HyperRectangle::cube(2, -1, 1), 2), DegreeError);
  try {
    module_spec(np, HyperRectangle::cube(2, -1, 1), 2);
  } catch (const DegreeError& e) {
    CHECK(std::string(e.what()).find("inequality 1") != std::string::npos);
  }
  const auto quartic = problem("vars x\nminimize x^4");
  CHECK_THROWS_AS(module_spec(quartic, HyperRectangle::cube(1, -1, 1), 3), DegreeError);
  CHECK_THROWS_AS(module_spec(problem("vars x\nminimize x"), HyperRectangle::cube(1, -1, 1), 1),
                  DegreeError);
}

TEST_CASE("SOS bound for f = x on [0, 1]") {
  // Independent identity: x - 0 = x^2 + 1 * x(1 - x).
  const Polynomial x = poly("x");
  CHECK(poly("x^2") + poly("x - x^2") == x);

  const auto np = problem("vars x\nminimize x\nbox 0 1");
  const HyperRectangle box({0.0}, {1.0});
  const auto prog = build_sos_glb(np, box, 2);
  CHECK(prog.sdp.block_dims == std::vector<int>{2, 1});
  CHECK(prog.sdp.constraints.size() == 3);
  CHECK(prog.sdp.free_vars == 1);
  const auto sol = sdp::solve(prog.sdp);
  REQUIRE(sol.status == sdp::Status::Optimal);
  CHECK(std::abs(prog.bound_from(sol)) <= 1e-6);
  const auto cert = reconstruct_certificate(prog, sol);
  CHECK(cert.residual <= 1e-6);
  CHECK(cert.unit_residual <= 1e-6);
  // The box multiplier is the constant 1 in this identity.
  CHECK(cert.multipliers[1].coefficient(Monomial({0})) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("SOS bounds for +-x^2 on [-1, 1]") {
  const HyperRectangle box({-1.0}, {1.0});
  auto sol_for = [&](const std::string& f) {
    const auto prog = build_sos_glb(problem("vars x\nminimize " + f), box, 2);
    const auto sol = sdp::solve(prog.sdp);
    REQUIRE(sol.status == sdp::Status::Optimal);
    CHECK(reconstruct_certificate(prog, sol).residual <= 1e-6);
    return prog.bound_from(sol);
  };
  CHECK(std::abs(sol_for("x^2")) <= 1e-6);
  // -x^2 + 1 = 1 * (1 - x^2), and the grid minimum is -1 at the corners.
  CHECK(poly("-x^2") + Polynomial::constant(1, 1.0) == poly("1 - x^2"));
  CHECK(std::abs(sol_for("-x^2") + 1.0) <= 1e-6);
}

TEST_CASE("moment bounds") {
  const auto np = problem("vars x\nminimize x\nbox 0 1");
  const auto prog = build_moment_glb(np, HyperRectangle({0.0}, {1.0}), 2);
  const auto sol = sdp::solve(prog.sdp);
  REQUIRE(sol.status == sdp::Status::Optimal);
  CHECK(std::abs(prog.bound_from(sol)) <= 1e-6);
  const auto y = prog.moments_from(sol);
  REQUIRE(y.size() == 3);
  // The Dirac measure at 0 has moments (1, 0, 0).
  CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(y[1]) <= 1e-5);
  CHECK(std::abs(y[2]) <= 1e-5);

  const auto sq = build_moment_glb(problem("vars x\nminimize x^2"), HyperRectangle({-1.0}, {1.0}), 2);
  const auto s2 = sdp::solve(sq.sdp);
  REQUIRE(s2.status == sdp::Status::Optimal);
  CHECK(std::abs(sq.bound_from(s2)) <= 1e-6);
}

TEST_CASE("moment bound dominates SOS bound on random boxes") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto np = problem(
      "vars x y\nminimize x^4 - 2*x^2*y + 0.5*y^3 - x*y + 0.3*x\nst 1.5 - x^2 - y^2 >= 0");
  for (int t = 0; t < 10; ++t) {
    const double a = u(rng), c = u(rng);
    const HyperRectangle box({a - 0.5, c - 0.5}, {a + 0.4, c + 0.6});
    GlbOptions o;
    o.solve_moment_sdp = true;
    const auto r = glb_bound(np, box, 4, o);
    REQUIRE(r.status == GlbStatus::Bound);
    REQUIRE(r.moment_bound.has_value());
    CHECK(r.lambda <= *r.moment_bound + 1e-6);
    CHECK(std::abs(r.lambda - *r.moment_bound) <= 1e-5);
  }
}

TEST_CASE("glb_bound statuses") {
  const auto lin = glb_bound(problem("vars x\nminimize x"), HyperRectangle({0.0}, {1.0}), 2);
  CHECK(lin.status == GlbStatus::Bound);
  CHECK(std::abs(lin.lambda) <= 1e-6);
  REQUIRE(lin.moment_bound.has_value());
  CHECK(lin.moments.size() == 3);

  // -1 = sigma_0 + 2 (1 - x^2) + (x - 2)(3 - x), sigma_0 = 3x^2 - 5x + 3.
  CHECK(poly("3*x^2 - 5*x + 3") + 2.0 * poly("1 - x^2") + poly("-x^2 + 5*x - 6") ==
        Polynomial::constant(1, -1.0));
  const auto inf = glb_bound(problem("vars x\nminimize x\nst 1 - x^2 >= 0"),
                             HyperRectangle({2.0}, {3.0}), 2);
  CHECK(inf.status == GlbStatus::BoxInfeasible);
  CHECK(inf.sos_status == sdp::Status::DualInfeasibleOrUnbounded);
  CHECK(std::isinf(inf.lambda));

  GlbOptions o;
  o.sdp.max_iter = 1;
  const auto fail = glb_bound(problem("vars x\nminimize x^3 - x"), HyperRectangle({-2.0}, {2.0}), 4, o);
  CHECK(fail.sos_status == sdp::Status::IterationLimit);
  // A capped solve either certifies a weaker bound from a PSD iterate or fails.
  if (fail.status == GlbStatus::Bound) {
    CHECK(fail.lambda <= -6.0 + 1e-9);  // f(-2) = -6 is the true minimum
  } else {
    CHECK(fail.status == GlbStatus::SolverFailure);
    CHECK(fail.message.find("box") != std::string::npos);
  }
}

TEST_CASE("bounds are monotone under box nesting and order") {
  const auto np = problem("vars x y\nminimize x^3*y - x*y^2 + x^2 - y\nst 2 - x^2 - y^2 >= 0");
  const HyperRectangle outer({-1.0, -1.2}, {1.1, 0.9});
  const HyperRectangle inner({-0.4, -0.5}, {0.7, 0.3});
  const auto a = glb_bound(np, outer, 4);
  const auto b = glb_bound(np, inner, 4);
  REQUIRE(a.status == GlbStatus::Bound);
  REQUIRE(b.status == GlbStatus::Bound);
  CHECK(a.lambda <= b.lambda + 1e-6);
  const auto c = glb_bound(np, outer, 6);
  CHECK(a.lambda <= c.lambda + 1e-6);
  GridOptions g;
  const auto grid = grid_minimize(np, outer, g);
  REQUIRE(grid.found);
  CHECK(c.lambda <= grid.value + 1e-6);
}

TEST_CASE("bounds are reported in original coordinates") {
  // Far-from-origin narrow box: f = (x - 5)^2 on [5, 5.0049].
  const auto r = glb_bound(problem("vars x\nminimize x^2 - 10*x + 25"), HyperRectangle({5.0}, {5.0049}), 2);
  REQUIRE(r.status == GlbStatus::Bound);
  CHECK(std::abs(r.lambda) <= 1e-9);
  REQUIRE(r.moments.size() == 3);
  CHECK(r.moments[1] == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("box quadratic split examples") {
  auto s = decompose_box_quadratic(0, 4, 1, 3);
  CHECK(s.alpha == doctest::Approx(4.0));
  CHECK(s.beta == doctest::Approx(3.0));
  CHECK(s.gamma == doctest::Approx(-2.0));
  // 4(x - 1)(3 - x) + 3(x - 2)^2 = 4x - x^2, expanded by hand.
  CHECK(4.0 * poly("(x - 1)*(3 - x)") + 3.0 * poly("(x - 2)^2") == poly("4*x - x^2"));

  s = decompose_box_quadratic(-2, 5, -2, 5);
  CHECK(s.alpha == 1.0);
  CHECK(s.beta == 0.0);

  s = decompose_box_quadratic(0, 2, 0, 1);
  CHECK(s.alpha == 2.0);
  CHECK(s.beta == 1.0);
  CHECK(s.gamma == 0.0);
  CHECK(2.0 * poly("x*(1 - x)") + poly("x^2") == poly("2*x - x^2"));

  s = decompose_box_quadratic(0, 2, 1, 2);
  CHECK(split_residual(0, 2, 1, 2, s) <= 1e-12);
  CHECK(s.gamma == -2.0);

  s = decompose_box_quadratic(-3, 7, -1, 2);
  CHECK(s.alpha >= 0.0);
  CHECK(s.beta >= 0.0);
  CHECK(split_residual(-3, 7, -1, 2, s) <= 1e-10);

  CHECK_THROWS_AS(decompose_box_quadratic(0, 1, 0.5, 0.5), InvalidInput);
  CHECK_THROWS_AS(decompose_box_quadratic(0, 1, -0.5, 0.5), InvalidInput);
  CHECK_THROWS_AS(decompose_box_quadratic(0, 1, 0.2, 1.5), InvalidInput);
}
