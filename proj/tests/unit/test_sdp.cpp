#include <doctest.h>

#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "gpo/errors.hpp"
#include "gpo/sdp.hpp"

using namespace gpo;
using sdp::Status;

namespace {

// max lambda s.t. A - lambda I PSD, as min -lambda s.t. X + lambda I = A.
sdp::Problem min_eig_free(const Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  sdp::Problem p;
  p.block_dims = {n};
  p.free_vars = 1;
  p.free_objective = {-1.0};
  for (int r = 0; r < n; ++r) {
    for (int c = r; c < n; ++c) {
      sdp::Constraint con;
      con.entries.push_back({0, r, c, r == c ? 1.0 : 0.5});
      if (r == c) con.free_coefficients.emplace_back(0, 1.0);
      con.rhs = A(r, c);
      p.constraints.push_back(con);
    }
  }
  return p;
}

// min <A, X> s.t. trace X = 1; its dual is max y s.t. A - y I PSD.
sdp::Problem min_eig_trace(const Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  sdp::Problem p;
  p.block_dims = {n};
  for (int r = 0; r < n; ++r) {
    for (int c = r; c < n; ++c) {
      if (A(r, c) != 0.0) p.objective.push_back({0, r, c, A(r, c)});
    }
  }
  sdp::Constraint tr;
  for (int r = 0; r < n; ++r) tr.entries.push_back({0, r, r, 1.0});
  tr.rhs = 1.0;
  p.constraints.push_back(tr);
  return p;
}

Eigen::MatrixXd random_symmetric(std::mt19937& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd A(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) A(r, c) = g(rng);
  }
  return 0.5 * (A + A.transpose());
}

double lambda_min(const Eigen::MatrixXd& A) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("min trace with a fixed corner") {
  sdp::Problem p;
  p.block_dims = {2};
  p.objective = {{0, 0, 0, 1.0}, {0, 1, 1, 1.0}};
  p.constraints.push_back({{{0, 0, 0, 1.0}}, {}, 1.0});
  const auto s = sdp::solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.primal_objective == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s.dual_objective == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s.blocks[0](0, 0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("smallest eigenvalue of diag(1, 2)") {
  Eigen::MatrixXd A = Eigen::Vector2d(1.0, 2.0).asDiagonal();
  const auto s = sdp::solve(min_eig_free(A));
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.free_values[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("random smallest-eigenvalue problems against Eigen") {
  std::mt19937 rng(2024);
  for (int t = 0; t < 40; ++t) {
    const int n = 2 + t % 9;
    const Eigen::MatrixXd A = random_symmetric(rng, n);
    const double want = lambda_min(A);
    const auto s1 = sdp::solve(min_eig_free(A));
    REQUIRE(s1.status == Status::Optimal);
    CHECK(std::abs(s1.free_values[0] - want) <= 1e-7);
    const auto s2 = sdp::solve(min_eig_trace(A));
    REQUIRE(s2.status == Status::Optimal);
    CHECK(std::abs(s2.dual_objective - want) <= 1e-7);
    CHECK(s2.dual_objective <= s2.primal_objective + 1e-8 * (1.0 + std::abs(s2.primal_objective)));
    CHECK(s2.primal_residual <= 1e-7);
    CHECK(s2.min_primal_eigenvalue >= -1e-9);
  }
}

TEST_CASE("multiple blocks and duplicate entries") {
  // min X1_11 + 2 X2_00 s.t. X1_11 + X2_00 = 3 (entries split in two pieces).
  sdp::Problem p;
  p.block_dims = {2, 1};
  p.objective = {{0, 1, 1, 1.0}, {1, 0, 0, 2.0}};
  p.constraints.push_back({{{0, 1, 1, 0.5}, {0, 1, 1, 0.5}, {1, 0, 0, 1.0}}, {}, 3.0});
  const auto s = sdp::solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.primal_objective == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(s.blocks[1](0, 0) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("primal infeasibility is certified") {
  // X PSD with X_00 = -1 has no solution.
  sdp::Problem p;
  p.block_dims = {2};
  p.objective = {{0, 0, 0, 1.0}};
  p.constraints.push_back({{{0, 0, 0, 1.0}}, {}, -1.0});
  const auto s = sdp::solve(p);
  CHECK(s.status == Status::PrimalInfeasible);
  CHECK(s.certificate_residual <= 1e-6);
}

TEST_CASE("unboundedness is certified") {
  // min -u s.t. X_00 - u = 0: u can grow without limit.
  sdp::Problem p;
  p.block_dims = {1};
  p.free_vars = 1;
  p.free_objective = {-1.0};
  p.constraints.push_back({{{0, 0, 0, 1.0}}, {{0, -1.0}}, 0.0});
  const auto s = sdp::solve(p);
  CHECK(s.status == Status::DualInfeasibleOrUnbounded);
  CHECK(s.certificate_residual <= 1e-6);
}

TEST_CASE("dependent constraints") {
  sdp::Problem p;
  p.block_dims = {2};
  p.objective = {{0, 0, 0, 1.0}, {0, 1, 1, 1.0}};
  p.constraints.push_back({{{0, 0, 0, 1.0}}, {}, 1.0});
  p.constraints.push_back({{{0, 0, 0, 2.0}}, {}, 2.0});
  auto s = sdp::solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.primal_objective == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s.multipliers.size() == 2);

  p.constraints[1].rhs = 3.0;
  s = sdp::solve(p);
  CHECK(s.status == Status::PrimalInfeasible);
}

TEST_CASE("unused free variable with cost is unbounded") {
  sdp::Problem p;
  p.block_dims = {1};
  p.free_vars = 2;
  p.free_objective = {0.0, 1.0};
  p.objective = {{0, 0, 0, 1.0}};
  p.constraints.push_back({{{0, 0, 0, 1.0}}, {{0, 1.0}}, 1.0});
  CHECK(sdp::solve(p).status == Status::DualInfeasibleOrUnbounded);
}

TEST_CASE("iteration limit is reported") {
  std::mt19937 rng(5);
  sdp::Options o;
  o.max_iter = 2;
  const auto s = sdp::solve(min_eig_trace(random_symmetric(rng, 6)), o);
  CHECK(s.status == Status::IterationLimit);
}

TEST_CASE("solves are deterministic") {
  std::mt19937 rng(9);
  const auto p = min_eig_free(random_symmetric(rng, 7));
  const auto a = sdp::solve(p);
  const auto b = sdp::solve(p);
  CHECK(a.iterations == b.iterations);
  CHECK(a.status == b.status);
  CHECK(a.primal_objective == b.primal_objective);
  CHECK(a.free_values == b.free_values);
}

TEST_CASE("validation") {
  sdp::Problem p;
  p.block_dims = {2};
  p.constraints.push_back({{{0, 2, 0, 1.0}}, {}, 1.0});
  CHECK_THROWS_AS(sdp::solve(p), InvalidInput);
  p.constraints[0].entries[0] = {1, 0, 0, 1.0};
  CHECK_THROWS_AS(sdp::solve(p), InvalidInput);
  p.constraints[0].entries[0] = {0, 0, 0, 1.0};
  p.constraints[0].free_coefficients.emplace_back(0, 1.0);
  CHECK_THROWS_AS(sdp::solve(p), InvalidInput);
}

TEST_CASE("SDPA dump") {
  const auto p = min_eig_free(Eigen::Vector2d(1.0, 0.1).asDiagonal());
  std::ostringstream os;
  sdp::write_sdpa(os, p);
  const std::string text = os.str();
  CHECK(text.find("3 = mDIM") != std::string::npos);
  CHECK(text.find("2 = nBLOCK") != std::string::npos);
  CHECK(text.find("2 -2 = bLOCKsTRUCT") != std::string::npos);
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  CHECK(text.find("0 2 1 1 1\n") != std::string::npos);
}
