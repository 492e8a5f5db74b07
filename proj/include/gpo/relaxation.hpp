#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gpo/monomial.hpp"
#include "gpo/polynomial.hpp"
#include "gpo/problem.hpp"
#include "gpo/sdp.hpp"

namespace gpo {

/// Affine map x = center + half .* z taking [-1, 1]^n onto a box.
struct UnitBoxMap {
  std::vector<double> center;
  std::vector<double> half;

  explicit UnitBoxMap(const HyperRectangle& box);
  /// p(center + half .* z) as a polynomial in z.
  Polynomial to_unit(const Polynomial& p) const;
  std::vector<double> to_original(std::span<const double> z) const;
};

/// w_j(x) = (b_j - x_j)(x_j - a_j), one per coordinate.
std::vector<Polynomial> box_polynomials(const HyperRectangle& box);

/// Generators of the box-augmented degree-k module: g_0 = 1, the problem's
/// inequalities, then the box polynomials.
struct ModuleSpec {
  int k = 0;
  std::vector<Polynomial> generators;
  std::vector<int> multiplier_degrees;
  std::vector<std::string> labels;
};

/// Throws DegreeError if k < 2, deg f > k or some generator has degree > k.
ModuleSpec module_spec(const NormalizedProblem& problem, const HyperRectangle& box, int k);

/// Data shared by both SDP formulations: generators rewritten on [-1, 1]^n,
/// each divided by its largest coefficient, and f(x) = offset + scale * fhat(z).
struct ScaledModule {
  ModuleSpec spec;
  UnitBoxMap map;
  std::vector<Polynomial> unit_generators;
  std::vector<double> generator_scale;
  Polynomial unit_objective;
  double offset = 0.0;
  double scale = 1.0;
  MonomialBasis full_basis;
  std::vector<MonomialBasis> multiplier_bases;
};

ScaledModule scale_module(const NormalizedProblem& problem, const HyperRectangle& box, int k);

/// max lambda s.t. f - lambda = sum_i sigma_i g_i, written as
/// min -lambda over Gram blocks Q_i and one free variable lambda.
struct SosProgram {
  ScaledModule module;
  sdp::Problem sdp;

  /// lambda in original units from an Optimal solve.
  double bound_from(const sdp::Solution& sol) const;
  /// Moment bound implied by the dual multipliers of an Optimal solve.
  double dual_bound_from(const sdp::Solution& sol) const;
  /// Truncated moments in original coordinates, indexed by full_basis.
  std::vector<double> moments_from(const sdp::Solution& sol) const;
};

SosProgram build_sos_glb(const NormalizedProblem& problem, const HyperRectangle& box, int k);

/// min sum_a f_a y_a with y_0 = 1 and every localizing matrix PSD.
struct MomentProgram {
  ScaledModule module;
  sdp::Problem sdp;

  double bound_from(const sdp::Solution& sol) const;
  std::vector<double> moments_from(const sdp::Solution& sol) const;
};

MomentProgram build_moment_glb(const NormalizedProblem& problem, const HyperRectangle& box, int k);

enum class GlbStatus { Bound, BoxInfeasible, SolverFailure };

std::string to_string(GlbStatus s);

struct GlbOptions {
  sdp::Options sdp;
  /// Also solve the moment SDP directly instead of reading the SOS duals.
  bool solve_moment_sdp = false;
};

struct GlbResult {
  GlbStatus status = GlbStatus::SolverFailure;
  /// The SOS bound; +inf for BoxInfeasible, NaN for SolverFailure.
  double lambda = 0.0;
  /// Moment-side value, from the SOS duals or from a separate moment solve.
  std::optional<double> moment_bound;
  /// Truncated moment vector in original coordinates (graded lex order).
  std::vector<double> moments;
  sdp::Status sos_status = sdp::Status::NumericalFailure;
  std::optional<sdp::Status> moment_status;
  int iterations = 0;
  std::string message;
};

/// Subroutine B_k on S intersected with `box`.
GlbResult glb_bound(const NormalizedProblem& problem, const HyperRectangle& box, int k,
                    const GlbOptions& options = {});

/// f - lambda = sum_i sigma_i g_i recovered from the Gram blocks.
struct SosCertificate {
  double lambda = 0.0;
  /// sigma_i in original coordinates, aligned with ModuleSpec::generators.
  std::vector<Polynomial> multipliers;
  /// Largest coefficient of f - lambda - sum sigma_i g_i in original coordinates.
  double residual = 0.0;
  /// The same identity on the rescaled, normalized data the SDP saw.
  double unit_residual = 0.0;
};

SosCertificate reconstruct_certificate(const SosProgram& program, const sdp::Solution& sol);

/// (x - a)(b - x) = alpha (x - c)(d - x) + beta (x + gamma)^2 with alpha, beta >= 0.
struct BoxQuadraticSplit {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

/// Requires a <= c < d <= b; throws InvalidInput otherwise.
BoxQuadraticSplit decompose_box_quadratic(double a, double b, double c, double d);

}  // namespace gpo
