#include "gpo/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "gpo/errors.hpp"

namespace gpo {

UnitBoxMap::UnitBoxMap(const HyperRectangle& box) {
  const std::size_t n = box.nvars();
  center.resize(n);
  half.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    center[i] = 0.5 * (box.lower(i) + box.upper(i));
    half[i] = 0.5 * box.edge(i);
  }
}

Polynomial UnitBoxMap::to_unit(const Polynomial& p) const {
  return p.substitute_affine(center, half);
}

std::vector<double> UnitBoxMap::to_original(std::span<const double> z) const {
  std::vector<double> x(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) x[i] = center[i] + half[i] * z[i];
  return x;
}

std::vector<Polynomial> box_polynomials(const HyperRectangle& box) {
  const std::size_t n = box.nvars();
  std::vector<Polynomial> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = box.lower(j);
    const double b = box.upper(j);
    // (b - x)(x - a) = -x^2 + (a + b) x - a b
    Polynomial w(n);
    w.add_term(Monomial::variable(n, j, 2), -1.0);
    w.add_term(Monomial::variable(n, j), a + b);
    w.add_term(Monomial::constant(n), -a * b);
    out.push_back(std::move(w));
  }
  return out;
}

ModuleSpec module_spec(const NormalizedProblem& problem, const HyperRectangle& box, int k) {
  const std::size_t n = problem.nvars();
  if (box.nvars() != n) throw InvalidInput("box dimension does not match the problem");
  if (k < 2) throw DegreeError("relaxation order k = " + std::to_string(k) + " is below 2");
  if (problem.objective.degree() > k) {
    throw DegreeError("objective has degree " + std::to_string(problem.objective.degree()) +
                      " above relaxation order k = " + std::to_string(k));
  }
  ModuleSpec spec;
  spec.k = k;
  spec.generators.push_back(Polynomial::constant(n, 1.0));
  spec.labels.push_back("sos");
  for (std::size_t i = 0; i < problem.inequalities.size(); ++i) {
    std::string label;
    if (problem.is_equality_derived(i)) {
      const std::size_t e = (i - problem.original_inequality_count) / 2;
      const bool neg = (i - problem.original_inequality_count) % 2 == 1;
      label = std::string(neg ? "-" : "") + "equality " + std::to_string(e + 1);
    } else {
      label = "inequality " + std::to_string(i + 1);
    }
    const int deg = problem.inequalities[i].degree();
    if (deg > k) {
      throw DegreeError(label + " has degree " + std::to_string(deg) +
                        " above relaxation order k = " + std::to_string(k));
    }
    spec.generators.push_back(problem.inequalities[i]);
    spec.labels.push_back(label);
  }
  const auto w = box_polynomials(box);
  for (std::size_t j = 0; j < w.size(); ++j) {
    spec.generators.push_back(w[j]);
    spec.labels.push_back("box " + std::to_string(j + 1));
  }
  for (const auto& g : spec.generators) spec.multiplier_degrees.push_back((k - g.degree()) / 2);
  return spec;
}

ScaledModule scale_module(const NormalizedProblem& problem, const HyperRectangle& box, int k) {
  ScaledModule sm{module_spec(problem, box, k), UnitBoxMap(box), {}, {}, {}, 0.0, 1.0, {}, {}};
  const std::size_t n = problem.nvars();
  const std::size_t s = problem.inequalities.size();
  for (std::size_t i = 0; i < sm.spec.generators.size(); ++i) {
    Polynomial gz(n);
    if (i == 0) {
      gz = Polynomial::constant(n, 1.0);
    } else if (i > s) {
      // Box polynomial on [-1, 1]: h_j^2 (1 - z_j^2); written exactly.
      const std::size_t j = i - s - 1;
      gz.add_term(Monomial::constant(n), 1.0);
      gz.add_term(Monomial::variable(n, j, 2), -1.0);
      sm.generator_scale.push_back(sm.map.half[j] * sm.map.half[j]);
      sm.unit_generators.push_back(std::move(gz));
      continue;
    } else {
      gz = sm.map.to_unit(sm.spec.generators[i]);
    }
    const double c = gz.max_abs_coefficient();
    const double norm = c > 0.0 ? c : 1.0;
    sm.generator_scale.push_back(norm);
    sm.unit_generators.push_back(gz * (1.0 / norm));
  }
  Polynomial fz = sm.map.to_unit(problem.objective);
  sm.offset = fz.constant_term();
  fz.add_term(Monomial::constant(n), -sm.offset);
  const double c = fz.max_abs_coefficient();
  sm.scale = c > 0.0 ? c : 1.0;
  sm.unit_objective = fz * (1.0 / sm.scale);
  sm.full_basis = monomial_basis(n, k);
  for (int d : sm.spec.multiplier_degrees) sm.multiplier_bases.push_back(monomial_basis(n, d));
  return sm;
}

namespace {

std::size_t index_in(const MonomialBasis& basis, const Monomial& m) {
  const auto idx = basis.index_of(m);
  if (!idx) throw InvalidInput("monomial outside the relaxation basis");
  return *idx;
}

std::vector<int> block_dims(const ScaledModule& sm) {
  std::vector<int> dims;
  for (const auto& b : sm.multiplier_bases) dims.push_back(static_cast<int>(b.size()));
  return dims;
}

// Moments of x^alpha given moments of z, via x = center + half .* z.
std::vector<double> to_original_moments(const ScaledModule& sm, const std::vector<double>& mz) {
  std::vector<double> out(sm.full_basis.size(), 0.0);
  for (std::size_t a = 0; a < sm.full_basis.size(); ++a) {
    const Polynomial xa = Polynomial::term(sm.full_basis[a], 1.0);
    const Polynomial za = sm.map.to_unit(xa);
    double v = 0.0;
    for (const auto& [mono, c] : za.terms()) v += c * mz[index_in(sm.full_basis, mono)];
    out[a] = v;
  }
  return out;
}

}  // namespace

SosProgram build_sos_glb(const NormalizedProblem& problem, const HyperRectangle& box, int k) {
  SosProgram prog{scale_module(problem, box, k), {}};
  const ScaledModule& sm = prog.module;
  sdp::Problem& P = prog.sdp;
  P.block_dims = block_dims(sm);
  P.free_vars = 1;
  P.free_objective = {-1.0};
  P.constraints.resize(sm.full_basis.size());
  for (std::size_t a = 0; a < sm.full_basis.size(); ++a) {
    P.constraints[a].rhs = sm.unit_objective.coefficient(sm.full_basis[a]);
  }
  P.constraints[0].free_coefficients.emplace_back(0, 1.0);
  for (std::size_t i = 0; i < sm.unit_generators.size(); ++i) {
    const MonomialBasis& B = sm.multiplier_bases[i];
    for (std::size_t r = 0; r < B.size(); ++r) {
      for (std::size_t c = r; c < B.size(); ++c) {
        const Monomial rc = B[r] * B[c];
        for (const auto& [delta, g] : sm.unit_generators[i].terms()) {
          const std::size_t a = index_in(sm.full_basis, rc * delta);
          P.constraints[a].entries.push_back(
              {static_cast<int>(i), static_cast<int>(r), static_cast<int>(c), g});
        }
      }
    }
  }
  return prog;
}

double SosProgram::bound_from(const sdp::Solution& sol) const {
  return module.offset + module.scale * (-sol.primal_objective);
}

double SosProgram::dual_bound_from(const sdp::Solution& sol) const {
  return module.offset + module.scale * (-sol.dual_objective);
}

std::vector<double> SosProgram::moments_from(const sdp::Solution& sol) const {
  std::vector<double> mz(sol.multipliers.size());
  for (std::size_t a = 0; a < mz.size(); ++a) mz[a] = -sol.multipliers[a];
  return to_original_moments(module, mz);
}

MomentProgram build_moment_glb(const NormalizedProblem& problem, const HyperRectangle& box, int k) {
  MomentProgram prog{scale_module(problem, box, k), {}};
  const ScaledModule& sm = prog.module;
  sdp::Problem& P = prog.sdp;
  P.block_dims = block_dims(sm);
  P.free_vars = static_cast<int>(sm.full_basis.size());
  P.free_objective.assign(sm.full_basis.size(), 0.0);
  for (const auto& [mono, c] : sm.unit_objective.terms()) {
    P.free_objective[index_in(sm.full_basis, mono)] = c;
  }
  sdp::Constraint normal;
  normal.free_coefficients.emplace_back(0, 1.0);
  normal.rhs = 1.0;
  P.constraints.push_back(std::move(normal));
  for (std::size_t i = 0; i < sm.unit_generators.size(); ++i) {
    const MonomialBasis& B = sm.multiplier_bases[i];
    for (std::size_t r = 0; r < B.size(); ++r) {
      for (std::size_t c = r; c < B.size(); ++c) {
        sdp::Constraint con;
        con.entries.push_back({static_cast<int>(i), static_cast<int>(r), static_cast<int>(c),
                               r == c ? 1.0 : 0.5});
        const Monomial rc = B[r] * B[c];
        for (const auto& [delta, g] : sm.unit_generators[i].terms()) {
          con.free_coefficients.emplace_back(static_cast<int>(index_in(sm.full_basis, rc * delta)), -g);
        }
        P.constraints.push_back(std::move(con));
      }
    }
  }
  return prog;
}

double MomentProgram::bound_from(const sdp::Solution& sol) const {
  return module.offset + module.scale * sol.primal_objective;
}

std::vector<double> MomentProgram::moments_from(const sdp::Solution& sol) const {
  return to_original_moments(module, sol.free_values);
}

std::string to_string(GlbStatus s) {
  switch (s) {
    case GlbStatus::Bound: return "Bound";
    case GlbStatus::BoxInfeasible: return "BoxInfeasible";
    case GlbStatus::SolverFailure: return "SolverFailure";
  }
  return "Unknown";
}

namespace {

std::string describe_box(const HyperRectangle& box) {
  std::ostringstream os;
  os.precision(17);
  os << "box [";
  for (std::size_t i = 0; i < box.nvars(); ++i) {
    os << (i ? ", " : "") << '[' << box.lower(i) << ", " << box.upper(i) << ']';
  }
  os << ']';
  return os.str();
}

// On [-1, 1]^n every |z^alpha| <= 1, so with Q_i PSD
//   fhat - lambda = sum_i sigma_i ghat_i + r   implies   fhat >= lambda - |r|_1
// on S intersected with the box.
std::optional<double> inexact_bound(const SosProgram& prog, const sdp::Solution& sol) {
  if (sol.blocks.size() != prog.sdp.block_dims.size() || sol.free_values.size() != 1) {
    return std::nullopt;
  }
  for (const auto& Q : sol.blocks) {
    if (!Q.allFinite()) return std::nullopt;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < 0.0) return std::nullopt;
  }
  const double lambda = sol.free_values[0];
  if (!std::isfinite(lambda)) return std::nullopt;
  double l1 = 0.0;
  for (const auto& con : prog.sdp.constraints) {
    double v = con.rhs;
    for (const auto& e : con.entries) {
      const double q = sol.blocks[static_cast<std::size_t>(e.block)](e.row, e.col);
      v -= (e.row == e.col ? 1.0 : 2.0) * e.value * q;
    }
    for (const auto& [j, c] : con.free_coefficients) v -= c * lambda;
    l1 += std::abs(v);
  }
  return prog.module.offset + prog.module.scale * (lambda - l1);
}

}  // namespace

GlbResult glb_bound(const NormalizedProblem& problem, const HyperRectangle& box, int k,
                    const GlbOptions& options) {
  const SosProgram prog = build_sos_glb(problem, box, k);
  const sdp::Solution sol = sdp::solve(prog.sdp, options.sdp);
  GlbResult out;
  out.sos_status = sol.status;
  out.iterations = sol.iterations;
  switch (sol.status) {
    case sdp::Status::Optimal:
      out.status = GlbStatus::Bound;
      out.lambda = prog.bound_from(sol);
      out.moment_bound = prog.dual_bound_from(sol);
      out.moments = prog.moments_from(sol);
      break;
    case sdp::Status::DualInfeasibleOrUnbounded:
      // -1 lies in the module: lambda is unbounded above on this box.
      out.status = GlbStatus::BoxInfeasible;
      out.lambda = std::numeric_limits<double>::infinity();
      break;
    case sdp::Status::PrimalInfeasible:
      // No lambda makes f - lambda a member; -inf is the only valid bound.
      out.status = GlbStatus::Bound;
      out.lambda = -std::numeric_limits<double>::infinity();
      break;
    default:
      if (const auto fallback = inexact_bound(prog, sol)) {
        // An inexact but PSD Gram point still certifies a weaker bound.
        out.status = GlbStatus::Bound;
        out.lambda = *fallback;
        out.message = "SOS solve returned " + sdp::to_string(sol.status) +
                      "; bound taken from the best PSD iterate with its residual subtracted";
        break;
      }
      out.status = GlbStatus::SolverFailure;
      out.lambda = std::numeric_limits<double>::quiet_NaN();
      out.message = "SOS solve returned " + sdp::to_string(sol.status) +
                    (sol.message.empty() ? "" : " (" + sol.message + ")") + " on " +
                    describe_box(box);
      break;
  }
  if (options.solve_moment_sdp) {
    const MomentProgram mp = build_moment_glb(problem, box, k);
    const sdp::Solution ms = sdp::solve(mp.sdp, options.sdp);
    out.moment_status = ms.status;
    if (ms.status == sdp::Status::Optimal) {
      out.moment_bound = mp.bound_from(ms);
      out.moments = mp.moments_from(ms);
    } else if (ms.status == sdp::Status::PrimalInfeasible) {
      out.moment_bound = std::numeric_limits<double>::infinity();
    } else if (ms.status == sdp::Status::DualInfeasibleOrUnbounded) {
      out.moment_bound = -std::numeric_limits<double>::infinity();
    } else {
      out.moment_bound.reset();
    }
  }
  return out;
}

SosCertificate reconstruct_certificate(const SosProgram& program, const sdp::Solution& sol) {
  const ScaledModule& sm = program.module;
  const std::size_t n = sm.map.center.size();
  SosCertificate cert;
  cert.lambda = program.bound_from(sol);
  const double lambda_unit = -sol.primal_objective;

  std::vector<double> inv_shift(n), inv_scale(n);
  for (std::size_t j = 0; j < n; ++j) {
    inv_shift[j] = -sm.map.center[j] / sm.map.half[j];
    inv_scale[j] = 1.0 / sm.map.half[j];
  }

  Polynomial unit_rem = sm.unit_objective - Polynomial::constant(n, lambda_unit);
  for (std::size_t i = 0; i < sm.unit_generators.size(); ++i) {
    const MonomialBasis& B = sm.multiplier_bases[i];
    const Eigen::MatrixXd& Q = sol.blocks[i];
    Polynomial sigma(n);
    for (std::size_t r = 0; r < B.size(); ++r) {
      for (std::size_t c = 0; c < B.size(); ++c) {
        sigma.add_term(B[r] * B[c], Q(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
      }
    }
    unit_rem -= sigma * sm.unit_generators[i];
    // sigma_hat(z) * ghat_i(z) = sigma_hat(z(x)) * g_i(x) / generator_scale_i
    Polynomial sx = sigma.substitute_affine(inv_shift, inv_scale) * (sm.scale / sm.generator_scale[i]);
    cert.multipliers.push_back(std::move(sx));
  }
  cert.unit_residual = unit_rem.max_abs_coefficient();

  // Original-coordinate identity: f - lambda - sum sigma_i g_i.
  Polynomial fx = Polynomial::constant(n, sm.offset) +
                  sm.unit_objective.substitute_affine(inv_shift, inv_scale) * sm.scale;
  Polynomial rem = fx - Polynomial::constant(n, cert.lambda);
  for (std::size_t i = 0; i < cert.multipliers.size(); ++i) {
    rem -= cert.multipliers[i] * sm.spec.generators[i];
  }
  cert.residual = rem.max_abs_coefficient();
  return cert;
}

}  // namespace gpo
