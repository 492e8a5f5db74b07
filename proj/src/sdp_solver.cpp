#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <tuple>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "gpo/errors.hpp"
#include "gpo/sdp.hpp"

namespace gpo::sdp {

std::string to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::PrimalInfeasible: return "PrimalInfeasible";
    case Status::DualInfeasibleOrUnbounded: return "DualInfeasibleOrUnbounded";
    case Status::NumericalFailure: return "NumericalFailure";
    case Status::IterationLimit: return "IterationLimit";
  }
  return "Unknown";
}

void Problem::validate() const {
  for (int d : block_dims) {
    if (d < 1) throw InvalidInput("sdp: block dimensions must be >= 1");
  }
  if (free_vars < 0) throw InvalidInput("sdp: negative free variable count");
  if (static_cast<int>(free_objective.size()) != free_vars) {
    throw InvalidInput("sdp: free objective has wrong length");
  }
  auto check_entry = [&](const Entry& e) {
    if (e.block < 0 || e.block >= static_cast<int>(block_dims.size())) {
      throw InvalidInput("sdp: entry references block " + std::to_string(e.block));
    }
    const int n = block_dims[static_cast<std::size_t>(e.block)];
    if (e.row < 0 || e.col < 0 || e.row >= n || e.col >= n) {
      throw InvalidInput("sdp: entry index out of range in block " + std::to_string(e.block));
    }
    if (!std::isfinite(e.value)) throw InvalidInput("sdp: non-finite coefficient");
  };
  for (const auto& e : objective) check_entry(e);
  for (const auto& c : constraints) {
    for (const auto& e : c.entries) check_entry(e);
    for (const auto& [j, v] : c.free_coefficients) {
      if (j < 0 || j >= free_vars) throw InvalidInput("sdp: free coefficient index out of range");
      if (!std::isfinite(v)) throw InvalidInput("sdp: non-finite coefficient");
    }
    if (!std::isfinite(c.rhs)) throw InvalidInput("sdp: non-finite right-hand side");
  }
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Blocks = std::vector<MatrixXd>;

// Entry of a symmetric matrix with both orientations expanded.
struct FullEntry {
  int p;
  int q;
  double v;
};

struct RowBlock {
  int block;
  std::vector<FullEntry> entries;
};

// Constraint data after merging duplicates and dropping dependent rows.
struct Compiled {
  std::vector<int> dims;
  int m = 0;
  int nf = 0;
  std::vector<std::vector<RowBlock>> rows;
  MatrixXd F;  // m x nf
  VectorXd b;
  Blocks C;
  VectorXd cf;
  // block -> (row, index into rows[row])
  std::vector<std::vector<std::pair<int, int>>> block_rows;
};

double inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k]).sum();
  return s;
}

double frob2(const Blocks& a) {
  double s = 0.0;
  for (const auto& m : a) s += m.squaredNorm();
  return s;
}

Blocks zeros_like(const std::vector<int>& dims) {
  Blocks out;
  out.reserve(dims.size());
  for (int d : dims) out.push_back(MatrixXd::Zero(d, d));
  return out;
}

VectorXd apply_A(const Compiled& d, const Blocks& X) {
  VectorXd out = VectorXd::Zero(d.m);
  for (int i = 0; i < d.m; ++i) {
    double s = 0.0;
    for (const auto& rb : d.rows[static_cast<std::size_t>(i)]) {
      const MatrixXd& Xb = X[static_cast<std::size_t>(rb.block)];
      for (const auto& e : rb.entries) s += e.v * Xb(e.p, e.q);
    }
    out[i] = s;
  }
  return out;
}

Blocks apply_AT(const Compiled& d, const VectorXd& y) {
  Blocks out = zeros_like(d.dims);
  for (int i = 0; i < d.m; ++i) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    for (const auto& rb : d.rows[static_cast<std::size_t>(i)]) {
      MatrixXd& Z = out[static_cast<std::size_t>(rb.block)];
      for (const auto& e : rb.entries) Z(e.p, e.q) += yi * e.v;
    }
  }
  return out;
}

// Merged upper-triangular coefficient data of one constraint.
using EntryMap = std::map<std::tuple<int, int, int>, double>;

EntryMap merge_entries(const std::vector<Entry>& entries) {
  EntryMap out;
  for (const auto& e : entries) {
    const int r = std::min(e.row, e.col);
    const int c = std::max(e.row, e.col);
    out[{e.block, r, c}] += e.value;
  }
  for (auto it = out.begin(); it != out.end();) {
    it = it->second == 0.0 ? out.erase(it) : std::next(it);
  }
  return out;
}

std::vector<RowBlock> expand(const EntryMap& upper) {
  std::vector<RowBlock> out;
  for (const auto& [key, v] : upper) {
    const auto [blk, r, c] = key;
    if (out.empty() || out.back().block != blk) out.push_back({blk, {}});
    out.back().entries.push_back({r, c, v});
    if (r != c) out.back().entries.push_back({c, r, v});
  }
  return out;
}

struct RowReduction {
  std::vector<int> independent;
  // Farkas ray over the original rows when a dependent row has an
  // inconsistent right-hand side.
  std::optional<VectorXd> inconsistency_ray;
};

// Finds a maximal set of linearly independent rows of [A F] and checks that
// every dropped row is consistent with the kept ones.
RowReduction reduce_rows(const std::vector<EntryMap>& upper, const MatrixXd& F,
                         const VectorXd& b) {
  const int m = static_cast<int>(upper.size());
  MatrixXd G = F * F.transpose();
  std::map<std::tuple<int, int, int>, std::vector<std::pair<int, double>>> by_key;
  for (int i = 0; i < m; ++i) {
    for (const auto& [key, v] : upper[static_cast<std::size_t>(i)]) by_key[key].emplace_back(i, v);
  }
  for (const auto& [key, list] : by_key) {
    const double w = std::get<1>(key) == std::get<2>(key) ? 1.0 : 2.0;
    for (const auto& [i, vi] : list) {
      for (const auto& [j, vj] : list) G(i, j) += w * vi * vj;
    }
  }

  RowReduction out;
  VectorXd scale(m);
  std::vector<int> nonzero;
  for (int i = 0; i < m; ++i) {
    scale[i] = G(i, i) > 0.0 ? 1.0 / std::sqrt(G(i, i)) : 0.0;
    if (G(i, i) > 0.0) nonzero.push_back(i);
  }
  const MatrixXd Gn = scale.asDiagonal() * G * scale.asDiagonal();
  constexpr double kPivotTol = 1e-10;

  // Fast path: plain Cholesky of the normalized Gram matrix with healthy pivots.
  std::vector<int> indep;
  {
    const int k = static_cast<int>(nonzero.size());
    MatrixXd sub(k, k);
    for (int a = 0; a < k; ++a) {
      for (int c = 0; c < k; ++c) sub(a, c) = Gn(nonzero[static_cast<std::size_t>(a)], nonzero[static_cast<std::size_t>(c)]);
    }
    Eigen::LLT<MatrixXd> llt(sub);
    bool ok = llt.info() == Eigen::Success;
    if (ok) {
      const MatrixXd& L = llt.matrixLLT();
      for (int a = 0; a < k; ++a) {
        if (L(a, a) * L(a, a) < kPivotTol) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      indep = nonzero;
    } else {
      // Greedy pivoted Cholesky on the normalized Gram matrix.
      MatrixXd R = sub;
      std::vector<int> order(static_cast<std::size_t>(k));
      for (int a = 0; a < k; ++a) order[static_cast<std::size_t>(a)] = a;
      std::vector<bool> chosen(static_cast<std::size_t>(k), false);
      for (int step = 0; step < k; ++step) {
        int best = -1;
        double best_val = kPivotTol;
        for (int a = 0; a < k; ++a) {
          if (!chosen[static_cast<std::size_t>(a)] && R(a, a) > best_val) {
            best = a;
            best_val = R(a, a);
          }
        }
        if (best < 0) break;
        chosen[static_cast<std::size_t>(best)] = true;
        const VectorXd col = R.col(best) / std::sqrt(best_val);
        R -= col * col.transpose();
        for (int a = 0; a < k; ++a) {
          if (chosen[static_cast<std::size_t>(a)]) {
            R.row(a).setZero();
            R.col(a).setZero();
          }
        }
      }
      for (int a = 0; a < k; ++a) {
        if (chosen[static_cast<std::size_t>(a)]) indep.push_back(nonzero[static_cast<std::size_t>(a)]);
      }
    }
  }
  out.independent = indep;
  if (static_cast<int>(indep.size()) == m) return out;

  // Consistency of dropped rows: a_r = sum_i c_i a_i must give b_r = c'b_I.
  const int k = static_cast<int>(indep.size());
  MatrixXd GII(k, k);
  for (int a = 0; a < k; ++a) {
    for (int c = 0; c < k; ++c) GII(a, c) = Gn(indep[static_cast<std::size_t>(a)], indep[static_cast<std::size_t>(c)]);
  }
  Eigen::LDLT<MatrixXd> ldlt(GII);
  VectorXd bn(k);
  for (int a = 0; a < k; ++a) bn[a] = b[indep[static_cast<std::size_t>(a)]] * scale[indep[static_cast<std::size_t>(a)]];
  std::vector<bool> is_indep(static_cast<std::size_t>(m), false);
  for (int i : indep) is_indep[static_cast<std::size_t>(i)] = true;
  for (int r = 0; r < m; ++r) {
    if (is_indep[static_cast<std::size_t>(r)]) continue;
    VectorXd coef = VectorXd::Zero(k);
    double br = 0.0;
    if (G(r, r) > 0.0) {
      VectorXd rhs(k);
      for (int a = 0; a < k; ++a) rhs[a] = Gn(indep[static_cast<std::size_t>(a)], r);
      coef = ldlt.solve(rhs);
      br = b[r] * scale[r];
    } else {
      br = b[r];
    }
    const double discrepancy = br - coef.dot(bn);
    const double tol = 1e-9 * (1.0 + std::abs(br) + coef.cwiseAbs().dot(bn.cwiseAbs()));
    if (std::abs(discrepancy) > tol) {
      VectorXd ray = VectorXd::Zero(m);
      ray[r] = G(r, r) > 0.0 ? scale[r] : 1.0;
      for (int a = 0; a < k; ++a) {
        const int i = indep[static_cast<std::size_t>(a)];
        ray[i] = -coef[a] * scale[i];
      }
      ray /= discrepancy;  // b'ray = 1
      out.inconsistency_ray = ray;
      return out;
    }
  }
  return out;
}

// Nesterov-Todd scaling of one block: W = G G', G^{-1} X G^{-T} = G' S G = diag(lam).
struct NtScaling {
  MatrixXd G;
  MatrixXd Ginv;
  MatrixXd W;
  VectorXd lam;
};

bool nt_scaling(const MatrixXd& X, const MatrixXd& S, NtScaling& out) {
  Eigen::LLT<MatrixXd> lx(X);
  Eigen::LLT<MatrixXd> ls(S);
  if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) return false;
  const MatrixXd Lx = lx.matrixL();
  const MatrixXd Ls = ls.matrixL();
  Eigen::JacobiSVD<MatrixXd> svd(Ls.transpose() * Lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXd sig = svd.singularValues();
  if (sig.minCoeff() <= 0.0 || !sig.allFinite()) return false;
  const MatrixXd& V = svd.matrixV();
  const VectorXd isq = sig.cwiseSqrt().cwiseInverse();
  out.G = Lx * V * isq.asDiagonal();
  const MatrixXd T = Lx.transpose().triangularView<Eigen::Upper>().solve(V);
  out.Ginv = (T * sig.cwiseSqrt().asDiagonal()).transpose();
  out.W = out.G * out.G.transpose();
  out.lam = sig;
  return true;
}

// Largest alpha with diag(lam) + alpha * D PSD (D given in scaled coordinates).
double max_step_scaled(const VectorXd& lam, const MatrixXd& D) {
  const VectorXd isq = lam.cwiseSqrt().cwiseInverse();
  MatrixXd T = isq.asDiagonal() * D * isq.asDiagonal();
  T = 0.5 * (T + T.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(T, Eigen::EigenvaluesOnly);
  const double e = es.eigenvalues().minCoeff();
  return e < 0.0 ? -1.0 / e : std::numeric_limits<double>::infinity();
}

struct Direction {
  Blocks dX;
  Blocks dS;
  VectorXd dy;
  VectorXd du;
  double dtau = 0.0;
  double dkappa = 0.0;
};

class HsdSolver {
 public:
  HsdSolver(const Compiled& d, const Options& opt) : d_(d), opt_(opt) {}

  Solution run();

 private:
  bool factorize();
  void solve_k(const VectorXd& r, const VectorXd& t, VectorXd& dy, VectorXd& du) const;
  Direction direction(const Blocks& Rc, double r_tk, double eta) const;
  double max_step(const Direction& dir) const;
  Solution finish(Status status, const std::string& msg, int iter);
  // Restores the most accurate iterate seen before reporting a failure.
  Solution fail(Status status, const std::string& msg, int iter);

  const Compiled& d_;
  const Options& opt_;

  Blocks X_, S_;
  VectorXd y_, u_;
  double tau_ = 1.0;
  double kappa_ = 1.0;

  struct Iterate {
    Blocks X, S;
    VectorXd y, u;
    double tau = 1.0;
    double kappa = 1.0;
  };
  Iterate best_;
  double best_merit_ = std::numeric_limits<double>::infinity();
  int best_iter_ = 0;

  // Residuals of the homogeneous model at the current iterate.
  VectorXd Rp_;
  Blocks Rd_;
  VectorXd Rf_;
  double Rg_ = 0.0;

  std::vector<NtScaling> nt_;
  MatrixXd M_;
  Eigen::LLT<MatrixXd> Mllt_;
  MatrixXd MiF_;
  Eigen::LDLT<MatrixXd> Sf_;
  Blocks WCW_;
  VectorXd g_;
  VectorXd y1_, u1_;
  double two_b_minus_g_y1_ = 0.0;
};

bool HsdSolver::factorize() {
  const int m = d_.m;
  M_.setZero(m, m);
  for (std::size_t blk = 0; blk < d_.dims.size(); ++blk) {
    const MatrixXd& W = nt_[blk].W;
    const auto& touching = d_.block_rows[blk];
    const std::size_t R = touching.size();
    for (std::size_t a = 0; a < R; ++a) {
      const auto [i, ri] = touching[a];
      const auto& Ei = d_.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(ri)].entries;
      for (std::size_t c = a; c < R; ++c) {
        const auto [j, rj] = touching[c];
        const auto& Ej = d_.rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(rj)].entries;
        double s = 0.0;
        for (const auto& ei : Ei) {
          for (const auto& ej : Ej) s += ei.v * ej.v * W(ei.q, ej.p) * W(ej.q, ei.p);
        }
        M_(i, j) += s;
        if (i != j) M_(j, i) += s;
      }
    }
  }
  Mllt_.compute(M_);
  if (Mllt_.info() != Eigen::Success) {
    const double base = std::max(1e-300, M_.diagonal().cwiseAbs().maxCoeff());
    bool ok = false;
    for (double rel = 1e-14; rel <= 1e-8; rel *= 100.0) {
      MatrixXd Mr = M_;
      Mr.diagonal().array() += rel * base;
      Mllt_.compute(Mr);
      if (Mllt_.info() == Eigen::Success) {
        ok = true;
        break;
      }
    }
    if (!ok) return false;
  }
  if (d_.nf > 0) {
    MiF_ = Mllt_.solve(d_.F);
    const MatrixXd Sf = d_.F.transpose() * MiF_;
    Sf_.compute(Sf);
    if (Sf_.info() != Eigen::Success) return false;
  }
  return true;
}

void HsdSolver::solve_k(const VectorXd& r, const VectorXd& t, VectorXd& dy, VectorXd& du) const {
  auto once = [&](const VectorXd& rr, const VectorXd& tt, VectorXd& y, VectorXd& u) {
    const VectorXd z = Mllt_.solve(rr);
    if (d_.nf > 0) {
      u = Sf_.solve(d_.F.transpose() * z - tt);
      y = z - MiF_ * u;
    } else {
      u = VectorXd::Zero(0);
      y = z;
    }
  };
  once(r, t, dy, du);
  // Iterative refinement against the unregularized system.
  for (int round = 0; round < 3; ++round) {
    VectorXd rr = r - M_ * dy;
    if (d_.nf > 0) rr -= d_.F * du;
    VectorXd tt = d_.nf > 0 ? VectorXd(t - d_.F.transpose() * dy) : VectorXd::Zero(0);
    const double err = std::sqrt(rr.squaredNorm() + tt.squaredNorm());
    if (err <= 1e-15 * (1.0 + std::sqrt(r.squaredNorm() + t.squaredNorm()))) break;
    VectorXd cy, cu;
    once(rr, tt, cy, cu);
    dy += cy;
    if (d_.nf > 0) du += cu;
  }
}

Direction HsdSolver::direction(const Blocks& Rc, double r_tk, double eta) const {
  const std::size_t nb = d_.dims.size();
  Blocks WRdW(nb);
  for (std::size_t k = 0; k < nb; ++k) WRdW[k] = nt_[k].W * Rd_[k] * nt_[k].W;

  const VectorXd r1 = -eta * Rp_ - apply_A(d_, Rc) + eta * apply_A(d_, WRdW);
  const VectorXd rf = eta * Rf_;
  VectorXd y0, u0;
  solve_k(r1, rf, y0, u0);

  const VectorXd two_b_minus_g = 2.0 * d_.b - g_;
  double num = -eta * Rg_ + inner(d_.C, Rc) - eta * inner(WCW_, Rd_) + r_tk / tau_ -
               y0.dot(two_b_minus_g);
  if (d_.nf > 0) num += d_.cf.dot(u0);
  double den = two_b_minus_g_y1_ + inner(d_.C, WCW_) + kappa_ / tau_;
  if (d_.nf > 0) den -= d_.cf.dot(u1_);

  Direction dir;
  dir.dtau = num / den;
  dir.dy = y0 + dir.dtau * y1_;
  dir.du = d_.nf > 0 ? VectorXd(u0 + dir.dtau * u1_) : VectorXd::Zero(0);
  const Blocks ATdy = apply_AT(d_, dir.dy);
  dir.dS.resize(nb);
  dir.dX.resize(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    dir.dS[k] = dir.dtau * d_.C[k] - ATdy[k] + eta * Rd_[k];
    dir.dX[k] = Rc[k] - nt_[k].W * dir.dS[k] * nt_[k].W;
    dir.dX[k] = 0.5 * (dir.dX[k] + dir.dX[k].transpose());
  }
  dir.dkappa = (r_tk - kappa_ * dir.dtau) / tau_;
  return dir;
}

double HsdSolver::max_step(const Direction& dir) const {
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < d_.dims.size(); ++k) {
    const auto& nt = nt_[k];
    const MatrixXd dXs = nt.Ginv * dir.dX[k] * nt.Ginv.transpose();
    const MatrixXd dSs = nt.G.transpose() * dir.dS[k] * nt.G;
    alpha = std::min(alpha, max_step_scaled(nt.lam, dXs));
    alpha = std::min(alpha, max_step_scaled(nt.lam, dSs));
  }
  if (dir.dtau < 0.0) alpha = std::min(alpha, -tau_ / dir.dtau);
  if (dir.dkappa < 0.0) alpha = std::min(alpha, -kappa_ / dir.dkappa);
  return alpha;
}

Solution HsdSolver::run() {
  const std::size_t nb = d_.dims.size();
  X_.clear();
  S_.clear();
  for (int n : d_.dims) {
    X_.push_back(MatrixXd::Identity(n, n));
    S_.push_back(MatrixXd::Identity(n, n));
  }
  y_ = VectorXd::Zero(d_.m);
  u_ = VectorXd::Zero(d_.nf);
  tau_ = 1.0;
  kappa_ = 1.0;
  nt_.resize(nb);
  WCW_.resize(nb);

  double cone_degree = 1.0;
  for (int n : d_.dims) cone_degree += n;
  const double bnorm = d_.b.norm();
  const double cnorm = std::sqrt(frob2(d_.C) + d_.cf.squaredNorm());

  int small_steps = 0;
  for (int iter = 0;; ++iter) {
    // Residuals of the homogeneous model.
    Rp_ = apply_A(d_, X_) - tau_ * d_.b;
    if (d_.nf > 0) Rp_ += d_.F * u_;
    const Blocks ATy = apply_AT(d_, y_);
    Rd_.resize(nb);
    for (std::size_t k = 0; k < nb; ++k) Rd_[k] = tau_ * d_.C[k] - ATy[k] - S_[k];
    Rf_ = d_.nf > 0 ? VectorXd(tau_ * d_.cf - d_.F.transpose() * y_) : VectorXd::Zero(0);
    const double cx = inner(d_.C, X_) + (d_.nf > 0 ? d_.cf.dot(u_) : 0.0);
    const double by = d_.b.dot(y_);
    Rg_ = by - cx - kappa_;

    if (!std::isfinite(cx) || !std::isfinite(by) || !std::isfinite(tau_)) {
      return fail(Status::NumericalFailure, "non-finite iterate", iter);
    }

    const double pres = Rp_.norm() / tau_ / (1.0 + bnorm);
    const double dres = std::sqrt(frob2(Rd_) + Rf_.squaredNorm()) / tau_ / (1.0 + cnorm);
    const double pobj = cx / tau_;
    const double dobj = by / tau_;
    const double merit = std::max({pres, dres, std::abs(pobj - dobj) / (1.0 + std::abs(pobj))});
    if (merit < best_merit_) {
      best_merit_ = merit;
      best_ = {X_, S_, y_, u_, tau_, kappa_};
      best_iter_ = iter;
    }
    if (pres <= opt_.feas_tol && dres <= opt_.feas_tol &&
        std::abs(pobj - dobj) <= opt_.gap_tol * (1.0 + std::abs(pobj))) {
      return finish(Status::Optimal, "", iter);
    }
    if (by > 0.0) {
      // Dual ray: A'y + S = tau C - Rd, F'y = tau c_f - Rf.
      double r2 = Rf_.squaredNorm();
      for (std::size_t k = 0; k < nb; ++k) r2 += (tau_ * d_.C[k] - Rd_[k]).squaredNorm();
      if (d_.nf > 0) r2 = r2 - Rf_.squaredNorm() + (tau_ * d_.cf - Rf_).squaredNorm();
      if (std::sqrt(r2) / by <= opt_.infeas_tol) {
        return finish(Status::PrimalInfeasible, "", iter);
      }
    }
    if (cx < 0.0) {
      const double r = (Rp_ + tau_ * d_.b).norm();
      if (r / (-cx) <= opt_.infeas_tol) {
        return finish(Status::DualInfeasibleOrUnbounded, "", iter);
      }
    }
    if (iter - best_iter_ > 25) return fail(Status::NumericalFailure, "no progress", iter);
    if (iter >= opt_.max_iter) return fail(Status::IterationLimit, "iteration limit reached", iter);

    for (std::size_t k = 0; k < nb; ++k) {
      if (!nt_scaling(X_[k], S_[k], nt_[k])) {
        return fail(Status::NumericalFailure, "lost positive definiteness", iter);
      }
      WCW_[k] = nt_[k].W * d_.C[k] * nt_[k].W;
    }
    if (!factorize()) return fail(Status::NumericalFailure, "Schur complement factorization failed", iter);

    g_ = apply_A(d_, WCW_) + d_.b;
    solve_k(g_, d_.cf, y1_, u1_);
    two_b_minus_g_y1_ = y1_.dot(2.0 * d_.b - g_);

    double mu = kappa_ * tau_;
    for (std::size_t k = 0; k < nb; ++k) mu += nt_[k].lam.squaredNorm();
    mu /= cone_degree;

    // Predictor: sigma = 0.
    Blocks Rc(nb);
    for (std::size_t k = 0; k < nb; ++k) Rc[k] = -X_[k];
    const Direction aff = direction(Rc, -tau_ * kappa_, 1.0);
    const double alpha_aff = std::min(1.0, max_step(aff));

    double mu_aff = (tau_ + alpha_aff * aff.dtau) * (kappa_ + alpha_aff * aff.dkappa);
    for (std::size_t k = 0; k < nb; ++k) {
      mu_aff += (X_[k] + alpha_aff * aff.dX[k]).cwiseProduct(S_[k] + alpha_aff * aff.dS[k]).sum();
    }
    mu_aff /= cone_degree;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    // Corrector with the Mehrotra second-order term, in scaled coordinates.
    for (std::size_t k = 0; k < nb; ++k) {
      const auto& nt = nt_[k];
      const MatrixXd dXs = nt.Ginv * aff.dX[k] * nt.Ginv.transpose();
      const MatrixXd dSs = nt.G.transpose() * aff.dS[k] * nt.G;
      MatrixXd rhs = -(dXs * dSs + dSs * dXs);
      const auto n = static_cast<Eigen::Index>(nt.lam.size());
      for (Eigen::Index i = 0; i < n; ++i) rhs(i, i) += 2.0 * (sigma * mu - nt.lam[i] * nt.lam[i]);
      MatrixXd R(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) R(i, j) = rhs(i, j) / (nt.lam[i] + nt.lam[j]);
      }
      R = 0.5 * (R + R.transpose());
      Rc[k] = nt.G * R * nt.G.transpose();
    }
    const double r_tk = sigma * mu - tau_ * kappa_ - aff.dtau * aff.dkappa;
    const Direction dir = direction(Rc, r_tk, 1.0 - sigma);
    const double amax = max_step(dir);
    double alpha = std::min(1.0, 0.98 * amax);
    if (!std::isfinite(alpha) || alpha <= 0.0) {
      return fail(Status::NumericalFailure, "no admissible step", iter);
    }
    if (opt_.verbose) {
      std::fprintf(stderr,
                   "it %3d pobj %+.10e dobj %+.10e pres %.2e dres %.2e mu %.2e tau %.2e kappa %.2e "
                   "sigma %.2e alpha %.3e\n",
                   iter, pobj, dobj, pres, dres, mu, tau_, kappa_, sigma, alpha);
    }
    small_steps = alpha < 1e-8 ? small_steps + 1 : 0;
    if (small_steps >= 3) return fail(Status::NumericalFailure, "step length stalled", iter);

    // Backtrack if rounding leaves a trial block indefinite.
    Blocks Xn(nb), Sn(nb);
    auto backtrack = [&](const Direction& dd, double& a) {
      for (int tries = 0; tries < 30; ++tries, a *= 0.7) {
        bool ok = true;
        for (std::size_t k = 0; k < nb && ok; ++k) {
          Xn[k] = X_[k] + a * dd.dX[k];
          Sn[k] = S_[k] + a * dd.dS[k];
          Xn[k] = 0.5 * (Xn[k] + Xn[k].transpose());
          Sn[k] = 0.5 * (Sn[k] + Sn[k].transpose());
          ok = Eigen::LLT<MatrixXd>(Xn[k]).info() == Eigen::Success &&
               Eigen::LLT<MatrixXd>(Sn[k]).info() == Eigen::Success;
        }
        if (ok) return true;
      }
      return false;
    };
    const Direction* step = &dir;
    Direction centering;
    if (!backtrack(dir, alpha)) {
      // The direction is inaccurate near the boundary. Fall back to a pure
      // centering step, which pushes the small eigenvalues back up.
      for (std::size_t k = 0; k < nb; ++k) {
        const auto& nt = nt_[k];
        const VectorXd diag = (mu - nt.lam.array().square()) / nt.lam.array();
        Rc[k] = nt.G * diag.asDiagonal() * nt.G.transpose();
      }
      centering = direction(Rc, mu - tau_ * kappa_, 0.0);
      alpha = std::min(1.0, 0.9 * max_step(centering));
      step = &centering;
      if (!std::isfinite(alpha) || alpha <= 0.0 || !backtrack(centering, alpha)) {
        return fail(Status::NumericalFailure, "lost positive definiteness", iter);
      }
    }
    X_ = std::move(Xn);
    S_ = std::move(Sn);
    y_ += alpha * step->dy;
    if (d_.nf > 0) u_ += alpha * step->du;
    tau_ += alpha * step->dtau;
    kappa_ += alpha * step->dkappa;
  }
}

Solution HsdSolver::fail(Status status, const std::string& msg, int iter) {
  if (best_merit_ < std::numeric_limits<double>::infinity()) {
    X_ = best_.X;
    S_ = best_.S;
    y_ = best_.y;
    u_ = best_.u;
    tau_ = best_.tau;
    kappa_ = best_.kappa;
  }
  return finish(status, msg, iter);
}

Solution HsdSolver::finish(Status status, const std::string& msg, int iter) {
  Solution s;
  s.status = status;
  s.iterations = iter;
  s.message = msg;
  const std::size_t nb = d_.dims.size();
  const double cx = inner(d_.C, X_) + (d_.nf > 0 ? d_.cf.dot(u_) : 0.0);
  const double by = d_.b.dot(y_);
  double xscale = 1.0 / tau_;
  double yscale = 1.0 / tau_;
  if (status == Status::PrimalInfeasible) {
    xscale = 0.0;
    yscale = 1.0 / by;
  } else if (status == Status::DualInfeasibleOrUnbounded) {
    xscale = 1.0 / (-cx);
    yscale = 0.0;
  }
  s.blocks.resize(nb);
  s.dual_slacks.resize(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    s.blocks[k] = X_[k] * xscale;
    s.dual_slacks[k] = S_[k] * yscale;
  }
  s.free_values.assign(static_cast<std::size_t>(d_.nf), 0.0);
  for (int j = 0; j < d_.nf; ++j) s.free_values[static_cast<std::size_t>(j)] = u_[j] * xscale;
  s.multipliers.assign(static_cast<std::size_t>(d_.m), 0.0);
  for (int i = 0; i < d_.m; ++i) s.multipliers[static_cast<std::size_t>(i)] = y_[i] * yscale;
  s.primal_objective = cx / tau_;
  s.dual_objective = by / tau_;
  s.gap = std::abs(s.primal_objective - s.dual_objective);
  if (status == Status::PrimalInfeasible) {
    s.primal_objective = std::numeric_limits<double>::infinity();
    s.dual_objective = std::numeric_limits<double>::infinity();
  } else if (status == Status::DualInfeasibleOrUnbounded) {
    s.primal_objective = -std::numeric_limits<double>::infinity();
    s.dual_objective = -std::numeric_limits<double>::infinity();
  }
  return s;
}

}  // namespace

Solution solve(const Problem& problem, const Options& options) {
  problem.validate();
  const int m0 = static_cast<int>(problem.constraints.size());
  const int nf0 = problem.free_vars;

  std::vector<EntryMap> upper(static_cast<std::size_t>(m0));
  MatrixXd F0 = MatrixXd::Zero(m0, nf0);
  VectorXd b0(m0);
  for (int i = 0; i < m0; ++i) {
    const auto& c = problem.constraints[static_cast<std::size_t>(i)];
    upper[static_cast<std::size_t>(i)] = merge_entries(c.entries);
    for (const auto& [j, v] : c.free_coefficients) F0(i, j) += v;
    b0[i] = c.rhs;
  }
  Blocks C0 = zeros_like(problem.block_dims);
  for (const auto& [key, v] : merge_entries(problem.objective)) {
    const auto [blk, r, c] = key;
    C0[static_cast<std::size_t>(blk)](r, c) += v;
    if (r != c) C0[static_cast<std::size_t>(blk)](c, r) += v;
  }
  const VectorXd cf0 = Eigen::Map<const VectorXd>(problem.free_objective.data(), nf0);

  auto fill_point_shapes = [&](Solution& s) {
    s.blocks = zeros_like(problem.block_dims);
    s.dual_slacks = zeros_like(problem.block_dims);
    s.free_values.assign(static_cast<std::size_t>(nf0), 0.0);
    s.multipliers.assign(static_cast<std::size_t>(m0), 0.0);
  };

  const RowReduction red = reduce_rows(upper, F0, b0);
  if (red.inconsistency_ray) {
    Solution s;
    fill_point_shapes(s);
    s.status = Status::PrimalInfeasible;
    s.primal_objective = s.dual_objective = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m0; ++i) s.multipliers[static_cast<std::size_t>(i)] = (*red.inconsistency_ray)[i];
    s.message = "linearly dependent constraints with inconsistent right-hand sides";
    return s;
  }

  // Free variables that appear in no kept row.
  std::vector<int> kept_free;
  for (int j = 0; j < nf0; ++j) {
    bool used = false;
    for (int i : red.independent) used = used || F0(i, j) != 0.0;
    if (used) {
      kept_free.push_back(j);
    } else if (cf0[j] != 0.0) {
      Solution s;
      fill_point_shapes(s);
      s.status = Status::DualInfeasibleOrUnbounded;
      s.primal_objective = s.dual_objective = -std::numeric_limits<double>::infinity();
      s.free_values[static_cast<std::size_t>(j)] = -1.0 / cf0[j];
      s.message = "free variable with nonzero cost appears in no constraint";
      return s;
    }
  }

  Compiled d;
  d.dims = problem.block_dims;
  d.m = static_cast<int>(red.independent.size());
  d.nf = static_cast<int>(kept_free.size());
  d.rows.resize(static_cast<std::size_t>(d.m));
  d.F = MatrixXd::Zero(d.m, d.nf);
  d.b = VectorXd(d.m);
  d.block_rows.resize(d.dims.size());
  for (int a = 0; a < d.m; ++a) {
    const int i = red.independent[static_cast<std::size_t>(a)];
    d.rows[static_cast<std::size_t>(a)] = expand(upper[static_cast<std::size_t>(i)]);
    for (int c = 0; c < d.nf; ++c) d.F(a, c) = F0(i, kept_free[static_cast<std::size_t>(c)]);
    d.b[a] = b0[i];
    const auto& rbs = d.rows[static_cast<std::size_t>(a)];
    for (std::size_t r = 0; r < rbs.size(); ++r) {
      d.block_rows[static_cast<std::size_t>(rbs[r].block)].emplace_back(a, static_cast<int>(r));
    }
  }
  d.C = C0;
  d.cf = VectorXd(d.nf);
  for (int c = 0; c < d.nf; ++c) d.cf[c] = cf0[kept_free[static_cast<std::size_t>(c)]];

  HsdSolver solver(d, options);
  Solution reduced = solver.run();

  // Map back to the original row and free-variable numbering.
  Solution s = reduced;
  s.free_values.assign(static_cast<std::size_t>(nf0), 0.0);
  for (int c = 0; c < d.nf; ++c) {
    s.free_values[static_cast<std::size_t>(kept_free[static_cast<std::size_t>(c)])] =
        reduced.free_values[static_cast<std::size_t>(c)];
  }
  s.multipliers.assign(static_cast<std::size_t>(m0), 0.0);
  for (int a = 0; a < d.m; ++a) {
    s.multipliers[static_cast<std::size_t>(red.independent[static_cast<std::size_t>(a)])] =
        reduced.multipliers[static_cast<std::size_t>(a)];
  }

  // Residuals against the original data.
  std::vector<std::vector<RowBlock>> all_rows(static_cast<std::size_t>(m0));
  for (int i = 0; i < m0; ++i) all_rows[static_cast<std::size_t>(i)] = expand(upper[static_cast<std::size_t>(i)]);
  Compiled full;
  full.dims = problem.block_dims;
  full.m = m0;
  full.rows = std::move(all_rows);
  const VectorXd u = Eigen::Map<const VectorXd>(s.free_values.data(), nf0);
  const VectorXd y = Eigen::Map<const VectorXd>(s.multipliers.data(), m0);
  const VectorXd Ax = apply_A(full, s.blocks) + F0 * u;
  const Blocks ATy = apply_AT(full, y);
  double dual2 = 0.0;
  double cert2 = 0.0;
  for (std::size_t k = 0; k < problem.block_dims.size(); ++k) {
    dual2 += (C0[k] - ATy[k] - s.dual_slacks[k]).squaredNorm();
    cert2 += (ATy[k] + s.dual_slacks[k]).squaredNorm();
  }
  const VectorXd Fty = F0.transpose() * y;
  dual2 += (cf0 - Fty).squaredNorm();
  cert2 += Fty.squaredNorm();
  const double cnorm = std::sqrt(frob2(C0) + cf0.squaredNorm());

  switch (s.status) {
    case Status::PrimalInfeasible:
      s.certificate_residual = std::sqrt(cert2);
      s.primal_residual = s.dual_residual = std::numeric_limits<double>::quiet_NaN();
      break;
    case Status::DualInfeasibleOrUnbounded:
      s.certificate_residual = Ax.norm();
      s.primal_residual = s.dual_residual = std::numeric_limits<double>::quiet_NaN();
      break;
    default:
      s.primal_residual = (Ax - b0).norm() / (1.0 + b0.norm());
      s.dual_residual = std::sqrt(dual2) / (1.0 + cnorm);
      break;
  }
  double min_eig = std::numeric_limits<double>::infinity();
  for (const auto& B : s.blocks) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(B, Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
  }
  s.min_primal_eigenvalue = s.blocks.empty() ? 0.0 : min_eig;
  if (s.status == Status::Optimal && min_eig < -options.psd_tol) {
    s.status = Status::NumericalFailure;
    s.message = "primal block not PSD within tolerance";
  }
  return s;
}

}  // namespace gpo::sdp
