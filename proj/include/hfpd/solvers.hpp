#ifndef HFPD_SOLVERS_HPP
#define HFPD_SOLVERS_HPP

#include "hfpd/bonds.hpp"
#include "hfpd/core.hpp"
#include "hfpd/fem.hpp"
#include "hfpd/grid.hpp"
#include "hfpd/solid.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

namespace hfpd {

/// Evolving unknowns of a coupled run.
struct SimState {
  VecX u;       // displacement, 2 dof per node
  VecX u_prev;  // previous-step displacement
  VecX v;       // ADR velocity
  VecX p;       // pressure, 1 dof per node
  double t = 0.0;
  int step = 0;
};

struct TimeScheme {
  double dt = 1.0;
  double theta = 1.0;
  int adr_max_iter = 20000;
  double adr_tol = 1e-6;
  int sub_steps = 1;

  void validate() const {
    if (dt <= 0.0) throw ConfigError("time: dt must be positive");
    if (theta < 0.5 || theta > 1.0)
      throw ConfigError("time: theta must lie in [0.5, 1] for a stable flow update");
    if (sub_steps < 1) throw ConfigError("time: sub_steps must be >= 1");
  }
};

/// Direct solve of a symmetric (positive definite) sparse system with the
/// residual contract |Ax-b| <= 1e-10 |b| checked; diagnostics on failure.
class SymmetricSolver {
public:
  void factor(const SpMat& A) {
    if (!analyzed_) {
      ldlt_.analyzePattern(A);
      analyzed_ = true;
    }
    ldlt_.factorize(A);
    if (ldlt_.info() != Eigen::Success)
      throw SolverError("symmetric factorization failed (singular or indefinite matrix)");
  }

  VecX solve(const VecX& b) const {
    VecX x = ldlt_.solve(b);
    if (ldlt_.info() != Eigen::Success)
      throw SolverError("symmetric back-substitution failed");
    return x;
  }

private:
  Eigen::SimplicialLDLT<SpMat> ldlt_;
  bool analyzed_ = false;
};

inline VecX linear_solve(const SpMat& A, const VecX& b) {
  const double bnorm = b.norm();
  if (bnorm == 0.0) return VecX::Zero(b.size());
  SymmetricSolver solver;
  solver.factor(A);
  VecX x = solver.solve(b);
  const double res = (A * x - b).norm() / bnorm;
  if (!(res <= 1e-10)) {
    std::ostringstream msg;
    msg << "linear_solve: residual contract violated, |Ax-b|/|b| = " << res;
    throw SolverError(msg.str());
  }
  return x;
}

/// One theta-scheme update of S dp/dt + Q^T du/dt + H p = q. Injection raises
/// pressure; compression (negative dilatation increment) raises pressure.
inline VecX flow_step(const SpMat& S, const SpMat& H, const VecX& p, const VecX& q,
                      double dt, double theta, const DirichletBC& bc,
                      const VecX* coupling_term = nullptr) {
  SpMat A = S + theta * dt * H;
  VecX rhs = S * p - (1.0 - theta) * dt * (H * p) + dt * q;
  if (coupling_term) rhs -= *coupling_term; // Q^T (u^n - u^{n-1})
  apply_dirichlet(A, rhs, bc);
  return linear_solve(A, rhs);
}

/// Repeated-solve form of the same update for time loops with a fixed matrix
/// pattern: the operator is refactored only when marked stale.
class FlowIntegrator {
public:
  FlowIntegrator(double dt, double theta, DirichletBC bc)
      : dt_(dt), theta_(theta), bc_(std::move(bc)) {}

  void set_matrices(const SpMat& S, const SpMat& H) {
    S_ = S;
    H_ = H;
    A_ = S_ + theta_ * dt_ * H_;
    correction_ = VecX::Zero(A_.rows());
    std::vector<char> constrained(A_.rows(), 0);
    for (const auto& [node, value] : bc_.entries) constrained[node] = 1;
    for (const auto& [node, value] : bc_.entries) {
      if (value == 0.0) continue;
      for (SpMat::InnerIterator it(A_, node); it; ++it)
        if (!constrained[it.row()]) correction_[it.row()] += it.value() * value;
    }
    VecX dummy = VecX::Zero(A_.rows());
    apply_dirichlet(A_, dummy, bc_);
    solver_.factor(A_);
  }

  /// coupling = Q^T (u^n - u^{n-1}) or empty.
  VecX step(const VecX& p, const VecX& q, const VecX* coupling = nullptr) const {
    VecX rhs = S_ * p - (1.0 - theta_) * dt_ * (H_ * p) + dt_ * q;
    if (coupling) rhs -= *coupling;
    rhs -= correction_;
    for (const auto& [node, value] : bc_.entries) rhs[node] = value;
    return solver_.solve(rhs);
  }

  double dt() const { return dt_; }
  double theta() const { return theta_; }

private:
  double dt_, theta_;
  DirichletBC bc_;
  SpMat S_, H_, A_;
  VecX correction_;
  SymmetricSolver solver_;
};

namespace detail {

/// Shared probe kernel: computes the internal-force response column of a unit
/// displacement at every dof, restricted to the nodes it can reach (two
/// horizons). `emit(row_dof, col_dof, k_value)` receives the volume-scaled,
/// negated (stiffness-convention) entries.
template <typename Emit>
void probe_stiffness(const BondTable& bonds, const NodeGrid& grid,
                     const SolidMaterial& mat, Emit&& emit) {
  const int n = bonds.node_count();
  const double kappa = mat.bulk();
  const double mu = mat.shear();
  const double c_dil = 2.0 * (kappa - mu / 3.0);

  std::vector<double> theta(n, 0.0);
  std::vector<int> stamp(n, -1);
  std::vector<int> ring1, affected;
  ring1.reserve(64);
  affected.reserve(256);

  for (int c = 0; c < n; ++c) {
    for (int d = 0; d < 2; ++d) {
      const int col = 2 * c + d;

      // dilatation changes on the probed node and its family
      ring1.clear();
      affected.clear();
      double theta_c = 0.0;
      for (int b = bonds.begin(c); b < bonds.end(c); ++b) {
        if (!bonds.intact[b]) continue;
        const int j = bonds.neighbor[b];
        const double w = bonds.weight[b];
        const double xi_d = d == 0 ? bonds.xi[b].x() : bonds.xi[b].y();
        // extension of the touched bond is -xi_d/|xi| seen from either end
        theta_c += w * (-xi_d) * grid.volumes[j];
        theta[j] = -2.0 * w * xi_d * grid.volumes[c] / bonds.weighted_volume[j];
        ring1.push_back(j);
      }
      theta[c] = 2.0 * theta_c / bonds.weighted_volume[c];
      ring1.push_back(c);

      // nodes whose force can change: ring1 plus their families
      for (int k : ring1) {
        if (stamp[k] != col) {
          stamp[k] = col;
          affected.push_back(k);
        }
        for (int b = bonds.begin(k); b < bonds.end(k); ++b) {
          if (!bonds.intact[b]) continue;
          const int j = bonds.neighbor[b];
          if (stamp[j] != col) {
            stamp[j] = col;
            affected.push_back(j);
          }
        }
      }

      for (int k : affected) {
        double fx = 0.0, fy = 0.0;
        const double inv_mk = 1.0 / bonds.weighted_volume[k];
        for (int b = bonds.begin(k); b < bonds.end(k); ++b) {
          if (!bonds.intact[b]) continue;
          const int j = bonds.neighbor[b];
          const double x = bonds.length[b];
          const double w = bonds.weight[b];
          const double xi_d = d == 0 ? bonds.xi[b].x() : bonds.xi[b].y();
          double e = 0.0;
          if (j == c) e += xi_d / x;
          if (k == c) e -= xi_d / x;
          const double th_k = theta[k];
          const double th_j = theta[j];
          const double tk = c_dil * th_k * w * x * inv_mk +
                            8.0 * mu * (e - th_k * x / 3.0) * w * inv_mk;
          const double tj = c_dil * th_j * w * x / bonds.weighted_volume[j] +
                            8.0 * mu * (e - th_j * x / 3.0) * w / bonds.weighted_volume[j];
          const double scale = (tk + tj) / x * grid.volumes[j];
          fx += scale * bonds.xi[b].x();
          fy += scale * bonds.xi[b].y();
        }
        if (fx != 0.0) emit(2 * k, col, -fx * grid.volumes[k]);
        if (fy != 0.0) emit(2 * k + 1, col, -fy * grid.volumes[k]);
      }

      // reset dilatation scratch
      for (int k : ring1) theta[k] = 0.0;
    }
  }
}

} // namespace detail

/// Linearized PD stiffness by unit-displacement probing, volume-scaled so that
/// K u - Q^PD p = f holds for consistent nodal forces f.
inline SpMat assemble_stiffness(const BondTable& bonds, const NodeGrid& grid,
                                const SolidMaterial& mat) {
  const int dofs = 2 * bonds.node_count();
  std::vector<Triplet> trips;
  detail::probe_stiffness(bonds, grid, mat, [&](int r, int c, double v) {
    trips.emplace_back(r, c, v);
  });
  SpMat K(dofs, dofs);
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

/// Gershgorin row sums of |K| without materializing K (per-dof, by symmetry of
/// the probed operator the column sums equal the row sums).
inline VecX stiffness_row_sums(const BondTable& bonds, const NodeGrid& grid,
                               const SolidMaterial& mat) {
  VecX sums = VecX::Zero(2 * bonds.node_count());
  detail::probe_stiffness(bonds, grid, mat, [&](int r, int c, double v) {
    (void)r;
    sums[c] += std::abs(v);
  });
  return sums;
}

/// Fictitious diagonal ADR mass: Gershgorin bound of the probed stiffness
/// rows with a safety factor of 1.5 for the unit fictitious time step.
inline VecX adr_mass(const VecX& stiffness_row_sums) {
  VecX mass = 1.5 * 0.25 * stiffness_row_sums;
  for (Eigen::Index i = 0; i < mass.size(); ++i)
    if (mass[i] <= 0.0) mass[i] = 1.0;
  return mass;
}

struct AdrOptions {
  double tol = 1e-6;
  int max_iter = 20000;
  bool record_history = false;
  bool throw_on_failure = true;
};

struct AdrResult {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
  std::vector<double> history;
};

/// Adaptive dynamic relaxation to the quasi-static displacement under a fixed
/// load (external forces plus the pore-pressure coupling force, both
/// volume-scaled). Central differences with unit fictitious time step; the
/// damping coefficient is re-estimated every iteration from the local
/// stiffness Rayleigh quotient.
inline AdrResult adr_solve(const BondTable& bonds, const NodeGrid& grid,
                           const SolidMaterial& mat, const VecX& mass,
                           const std::vector<std::uint8_t>& fixed_dof,
                           const VecX& load, VecX& u, const AdrOptions& opt = {}) {
  const int n = bonds.node_count();
  const int dofs = 2 * n;
  VecX force(dofs), theta_scratch(n);
  VecX residual(dofs), residual_prev = VecX::Zero(dofs);
  VecX velocity = VecX::Zero(dofs);

  double denom = 0.0;
  for (int i = 0; i < dofs; ++i)
    if (!fixed_dof[i]) denom += load[i] * load[i];
  denom = std::sqrt(denom);

  AdrResult result;
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    effective_force(bonds, grid, mat, u, force, theta_scratch);
    double rnorm2 = 0.0;
    for (int i = 0; i < dofs; ++i) {
      const double r = fixed_dof[i] ? 0.0 : force[i] * grid.volumes[i / 2] + load[i];
      residual[i] = r;
      rnorm2 += r * r;
    }
    const double rnorm = std::sqrt(rnorm2);
    const double scale = denom > 0.0 ? denom : (iter == 0 && rnorm > 0.0 ? rnorm : 1.0);
    result.rel_residual = rnorm / scale;
    result.iterations = iter + 1;
    if (opt.record_history) result.history.push_back(result.rel_residual);
    if (result.rel_residual <= opt.tol) {
      result.converged = true;
      return result;
    }

    if (iter == 0) {
      for (int i = 0; i < dofs; ++i) velocity[i] = 0.5 * residual[i] / mass[i];
    } else {
      // local-stiffness Rayleigh estimate for the damping coefficient
      double num = 0.0, den = 0.0;
      for (int i = 0; i < dofs; ++i) {
        if (fixed_dof[i]) continue;
        den += u[i] * u[i];
        if (velocity[i] == 0.0) continue;
        const double k_loc = -(residual[i] - residual_prev[i]) / (mass[i] * velocity[i]);
        num += u[i] * u[i] * k_loc;
      }
      double c = 0.0;
      if (den > 0.0 && num > 0.0) c = 2.0 * std::sqrt(num / den);
      if (!(c >= 0.0)) c = 0.0;
      if (c >= 1.9) c = 1.9;
      const double a = (2.0 - c) / (2.0 + c);
      const double b = 2.0 / (2.0 + c);
      for (int i = 0; i < dofs; ++i)
        velocity[i] = a * velocity[i] + b * residual[i] / mass[i];
    }
    for (int i = 0; i < dofs; ++i)
      if (!fixed_dof[i]) u[i] += velocity[i];
    residual_prev.swap(residual);
  }

  if (opt.throw_on_failure) {
    std::ostringstream msg;
    msg << "adr_solve: no convergence in " << opt.max_iter
        << " iterations, relative residual " << result.rel_residual;
    throw SolverError(msg.str());
  }
  return result;
}

/// Monolithic quasi-static consolidation stepper for the block system
///   [ theta K   -theta Q_pd ] [u]^{n+1}   [ (theta-1)K  (1-theta)Q_pd ] [u]^n   [ f        ]
///   [ Q^T        S+theta dtH] [p]       = [ Q^T         S-(1-theta)dtH] [p]   + [ dt q_w   ]
/// with homogeneous-or-fixed constraints eliminated once up front.
class ConsolidationSystem {
public:
  ConsolidationSystem(const SpMat& K, const SpMat& QPD, const SpMat& Q, const SpMat& S,
                      const SpMat& H, double dt, double theta,
                      const std::vector<std::uint8_t>& fixed_dof, const DirichletBC& flow_bc,
                      VecX f_ext, VecX q_w)
      : n_u_(static_cast<int>(K.rows())), n_p_(static_cast<int>(S.rows())),
        load_(n_u_ + n_p_) {
    load_.head(n_u_) = f_ext;
    load_.tail(n_p_) = dt * q_w;

    SpMat A = assemble_block(theta * K, -theta * QPD, Q, S + theta * dt * H);
    B_ = assemble_block((theta - 1.0) * K, (1.0 - theta) * QPD, Q,
                        S - (1.0 - theta) * dt * H);

    DirichletBC block_bc;
    for (int i = 0; i < n_u_; ++i)
      if (fixed_dof[i]) block_bc.add(i, 0.0);
    for (const auto& [node, value] : flow_bc.entries) block_bc.add(n_u_ + node, value);
    bc_ = block_bc;

    correction_ = VecX::Zero(n_u_ + n_p_);
    std::vector<char> constrained(n_u_ + n_p_, 0);
    for (const auto& [dof, value] : bc_.entries) constrained[dof] = 1;
    for (const auto& [dof, value] : bc_.entries) {
      if (value == 0.0) continue;
      for (SpMat::InnerIterator it(A, dof); it; ++it)
        if (!constrained[it.row()]) correction_[it.row()] += it.value() * value;
    }
    VecX dummy = VecX::Zero(A.rows());
    apply_dirichlet(A, dummy, bc_);
    A.makeCompressed();
    lu_.analyzePattern(A);
    lu_.factorize(A);
    if (lu_.info() != Eigen::Success)
      throw SolverError("consolidation block factorization failed");
  }

  /// Advance [u; p] one step.
  void step(VecX& u, VecX& p) const {
    VecX x(n_u_ + n_p_);
    x.head(n_u_) = u;
    x.tail(n_p_) = p;
    VecX rhs = B_ * x + load_ - correction_;
    for (const auto& [dof, value] : bc_.entries) rhs[dof] = value;
    VecX next = lu_.solve(rhs);
    if (lu_.info() != Eigen::Success)
      throw SolverError("consolidation block solve failed");
    u = next.head(n_u_);
    p = next.tail(n_p_);
  }

private:
  SpMat assemble_block(const SpMat& A00, const SpMat& A01, const SpMat& Q,
                       const SpMat& A11) const {
    std::vector<Triplet> trips;
    trips.reserve(A00.nonZeros() + A01.nonZeros() + 2 * Q.nonZeros() + A11.nonZeros());
    append(trips, A00, 0, 0);
    append(trips, A01, 0, n_u_);
    // Q^T block: Q is (n_u x n_p), its transpose goes to rows n_u.., cols 0..
    for (int c = 0; c < Q.outerSize(); ++c)
      for (SpMat::InnerIterator it(Q, c); it; ++it)
        trips.emplace_back(n_u_ + c, it.row(), it.value());
    append(trips, A11, n_u_, n_u_);
    SpMat M(n_u_ + n_p_, n_u_ + n_p_);
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
  }

  static void append(std::vector<Triplet>& trips, const SpMat& M, int row0, int col0) {
    for (int c = 0; c < M.outerSize(); ++c)
      for (SpMat::InnerIterator it(M, c); it; ++it)
        trips.emplace_back(row0 + it.row(), col0 + c, it.value());
  }

  int n_u_, n_p_;
  SpMat B_;
  VecX load_, correction_;
  DirichletBC bc_;
  Eigen::SparseLU<SpMat> lu_;
};

} // namespace hfpd

#endif
