#ifndef HFPD_SOLID_HPP
#define HFPD_SOLID_HPP

#include "hfpd/bonds.hpp"
#include "hfpd/core.hpp"
#include "hfpd/grid.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace hfpd {

enum class Mode { PlaneStrain, ThreeD };

struct SolidMaterial {
  double E = 0.0;    // Young's modulus [Pa]
  double nu = 0.0;   // Poisson's ratio
  double rho = 0.0;  // density [kg/m^3]
  double Gc = 0.0;   // critical energy release rate [J/m^2]

  double bulk() const { return E / (3.0 * (1.0 - 2.0 * nu)); }
  double shear() const { return E / (2.0 * (1.0 + nu)); }

  void validate() const {
    if (E <= 0.0) throw ConfigError("solid: Young's modulus must be positive");
    if (nu < 0.0 || nu >= 0.5) throw ConfigError("solid: Poisson's ratio must be in [0, 0.5)");
  }
};

/// Critical bond stretch from the mode-I energy release rate.
inline double critical_stretch(const SolidMaterial& mat, double horizon, Mode mode) {
  if (mat.Gc <= 0.0 || mat.E <= 0.0 || horizon <= 0.0)
    throw ConfigError("critical_stretch: Gc, E and horizon must be positive");
  const double denom = (mode == Mode::ThreeD) ? 6.0 : 12.0;
  return std::sqrt(5.0 * mat.Gc / (denom * mat.E * horizon));
}

inline double dilatation_factor(Mode mode) { return mode == Mode::ThreeD ? 3.0 : 2.0; }

/// Effective force density scalar state for one bond, given the node's
/// dilatation and the bond extension.
inline double force_scalar(double theta, double e, double w, double x, double m,
                           const SolidMaterial& mat, Mode mode) {
  const double kappa = mat.bulk();
  const double mu = mat.shear();
  const double e_dev = e - theta * x / 3.0;
  if (mode == Mode::ThreeD)
    return 3.0 * kappa * theta * w * x / m + 15.0 * mu * e_dev * w / m;
  return 2.0 * (kappa - mu / 3.0) * theta * w * x / m + 8.0 * mu * e_dev * w / m;
}

// The small-deformation extension keeps the force exactly linear in u, which
// the stiffness probe and the quasi-static solves rely on.
namespace detail {
inline double extension_lin(const Vec2& xi, double len, const double* ui, const double* uj) {
  return (xi.x() * (uj[0] - ui[0]) + xi.y() * (uj[1] - ui[1])) / len;
}
} // namespace detail

/// Nonlocal dilatation of every node (plane strain factor 2/m). Broken bonds
/// are excluded.
inline void compute_dilatation(const BondTable& bonds, const NodeGrid& grid,
                               const VecX& u, VecX& theta) {
  const int n = bonds.node_count();
  theta.resize(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int b = bonds.begin(i); b < bonds.end(i); ++b) {
      if (!bonds.intact[b]) continue;
      const int j = bonds.neighbor[b];
      const double e = detail::extension_lin(bonds.xi[b], bonds.length[b],
                                             u.data() + 2 * i, u.data() + 2 * j);
      acc += bonds.weight[b] * bonds.length[b] * e * grid.volumes[j];
    }
    theta[i] = 2.0 * acc / bonds.weighted_volume[i];
  }
}

/// Dilatation of a single node (test/inspection convenience).
inline double dilatation(const BondTable& bonds, const NodeGrid& grid, int node,
                         const VecX& u) {
  double acc = 0.0;
  for (int b = bonds.begin(node); b < bonds.end(node); ++b) {
    if (!bonds.intact[b]) continue;
    const int j = bonds.neighbor[b];
    const double e = detail::extension_lin(bonds.xi[b], bonds.length[b],
                                           u.data() + 2 * node, u.data() + 2 * j);
    acc += bonds.weight[b] * bonds.length[b] * e * grid.volumes[j];
  }
  return 2.0 * acc / bonds.weighted_volume[node];
}

/// Pore-pressure coupling force density (plane strain factor 2). The coupling
/// influence function is 1 and is normalized by the unweighted family volume;
/// the sum runs over the whole family, broken bonds included, so that fluid in
/// an open crack keeps pushing the faces apart.
inline void pore_pressure_force(const BondTable& bonds, const NodeGrid& grid,
                                const VecX& p, const VecX& alpha, VecX& force) {
  const int n = bonds.node_count();
  force.setZero(2 * n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i) {
    double fx = 0.0, fy = 0.0;
    const double ai_over_mi = alpha[i] * p[i] / bonds.coupling_volume[i];
    for (int b = bonds.begin(i); b < bonds.end(i); ++b) {
      const int j = bonds.neighbor[b];
      const double pair = ai_over_mi + alpha[j] * p[j] / bonds.coupling_volume[j];
      const double scale = -2.0 * pair * grid.volumes[j];
      fx += scale * bonds.xi[b].x();
      fy += scale * bonds.xi[b].y();
    }
    force[2 * i] = fx;
    force[2 * i + 1] = fy;
  }
}

/// Effective (drained) internal force density from the force scalar state.
inline void effective_force(const BondTable& bonds, const NodeGrid& grid,
                            const SolidMaterial& mat, const VecX& u, VecX& force,
                            VecX& theta_scratch) {
  compute_dilatation(bonds, grid, u, theta_scratch);
  const VecX& theta = theta_scratch;
  const double kappa = mat.bulk();
  const double mu = mat.shear();
  const double c_dil = 2.0 * (kappa - mu / 3.0);
  const int n = bonds.node_count();
  force.resize(2 * n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i) {
    double fx = 0.0, fy = 0.0;
    const double inv_mi = 1.0 / bonds.weighted_volume[i];
    for (int b = bonds.begin(i); b < bonds.end(i); ++b) {
      if (!bonds.intact[b]) continue;
      const int j = bonds.neighbor[b];
      const double x = bonds.length[b];
      const double w = bonds.weight[b];
      const double e = detail::extension_lin(bonds.xi[b], x,
                                             u.data() + 2 * i, u.data() + 2 * j);
      const double inv_mj = 1.0 / bonds.weighted_volume[j];
      const double ti = c_dil * theta[i] * w * x * inv_mi +
                        8.0 * mu * (e - theta[i] * x / 3.0) * w * inv_mi;
      const double tj = c_dil * theta[j] * w * x * inv_mj +
                        8.0 * mu * (e - theta[j] * x / 3.0) * w * inv_mj;
      const double scale = (ti + tj) / x * grid.volumes[j];
      fx += scale * bonds.xi[b].x();
      fy += scale * bonds.xi[b].y();
    }
    force[2 * i] = fx;
    force[2 * i + 1] = fy;
  }
}

/// Total internal force density: effective force state plus pore-pressure
/// coupling. Units N/m^3 per node.
inline void internal_force(const BondTable& bonds, const NodeGrid& grid,
                           const SolidMaterial& mat, const VecX& u, const VecX& p,
                           const VecX& alpha, VecX& force) {
  VecX theta;
  effective_force(bonds, grid, mat, u, force, theta);
  if (p.size() > 0 && p.cwiseAbs().maxCoeff() > 0.0) {
    VecX coupling;
    pore_pressure_force(bonds, grid, p, alpha, coupling);
    force += coupling;
  }
}

/// Current stretch of one bond from the deformed geometry. Throws on a
/// collapsed bond, which signals an unstable step.
inline double bond_stretch(const BondTable& bonds, int flat, int i, const VecX& u) {
  const int j = bonds.neighbor[flat];
  const Vec2 eta(u[2 * j] - u[2 * i], u[2 * j + 1] - u[2 * i + 1]);
  const Vec2 y = bonds.xi[flat] + eta;
  const double deformed = y.norm();
  if (deformed < 1e-14 * bonds.horizon)
    throw NumericalError("bond collapsed to zero deformed length");
  return (deformed - bonds.length[flat]) / bonds.length[flat];
}

struct FailureUpdate {
  int newly_broken = 0;
};

/// Break every bond whose stretch reached the critical value. Both half-bonds
/// are flagged; bonds never heal.
inline FailureUpdate update_failure(BondTable& bonds, const VecX& u, double s_c) {
  FailureUpdate result;
  const int n = bonds.node_count();
  for (int i = 0; i < n; ++i) {
    for (int b = bonds.begin(i); b < bonds.end(i); ++b) {
      if (!bonds.intact[b]) continue;
      if (bonds.neighbor[b] < i) continue; // visit each bond once
      if (bond_stretch(bonds, b, i, u) >= s_c) {
        bonds.break_bond(b);
        ++result.newly_broken;
      }
    }
  }
  return result;
}

/// Influence-weighted damage field, 0 (pristine) to 1 (fully disconnected).
inline void damage_field(const BondTable& bonds, const NodeGrid& grid, VecX& phi) {
  const int n = bonds.node_count();
  phi.resize(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i) {
    double num = 0.0, den = 0.0;
    for (int b = bonds.begin(i); b < bonds.end(i); ++b) {
      const double wv = bonds.weight[b] * grid.volumes[bonds.neighbor[b]];
      den += wv;
      if (bonds.intact[b]) num += wv;
    }
    phi[i] = den > 0.0 ? 1.0 - num / den : 1.0;
  }
}

} // namespace hfpd

#endif
