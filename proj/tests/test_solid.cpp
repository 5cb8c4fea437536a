#include "hfpd/oracles.hpp"
#include "hfpd/solid.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hfpd;

namespace {

struct Lattice {
  NodeGrid grid;
  BondTable bonds;
};

Lattice make_lattice(int nx, int ny, double dx, int m_ratio = 3) {
  GridConfig cfg{nx * dx, ny * dx, dx, m_ratio, 1.0};
  Lattice l{build_grid(cfg), {}};
  l.bonds = build_bonds(l.grid, cfg.horizon());
  return l;
}

double pd_energy(const Lattice& l, const SolidMaterial& mat, const VecX& u) {
  VecX f, theta;
  effective_force(l.bonds, l.grid, mat, u, f, theta);
  double w = 0.0;
  for (int i = 0; i < l.grid.node_count(); ++i) {
    w -= 0.5 * (u[2 * i] * f[2 * i] + u[2 * i + 1] * f[2 * i + 1]) * l.grid.volumes[i];
  }
  return w;
}

} // namespace

TEST(CriticalStretch, PaperSpotValues) {
  SolidMaterial steel{210e9, 0.3, 7800.0, 2700.0};
  const double sc = critical_stretch(steel, 0.03, Mode::PlaneStrain);
  EXPECT_NEAR(sc, 4.2258e-4, 1e-4 * 4.2258e-4);
  EXPECT_NEAR(critical_stretch(steel, 0.03, Mode::ThreeD), std::sqrt(2.0) * sc, 1e-12);

  SolidMaterial soft{1e8, 0.2, 1000.0, 100.0};
  EXPECT_NEAR(critical_stretch(soft, 0.03, Mode::PlaneStrain),
              std::sqrt(500.0 / (12.0 * 1e8 * 0.03)), 1e-15);
  EXPECT_THROW(critical_stretch(SolidMaterial{0.0, 0.0, 0.0, 1.0}, 0.03, Mode::PlaneStrain),
               ConfigError);
}

TEST(Dilatation, ZeroAndRigidMotion) {
  Lattice l = make_lattice(8, 8, 0.1);
  VecX u = VecX::Zero(2 * l.grid.node_count());
  VecX theta;
  compute_dilatation(l.bonds, l.grid, u, theta);
  EXPECT_NEAR(theta.cwiseAbs().maxCoeff(), 0.0, 1e-16);

  for (int i = 0; i < l.grid.node_count(); ++i) {
    u[2 * i] = 0.37;
    u[2 * i + 1] = -1.4;
  }
  compute_dilatation(l.bonds, l.grid, u, theta);
  EXPECT_NEAR(theta.cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Dilatation, UniformExpansionGivesTwoEps) {
  Lattice l = make_lattice(8, 8, 0.1);
  const double eps = 1e-4;
  VecX u(2 * l.grid.node_count());
  for (int i = 0; i < l.grid.node_count(); ++i) {
    u[2 * i] = eps * l.grid.positions[i].x();
    u[2 * i + 1] = eps * l.grid.positions[i].y();
  }
  VecX theta;
  compute_dilatation(l.bonds, l.grid, u, theta);
  for (int i = 0; i < theta.size(); ++i) EXPECT_NEAR(theta[i], 2.0 * eps, 1e-12);
  EXPECT_NEAR(dilatation(l.bonds, l.grid, 0, u), 2.0 * eps, 1e-12);
}

TEST(ForceScalar, UnloadedAndUniformExpansion) {
  SolidMaterial mat{1e8, 0.25, 1000.0, 100.0};
  EXPECT_DOUBLE_EQ(force_scalar(0.0, 0.0, 0.7, 0.1, 2.0, mat, Mode::PlaneStrain), 0.0);

  const double eps = 1e-3, w = 0.62, x = 0.08, m = 1.7;
  const double kappa = mat.bulk(), mu = mat.shear();
  const double expected = (4.0 * (kappa - mu / 3.0) + 8.0 * mu / 3.0) * eps * w * x / m;
  EXPECT_NEAR(force_scalar(2.0 * eps, eps * x, w, x, m, mat, Mode::PlaneStrain), expected,
              1e-12 * std::abs(expected));

  // 3D form: t = 3 kappa theta w x / m + 15 mu (e - theta x / 3) w / m
  const double theta = 3.0 * eps;
  const double t3d = force_scalar(theta, eps * x, w, x, m, mat, Mode::ThreeD);
  const double expected3d =
      3.0 * kappa * theta * w * x / m + 15.0 * mu * (eps * x - theta * x / 3.0) * w / m;
  EXPECT_NEAR(t3d, expected3d, 1e-12 * std::abs(expected3d));
}

TEST(InternalForce, InteriorNodeFreeUnderUniformExpansion) {
  // brute-force pair summation over an independent lattice model
  const int n = 15;
  const double dx = 0.2, delta = 3 * dx, eps = 1e-4;
  const double V = dx * dx;
  SolidMaterial mat{1e8, 0.25, 1000.0, 100.0};
  const double kappa = mat.bulk(), mu = mat.shear();

  auto weighted_volume = [&](int cx, int cy) {
    double m = 0.0;
    for (int jy = 0; jy < n; ++jy)
      for (int jx = 0; jx < n; ++jx) {
        if (jx == cx && jy == cy) continue;
        const double r = dx * std::hypot(jx - cx, jy - cy);
        if (r > delta * (1 + 1e-12)) continue;
        m += std::exp(-r * r / (delta * delta)) * r * r * V;
      }
    return m;
  };

  const int c = n / 2;
  Vec2 force = Vec2::Zero();
  const double m_c = weighted_volume(c, c);
  for (int jy = 0; jy < n; ++jy)
    for (int jx = 0; jx < n; ++jx) {
      if (jx == c && jy == c) continue;
      const Vec2 xi((jx - c) * dx, (jy - c) * dx);
      const double r = xi.norm();
      if (r > delta * (1 + 1e-12)) continue;
      const double w = std::exp(-r * r / (delta * delta));
      const double m_j = weighted_volume(jx, jy);
      const double e = eps * r; // uniform expansion
      const double theta = 2.0 * eps;
      const double ti = 2.0 * (kappa - mu / 3.0) * theta * w * r / m_c +
                        8.0 * mu * (e - theta * r / 3.0) * w / m_c;
      const double tj = 2.0 * (kappa - mu / 3.0) * theta * w * r / m_j +
                        8.0 * mu * (e - theta * r / 3.0) * w / m_j;
      force += (ti + tj) / r * V * xi;
    }
  EXPECT_NEAR(force.norm(), 0.0, 1e-10 * mat.E * eps);

  // implementation agrees
  Lattice l = make_lattice(n - 1, n - 1, dx);
  VecX u(2 * l.grid.node_count());
  for (int i = 0; i < l.grid.node_count(); ++i) {
    u[2 * i] = eps * l.grid.positions[i].x();
    u[2 * i + 1] = eps * l.grid.positions[i].y();
  }
  VecX f, theta_scratch;
  effective_force(l.bonds, l.grid, mat, u, f, theta_scratch);
  const int center = l.grid.id(c, c);
  EXPECT_NEAR(std::hypot(f[2 * center], f[2 * center + 1]), 0.0, 1e-10 * mat.E * eps / dx);
}

TEST(PorePressure, ZeroPressureZeroForce) {
  Lattice l = make_lattice(4, 4, 0.25);
  VecX p = VecX::Zero(l.grid.node_count());
  VecX alpha = VecX::Ones(l.grid.node_count());
  VecX f;
  pore_pressure_force(l.bonds, l.grid, p, alpha, f);
  EXPECT_DOUBLE_EQ(f.cwiseAbs().maxCoeff(), 0.0);
}

TEST(PorePressure, TwoNodePairEqualOpposite) {
  // hand-built two-node table with unequal volumes
  NodeGrid grid;
  grid.nx = 1;
  grid.ny = 0;
  grid.dx = 1.0;
  grid.positions = {Vec2(0, 0), Vec2(1, 0)};
  grid.volumes = {2.0, 3.0};

  BondTable bonds;
  bonds.horizon = 1.5;
  bonds.offsets = {0, 1, 2};
  bonds.neighbor = {1, 0};
  bonds.reverse = {1, 0};
  bonds.xi = {Vec2(1, 0), Vec2(-1, 0)};
  bonds.length = {1.0, 1.0};
  bonds.weight = {1.0, 1.0};
  bonds.intact = {1, 1};
  bonds.weighted_volume = {3.0, 2.0};
  bonds.coupling_volume = {3.0, 2.0};

  VecX p(2), alpha(2);
  p << 5e6, 5e6;
  alpha << 1.0, 1.0;
  VecX f;
  pore_pressure_force(bonds, grid, p, alpha, f);
  // volume-scaled forces cancel
  EXPECT_NEAR(f[0] * grid.volumes[0] + f[2] * grid.volumes[1], 0.0, 1e-9);
  EXPECT_NEAR(f[1], 0.0, 1e-20);
  EXPECT_NEAR(f[3], 0.0, 1e-20);
  EXPECT_LT(f[0], 0.0); // pushed apart
  EXPECT_GT(f[2], 0.0);
}

TEST(PorePressure, UniformPressureFreeBody) {
  // 5x5 lattice: zero net force, boundary nodes pushed outward
  Lattice l = make_lattice(4, 4, 0.25, 2);
  const int n = l.grid.node_count();
  VecX p = VecX::Constant(n, 2e6);
  VecX alpha = VecX::Ones(n);
  VecX f;
  pore_pressure_force(l.bonds, l.grid, p, alpha, f);

  Vec2 net = Vec2::Zero();
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    net += Vec2(f[2 * i], f[2 * i + 1]) * l.grid.volumes[i];
    scale += Vec2(f[2 * i], f[2 * i + 1]).norm() * l.grid.volumes[i];
  }
  EXPECT_NEAR(net.norm(), 0.0, 1e-10 * std::max(scale, 1.0));

  const int left_mid = l.grid.id(0, 2);
  const int right_mid = l.grid.id(4, 2);
  const int bottom_mid = l.grid.id(2, 0);
  EXPECT_LT(f[2 * left_mid], 0.0);
  EXPECT_GT(f[2 * right_mid], 0.0);
  EXPECT_LT(f[2 * bottom_mid + 1], 0.0);

  // interior node of a uniform field carries no coupling force
  const int center = l.grid.id(2, 2);
  EXPECT_NEAR(std::hypot(f[2 * center], f[2 * center + 1]), 0.0, 1e-9 * 2e6);
}

TEST(InternalForce, ZeroStateAndRigidTranslation) {
  Lattice l = make_lattice(6, 6, 0.2);
  const int n = l.grid.node_count();
  SolidMaterial mat{1e8, 0.2, 1000.0, 100.0};
  VecX u = VecX::Zero(2 * n);
  VecX p = VecX::Zero(n);
  VecX alpha = VecX::Constant(n, 1.0);
  VecX f;
  internal_force(l.bonds, l.grid, mat, u, p, alpha, f);
  EXPECT_DOUBLE_EQ(f.cwiseAbs().maxCoeff(), 0.0);

  for (int i = 0; i < n; ++i) {
    u[2 * i] = 1e-3;
    u[2 * i + 1] = -2e-3;
  }
  internal_force(l.bonds, l.grid, mat, u, p, alpha, f);
  EXPECT_NEAR(f.cwiseAbs().maxCoeff(), 0.0, 1e-9);
}

TEST(InternalForce, GlobalBalanceOnRandomStates) {
  Lattice l = make_lattice(5, 5, 0.2); // 6x6 nodes
  const int n = l.grid.node_count();
  SolidMaterial mat{1e8, 0.3, 1000.0, 100.0};
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    VecX u(2 * n), p(n), alpha(n);
    for (int i = 0; i < 2 * n; ++i) u[i] = 1e-4 * dist(rng);
    for (int i = 0; i < n; ++i) p[i] = 1e6 * dist(rng);
    for (int i = 0; i < n; ++i) alpha[i] = 0.5 + 0.5 * std::abs(dist(rng));
    VecX f;
    internal_force(l.bonds, l.grid, mat, u, p, alpha, f);
    Vec2 net = Vec2::Zero();
    double scale = 0.0;
    for (int i = 0; i < n; ++i) {
      net += Vec2(f[2 * i], f[2 * i + 1]) * l.grid.volumes[i];
      scale += Vec2(f[2 * i], f[2 * i + 1]).norm() * l.grid.volumes[i];
    }
    EXPECT_NEAR(net.norm(), 0.0, 1e-10 * scale);
  }
}

TEST(InternalForce, ExactLinearity) {
  Lattice l = make_lattice(4, 5, 0.25);
  const int n = l.grid.node_count();
  SolidMaterial mat{5e7, 0.33, 1000.0, 100.0};
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  VecX u1(2 * n), u2(2 * n), p1(n), p2(n), alpha(n);
  for (int i = 0; i < 2 * n; ++i) {
    u1[i] = 1e-4 * dist(rng);
    u2[i] = 1e-4 * dist(rng);
  }
  for (int i = 0; i < n; ++i) {
    p1[i] = 1e5 * dist(rng);
    p2[i] = 1e5 * dist(rng);
    alpha[i] = 0.8;
  }
  const double a = 1.75, b = -0.5;
  VecX fa, fb, fc;
  internal_force(l.bonds, l.grid, mat, u1, p1, alpha, fa);
  internal_force(l.bonds, l.grid, mat, u2, p2, alpha, fb);
  VecX ucomb = a * u1 + b * u2;
  VecX pcomb = a * p1 + b * p2;
  internal_force(l.bonds, l.grid, mat, ucomb, pcomb, alpha, fc);
  const double scale = fc.cwiseAbs().maxCoeff();
  EXPECT_NEAR((fc - a * fa - b * fb).cwiseAbs().maxCoeff(), 0.0, 1e-12 * scale);
}

TEST(InternalForce, RotationForcesQuadraticEnergyQuartic) {
  Lattice l = make_lattice(6, 6, 0.2);
  const int n = l.grid.node_count();
  SolidMaterial mat{1e8, 0.25, 1000.0, 100.0};
  const Vec2 center(0.6, 0.6);

  auto rotation_u = [&](double phi) {
    VecX u(2 * n);
    const double c = std::cos(phi), s = std::sin(phi);
    for (int i = 0; i < n; ++i) {
      const Vec2 r = l.grid.positions[i] - center;
      u[2 * i] = c * r.x() - s * r.y() - r.x();
      u[2 * i + 1] = s * r.x() + c * r.y() - r.y();
    }
    return u;
  };

  const double phi = 1e-3;
  VecX f1, f2, theta;
  effective_force(l.bonds, l.grid, mat, rotation_u(phi), f1, theta);
  effective_force(l.bonds, l.grid, mat, rotation_u(phi / 2), f2, theta);
  const double ratio_f = f1.cwiseAbs().maxCoeff() / f2.cwiseAbs().maxCoeff();
  EXPECT_NEAR(ratio_f, 4.0, 0.05); // forces O(phi^2)

  const double w1 = pd_energy(l, mat, rotation_u(phi));
  const double w2 = pd_energy(l, mat, rotation_u(phi / 2));
  EXPECT_NEAR(w1 / w2, 16.0, 0.2); // energy O(phi^4)
}

TEST(Failure, ThresholdAndMonotonicity) {
  Lattice l = make_lattice(6, 6, 0.2);
  const int n = l.grid.node_count();
  const double s_c = 1e-3;

  // stretch below critical: nothing breaks
  VecX u(2 * n);
  for (int i = 0; i < n; ++i) {
    u[2 * i] = 0.4 * s_c * l.grid.positions[i].x();
    u[2 * i + 1] = 0.0;
  }
  auto r0 = update_failure(l.bonds, u, s_c);
  EXPECT_EQ(r0.newly_broken, 0);
  VecX phi;
  damage_field(l.bonds, l.grid, phi);
  EXPECT_DOUBLE_EQ(phi.cwiseAbs().maxCoeff(), 0.0);

  // large uniform stretch: every bond with a horizontal component breaks
  for (int i = 0; i < n; ++i) u[2 * i] = 10.0 * s_c * l.grid.positions[i].x();
  auto r1 = update_failure(l.bonds, u, s_c);
  EXPECT_GT(r1.newly_broken, 0);
  damage_field(l.bonds, l.grid, phi);
  const VecX phi_after_break = phi;

  // relaxing the body must not heal bonds
  u.setZero();
  auto r2 = update_failure(l.bonds, u, s_c);
  EXPECT_EQ(r2.newly_broken, 0);
  damage_field(l.bonds, l.grid, phi);
  for (int i = 0; i < n; ++i) EXPECT_GE(phi[i] + 1e-15, phi_after_break[i]);
}

TEST(Failure, AllBondsBrokenGivesFullDamage) {
  Lattice l = make_lattice(4, 4, 0.25);
  for (int b = 0; b < l.bonds.bond_count(); ++b) l.bonds.intact[b] = 0;
  VecX phi;
  damage_field(l.bonds, l.grid, phi);
  for (int i = 0; i < phi.size(); ++i) EXPECT_DOUBLE_EQ(phi[i], 1.0);
}

TEST(Failure, CollapsedBondIsHardError) {
  Lattice l = make_lattice(2, 2, 0.5, 2);
  VecX u = VecX::Zero(2 * l.grid.node_count());
  // move node 1 exactly onto node 0
  u[2 * 1] = -0.5;
  EXPECT_THROW(update_failure(l.bonds, u, 1e-3), NumericalError);
}

TEST(Damage, GeometricCurveAgainstDiscreteCrack) {
  // continuum endpoints
  EXPECT_NEAR(oracles::continuum_damage(0.0, 0.03), 0.5, 1e-12);
  EXPECT_NEAR(oracles::continuum_damage(0.03, 0.03), 0.0, 1e-12);
  EXPECT_NEAR(oracles::continuum_damage(0.015, 0.03),
              (std::acos(-0.5) - std::sqrt(3.0) / 2.0) / (2.0 * M_PI), 1e-12);

  // discrete face-row damage vs the continuum value at half a spacing
  const int nx = 20, ny = 12;
  const double dx = 0.1;
  Lattice l = make_lattice(nx, ny, dx);
  const double y_crack = (ny / 2) * dx + 0.5 * dx;
  for (int i = 0; i < l.grid.node_count(); ++i) {
    for (int b = l.bonds.begin(i); b < l.bonds.end(i); ++b) {
      const double ya = l.grid.positions[i].y();
      const double yb = l.grid.positions[l.bonds.neighbor[b]].y();
      if ((ya - y_crack) * (yb - y_crack) < 0.0) l.bonds.intact[b] = 0;
    }
  }
  VecX phi;
  damage_field(l.bonds, l.grid, phi);
  const int face = l.grid.id(nx / 2, ny / 2); // half a spacing below the cut
  const double reference = oracles::continuum_damage(0.5 * dx, l.bonds.horizon);
  EXPECT_NEAR(phi[face], reference, 0.1);
  for (int i = 0; i < phi.size(); ++i) {
    EXPECT_GE(phi[i], 0.0);
    EXPECT_LE(phi[i], 1.0);
  }
}
