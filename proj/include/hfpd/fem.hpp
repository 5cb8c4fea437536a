#ifndef HFPD_FEM_HPP
#define HFPD_FEM_HPP

#include "hfpd/core.hpp"
#include "hfpd/grid.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace hfpd {

struct FlowMaterial {
  double alpha = 1.0;         // Biot coefficient
  double porosity = 0.0;      // n
  double permeability = 0.0;  // intrinsic k [m^2]
  double viscosity = 0.0;     // mu_w [Pa s]
  double K_w = 0.0;           // fluid bulk modulus [Pa]
  double K_s = 1e30;          // grain-scale solid bulk modulus [Pa]
  double rho = 1000.0;        // fluid density [kg/m^3]
  double storage = -1.0;      // s [1/Pa]; derived from the moduli when <= 0
  Vec2 gravity = Vec2::Zero();

  double storage_coefficient() const {
    if (storage > 0.0) return storage;
    return (alpha - porosity) * (1.0 - alpha) / K_s + porosity / K_w;
  }

  void validate() const {
    if (viscosity <= 0.0) throw ConfigError("flow: viscosity must be positive");
    if (permeability < 0.0) throw ConfigError("flow: permeability must be non-negative");
    if (storage_coefficient() <= 0.0) throw ConfigError("flow: storage coefficient must be positive");
  }

  std::vector<std::string> warnings() const {
    std::vector<std::string> out;
    if (porosity < 0.0 || porosity > 1.0) out.push_back("flow: porosity outside [0, 1]");
    if (alpha < 0.0 || alpha > 1.0) out.push_back("flow: Biot coefficient outside [0, 1]");
    return out;
  }
};

/// Bilinear shape functions on the natural domain, corner order matching the
/// counterclockwise element connectivity (-1,-1), (1,-1), (1,1), (-1,1).
inline Eigen::Vector4d shape_functions(double xi, double eta) {
  if (std::abs(xi) > 1.0 + 1e-12 || std::abs(eta) > 1.0 + 1e-12)
    throw ConfigError("shape_functions: natural coordinates outside [-1, 1]");
  Eigen::Vector4d n;
  n << 0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
       0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta);
  return n;
}

/// Physical gradients (rows: d/dx, d/dy) for a square element of side dx.
inline Eigen::Matrix<double, 2, 4> shape_gradients(double xi, double eta, double dx) {
  if (std::abs(xi) > 1.0 + 1e-12 || std::abs(eta) > 1.0 + 1e-12)
    throw ConfigError("shape_gradients: natural coordinates outside [-1, 1]");
  Eigen::Matrix<double, 2, 4> g;
  g << -(1 - eta), (1 - eta), (1 + eta), -(1 + eta),
       -(1 - xi), -(1 + xi), (1 + xi), (1 - xi);
  return g * (0.25 * 2.0 / dx);
}

/// Element compressibility matrix, s * int(N^T N).
inline Eigen::Matrix4d element_S(double storage, double dx) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  const double detJ = dx * dx / 4.0;
  for (const auto& gp : FluidMesh::gauss_points()) {
    const Eigen::Vector4d n = shape_functions(gp[0], gp[1]);
    m += storage * detJ * n * n.transpose();
  }
  return m;
}

/// Element permeability matrix, (k/mu) * int(grad N^T grad N).
inline Eigen::Matrix4d element_H(double k_over_mu, double dx) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  const double detJ = dx * dx / 4.0;
  for (const auto& gp : FluidMesh::gauss_points()) {
    const auto g = shape_gradients(gp[0], gp[1], dx);
    m += k_over_mu * detJ * g.transpose() * g;
  }
  return m;
}

/// Element volumetric coupling block, alpha * int((L N_u)^T m N_p) with the
/// plane-strain operator L and m = [1, 1, 0]^T: rows are the 8 displacement
/// dofs, columns the 4 pressure dofs.
inline Eigen::Matrix<double, 8, 4> element_Q(double alpha, double dx) {
  Eigen::Matrix<double, 8, 4> m = Eigen::Matrix<double, 8, 4>::Zero();
  const double detJ = dx * dx / 4.0;
  for (const auto& gp : FluidMesh::gauss_points()) {
    const Eigen::Vector4d n = shape_functions(gp[0], gp[1]);
    const auto g = shape_gradients(gp[0], gp[1], dx);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        m(2 * a, b) += alpha * detJ * g(0, a) * n(b);
        m(2 * a + 1, b) += alpha * detJ * g(1, a) * n(b);
      }
  }
  return m;
}

inline SpMat assemble_S(const FluidMesh& mesh, const NodeGrid& grid,
                        const VecX& storage_per_element) {
  const int n = grid.node_count();
  std::vector<Triplet> trips;
  trips.reserve(mesh.element_count() * 16);
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto m = element_S(storage_per_element[e], mesh.dx);
    const auto& conn = mesh.elements[e];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) trips.emplace_back(conn[a], conn[b], m(a, b));
  }
  SpMat S(n, n);
  S.setFromTriplets(trips.begin(), trips.end());
  return S;
}

inline SpMat assemble_H(const FluidMesh& mesh, const NodeGrid& grid,
                        const VecX& k_over_mu_per_element) {
  const int n = grid.node_count();
  std::vector<Triplet> trips;
  trips.reserve(mesh.element_count() * 16);
  for (int e = 0; e < mesh.element_count(); ++e) {
    if (k_over_mu_per_element[e] < 0.0)
      throw ConfigError("assemble_H: negative permeability");
    const auto m = element_H(k_over_mu_per_element[e], mesh.dx);
    const auto& conn = mesh.elements[e];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) trips.emplace_back(conn[a], conn[b], m(a, b));
  }
  SpMat H(n, n);
  H.setFromTriplets(trips.begin(), trips.end());
  return H;
}

/// Global coupling matrix, (2N) x N: columns map nodal pressures to consistent
/// nodal forces, the transpose maps nodal velocities to the pressure-equation
/// source.
inline SpMat assemble_Q(const FluidMesh& mesh, const NodeGrid& grid,
                        const VecX& alpha_per_element) {
  const int n = grid.node_count();
  std::vector<Triplet> trips;
  trips.reserve(mesh.element_count() * 32);
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto m = element_Q(alpha_per_element[e], mesh.dx);
    const auto& conn = mesh.elements[e];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        trips.emplace_back(2 * conn[a], conn[b], m(2 * a, b));
        trips.emplace_back(2 * conn[a] + 1, conn[b], m(2 * a + 1, b));
      }
  }
  SpMat Q(2 * n, n);
  Q.setFromTriplets(trips.begin(), trips.end());
  return Q;
}

/// Gravity contribution to the source vector, int((grad N)^T (k/mu) rho g).
inline VecX assemble_gravity_flux(const FluidMesh& mesh, const NodeGrid& grid,
                                  const VecX& k_over_mu_per_element,
                                  const VecX& rho_per_element, const Vec2& g) {
  VecX q = VecX::Zero(grid.node_count());
  if (g.norm() == 0.0) return q;
  const double detJ = mesh.dx * mesh.dx / 4.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const Vec2 flux = k_over_mu_per_element[e] * rho_per_element[e] * g;
    const auto& conn = mesh.elements[e];
    for (const auto& gp : FluidMesh::gauss_points()) {
      const auto grads = shape_gradients(gp[0], gp[1], mesh.dx);
      for (int a = 0; a < 4; ++a)
        q[conn[a]] += detJ * grads.col(a).dot(flux);
    }
  }
  return q;
}

/// Pressure constraints, applied by symmetric elimination.
struct DirichletBC {
  std::vector<std::pair<int, double>> entries;

  void add(int node, double value) {
    for (auto& e : entries) {
      if (e.first == node) {
        if (e.second != value)
          throw ConfigError("conflicting Dirichlet values at node " + std::to_string(node));
        return;
      }
    }
    entries.emplace_back(node, value);
  }
};

/// Symmetric Dirichlet elimination on a full-size system: constrained columns
/// move to the right-hand side, rows/columns are zeroed with a unit diagonal.
inline void apply_dirichlet(SpMat& A, VecX& b, const DirichletBC& bc) {
  if (bc.entries.empty()) return;
  std::vector<char> constrained(A.rows(), 0);
  for (const auto& [node, value] : bc.entries) constrained[node] = 1;

  for (const auto& [node, value] : bc.entries) {
    if (value != 0.0) {
      for (SpMat::InnerIterator it(A, node); it; ++it) {
        if (!constrained[it.row()]) b[it.row()] -= it.value() * value;
      }
    }
  }
  for (int c = 0; c < A.outerSize(); ++c) {
    for (SpMat::InnerIterator it(A, c); it; ++it) {
      if (constrained[it.row()] || constrained[c])
        it.valueRef() = (it.row() == c) ? 1.0 : 0.0;
    }
  }
  for (const auto& [node, value] : bc.entries) b[node] = value;
}

} // namespace hfpd

#endif
