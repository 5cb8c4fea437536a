#ifndef HFPD_COUPLING_HPP
#define HFPD_COUPLING_HPP

#include "hfpd/bonds.hpp"
#include "hfpd/core.hpp"
#include "hfpd/fem.hpp"
#include "hfpd/grid.hpp"
#include "hfpd/solid.hpp"

#include <cmath>
#include <vector>

namespace hfpd {

/// Linear reservoir/fracture indicator functions driven by damage.
struct DomainIndicators {
  VecX chi_r;
  VecX chi_f;
};

inline DomainIndicators classify_domains(const VecX& phi, double c1, double c2) {
  if (!(c1 < c2)) throw ConfigError("classify_domains: thresholds must satisfy c1 < c2");
  DomainIndicators ind;
  const int n = static_cast<int>(phi.size());
  ind.chi_r.resize(n);
  ind.chi_f.resize(n);
  for (int i = 0; i < n; ++i) {
    const double r = clamp01((c2 - phi[i]) / (c2 - c1));
    ind.chi_r[i] = r;
    ind.chi_f[i] = 1.0 - r;
  }
  return ind;
}

/// Crack aperture at every node, averaged over broken opening bonds
/// (Algorithm: a_ij = deformed length * cos(beta) - original length, counted
/// when the bond stretch is past critical and the projection opens).
/// `family_radius` limits the bonds considered; pass <= 0 for the full family.
inline void compute_apertures(const BondTable& bonds, const VecX& u, double s_c,
                              double family_radius, VecX& aperture) {
  const int n = bonds.node_count();
  aperture.resize(n);
  const double radius = family_radius > 0.0
                            ? family_radius * (1.0 + 1e-12)
                            : bonds.horizon * (1.0 + 1e-12);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    int count = 0;
    for (int b = bonds.begin(i); b < bonds.end(i); ++b) {
      if (bonds.intact[b]) continue;
      if (bonds.length[b] > radius) continue;
      const int j = bonds.neighbor[b];
      const Vec2 eta(u[2 * j] - u[2 * i], u[2 * j + 1] - u[2 * i + 1]);
      const double x = bonds.length[b];
      const double deformed = (bonds.xi[b] + eta).norm();
      if (deformed < 1e-14 * bonds.horizon)
        throw NumericalError("bond collapsed to zero deformed length");
      if ((deformed - x) / x < s_c) continue;
      // projection of the deformed bond on the original direction
      const double a_ij = bonds.xi[b].dot(eta) / x;
      if (a_ij < 0.0) continue;
      acc += a_ij;
      ++count;
    }
    aperture[i] = count > 0 ? acc / count : 0.0;
  }
}

/// Nodal and element flow properties after damage classification.
struct FlowDomainState {
  DomainIndicators indicators;
  VecX k_node;        // blended permeability [m^2]
  VecX s_node;        // blended storage [1/Pa]
  VecX alpha_node;    // blended Biot coefficient
  VecX n_node;        // blended porosity
  VecX rho_node;      // blended density
  VecX elem_k_over_mu;
  VecX elem_s;
  VecX elem_alpha_q;  // volumetric coupling weight, zero in the fracture domain
  VecX elem_rho;
};

/// Blend reservoir and fracture flow properties through the indicators.
/// Fracture permeability comes from the cubic law on the nodal aperture
/// (`fixed_aperture` overrides it when >= 0); fracture storage is 1/K_w
/// (alpha_f = 1, n_f = 1).
inline FlowDomainState update_flow_properties(const FluidMesh& mesh, const VecX& phi,
                                              const VecX& aperture, const FlowMaterial& mat,
                                              double c1, double c2,
                                              double fixed_aperture = -1.0) {
  FlowDomainState st;
  st.indicators = classify_domains(phi, c1, c2);
  const int n = static_cast<int>(phi.size());
  st.k_node.resize(n);
  st.s_node.resize(n);
  st.alpha_node.resize(n);
  st.n_node.resize(n);
  st.rho_node.resize(n);
  const double s_r = mat.storage_coefficient();
  const double s_f = 1.0 / mat.K_w;
  for (int i = 0; i < n; ++i) {
    const double cf = st.indicators.chi_f[i];
    const double cr = st.indicators.chi_r[i];
    const double a = fixed_aperture >= 0.0 ? fixed_aperture : aperture[i];
    const double k_f = a * a / 12.0;
    st.k_node[i] = cr * mat.permeability + cf * k_f;
    st.s_node[i] = cr * s_r + cf * s_f;
    st.alpha_node[i] = cr * mat.alpha + cf * 1.0;
    st.n_node[i] = cr * mat.porosity + cf * 1.0;
    st.rho_node[i] = mat.rho;
  }

  const int ne = mesh.element_count();
  st.elem_k_over_mu.resize(ne);
  st.elem_s.resize(ne);
  st.elem_alpha_q.resize(ne);
  st.elem_rho.resize(ne);
  for (int e = 0; e < ne; ++e) {
    const auto& c = mesh.elements[e];
    double k = 0, s = 0, aq = 0, rho = 0;
    for (int a = 0; a < 4; ++a) {
      k += st.k_node[c[a]];
      s += st.s_node[c[a]];
      rho += st.rho_node[c[a]];
      // the volumetric strain term drops out of the fracture mass balance
      aq += (st.indicators.chi_f[c[a]] >= 1.0) ? 0.0 : st.alpha_node[c[a]];
    }
    st.elem_k_over_mu[e] = 0.25 * k / mat.viscosity;
    st.elem_s[e] = 0.25 * s;
    st.elem_alpha_q[e] = 0.25 * aq;
    st.elem_rho[e] = 0.25 * rho;
  }
  return st;
}

/// PD-side pressure coupling operator, (2N) x N. Applying it to a pressure
/// vector gives the pore-pressure force of each node scaled by its volume.
/// The sum runs over the whole family (broken bonds included) with influence
/// function 1, normalized by the unweighted family volume.
inline SpMat assemble_QPD(const BondTable& bonds, const NodeGrid& grid,
                          const VecX& alpha_node) {
  const int n = bonds.node_count();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(bonds.bond_count()) * 4);
  for (int i = 0; i < n; ++i) {
    const double vi = grid.volumes[i];
    const double ci = -2.0 * alpha_node[i] / bonds.coupling_volume[i];
    for (int b = bonds.begin(i); b < bonds.end(i); ++b) {
      const int j = bonds.neighbor[b];
      const double vivj = vi * grid.volumes[j];
      const double cj = -2.0 * alpha_node[j] / bonds.coupling_volume[j];
      const Vec2& xi = bonds.xi[b];
      trips.emplace_back(2 * i, i, ci * xi.x() * vivj);
      trips.emplace_back(2 * i + 1, i, ci * xi.y() * vivj);
      trips.emplace_back(2 * i, j, cj * xi.x() * vivj);
      trips.emplace_back(2 * i + 1, j, cj * xi.y() * vivj);
    }
  }
  SpMat qpd(2 * n, n);
  qpd.setFromTriplets(trips.begin(), trips.end());
  return qpd;
}

} // namespace hfpd

#endif
