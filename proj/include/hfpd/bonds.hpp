#ifndef HFPD_BONDS_HPP
#define HFPD_BONDS_HPP

#include "hfpd/core.hpp"
#include "hfpd/grid.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace hfpd {

enum class Influence { Gaussian, Unit };

/// Per-node family lists with reference geometry and failure flags.
///
/// Half-bonds are stored CSR-style: the bond i-j appears once in i's range and
/// once (mirrored) in j's range; `reverse` links the two so failure flags stay
/// symmetric. Two normalization volumes are kept per node: `weighted_volume`
/// uses the mechanics influence function, `coupling_volume` is the unweighted
/// sum used by the pore-pressure coupling (whose influence function is 1).
struct BondTable {
  double horizon = 0.0;
  Influence influence = Influence::Gaussian;

  std::vector<int> offsets;              // size N+1
  std::vector<int> neighbor;             // family node ids
  std::vector<int> reverse;              // flat index of the mirrored half-bond
  std::vector<Vec2> xi;                  // reference bond vector (to neighbor)
  std::vector<double> length;            // |xi|
  std::vector<double> weight;            // influence function value
  std::vector<std::uint8_t> intact;      // failure flag, 1 = connected
  std::vector<double> weighted_volume;   // sum w |xi|^2 V over the family
  std::vector<double> coupling_volume;   // sum |xi|^2 V over the family

  int node_count() const { return static_cast<int>(offsets.size()) - 1; }
  int begin(int i) const { return offsets[i]; }
  int end(int i) const { return offsets[i + 1]; }
  int family_size(int i) const { return offsets[i + 1] - offsets[i]; }
  int bond_count() const { return static_cast<int>(neighbor.size()); }

  void break_bond(int flat_index) {
    intact[flat_index] = 0;
    intact[reverse[flat_index]] = 0;
  }
};

inline double influence_value(Influence kind, double r, double horizon) {
  switch (kind) {
    case Influence::Gaussian: return std::exp(-(r * r) / (horizon * horizon));
    case Influence::Unit: return 1.0;
  }
  return 1.0;
}

/// Build symmetric family lists for every node within the horizon.
/// Membership uses |xi| <= horizon with an absolute tolerance of 1e-12*horizon
/// so lattice-distance ties are deterministic.
inline BondTable build_bonds(const NodeGrid& grid, double horizon,
                             Influence influence = Influence::Gaussian) {
  BondTable table;
  table.horizon = horizon;
  table.influence = influence;

  const int n = grid.node_count();
  const int reach = static_cast<int>(std::floor(horizon / grid.dx + 1e-9)) + 1;
  const double cutoff = horizon * (1.0 + 1e-12);

  table.offsets.assign(n + 1, 0);

  // count pass
  for (int iy = 0; iy <= grid.ny; ++iy) {
    for (int ix = 0; ix <= grid.nx; ++ix) {
      const int i = grid.id(ix, iy);
      int count = 0;
      for (int dy = -reach; dy <= reach; ++dy) {
        const int jy = iy + dy;
        if (jy < 0 || jy > grid.ny) continue;
        for (int dx = -reach; dx <= reach; ++dx) {
          const int jx = ix + dx;
          if (jx < 0 || jx > grid.nx) continue;
          if (dx == 0 && dy == 0) continue;
          const double r = grid.dx * std::sqrt(double(dx * dx + dy * dy));
          if (r <= cutoff) ++count;
        }
      }
      table.offsets[i + 1] = count;
    }
  }
  for (int i = 0; i < n; ++i) table.offsets[i + 1] += table.offsets[i];

  const int n_bonds = table.offsets[n];
  table.neighbor.resize(n_bonds);
  table.reverse.resize(n_bonds);
  table.xi.resize(n_bonds);
  table.length.resize(n_bonds);
  table.weight.resize(n_bonds);
  table.intact.assign(n_bonds, 1);
  table.weighted_volume.assign(n, 0.0);
  table.coupling_volume.assign(n, 0.0);

  // fill pass; neighbors are emitted in fixed (dy, dx) order so sums are
  // reproducible
  std::vector<int> cursor(table.offsets.begin(), table.offsets.end() - 1);
  for (int iy = 0; iy <= grid.ny; ++iy) {
    for (int ix = 0; ix <= grid.nx; ++ix) {
      const int i = grid.id(ix, iy);
      for (int dy = -reach; dy <= reach; ++dy) {
        const int jy = iy + dy;
        if (jy < 0 || jy > grid.ny) continue;
        for (int dx = -reach; dx <= reach; ++dx) {
          const int jx = ix + dx;
          if (jx < 0 || jx > grid.nx) continue;
          if (dx == 0 && dy == 0) continue;
          const double r = grid.dx * std::sqrt(double(dx * dx + dy * dy));
          if (r > cutoff) continue;
          const int j = grid.id(jx, jy);
          const int slot = cursor[i]++;
          table.neighbor[slot] = j;
          table.xi[slot] = grid.positions[j] - grid.positions[i];
          table.length[slot] = r;
          const double w = influence_value(influence, r, horizon);
          table.weight[slot] = w;
          table.weighted_volume[i] += w * r * r * grid.volumes[j];
          table.coupling_volume[i] += r * r * grid.volumes[j];
        }
      }
    }
  }

  // link mirrored half-bonds (families are sorted by construction order, so a
  // binary search over the neighbor range would also do; direct scan is fine)
  for (int i = 0; i < n; ++i) {
    for (int b = table.begin(i); b < table.end(i); ++b) {
      const int j = table.neighbor[b];
      if (j < i) continue;
      for (int rb = table.begin(j); rb < table.end(j); ++rb) {
        if (table.neighbor[rb] == i) {
          table.reverse[b] = rb;
          table.reverse[rb] = b;
          break;
        }
      }
    }
  }
  return table;
}

} // namespace hfpd

#endif
