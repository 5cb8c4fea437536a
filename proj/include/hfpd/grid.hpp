#ifndef HFPD_GRID_HPP
#define HFPD_GRID_HPP

#include "hfpd/core.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace hfpd {

/// Uniform structured discretization shared by the PD grid and the fluid mesh.
struct GridConfig {
  double extent_x = 1.0;   // [m]
  double extent_y = 1.0;   // [m]
  double spacing = 0.1;    // grid spacing dx [m]
  int m_ratio = 3;         // horizon / spacing
  double thickness = 1.0;  // plane-strain thickness [m]
  bool partial_boundary_volumes = false;

  double horizon() const { return m_ratio * spacing; }

  void validate() const {
    if (spacing <= 0.0) throw ConfigError("grid: spacing must be positive");
    if (m_ratio < 2) throw ConfigError("grid: m_ratio must be >= 2");
    if (thickness <= 0.0) throw ConfigError("grid: thickness must be positive");
    cells_or_throw(extent_x, "extent_x");
    cells_or_throw(extent_y, "extent_y");
  }

  int cells_x() const { return cells_or_throw(extent_x, "extent_x"); }
  int cells_y() const { return cells_or_throw(extent_y, "extent_y"); }

private:
  int cells_or_throw(double extent, const char* name) const {
    const double ratio = extent / spacing;
    const int n = static_cast<int>(std::lround(ratio));
    if (n < 1 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
      throw ConfigError(std::string("grid: ") + name + " is not an integer multiple of spacing");
    }
    return n;
  }
};

/// Nodes at cell corners, shared between the PD solid and the fluid FE mesh.
struct NodeGrid {
  int nx = 0; // cell count in x
  int ny = 0; // cell count in y
  double dx = 0.0;
  double thickness = 1.0;
  std::vector<Vec2> positions;
  std::vector<double> volumes;
  // named boundary groups
  std::vector<int> left, right, bottom, top;

  int node_count() const { return static_cast<int>(positions.size()); }
  int id(int ix, int iy) const { return iy * (nx + 1) + ix; }

  const std::vector<int>& boundary_group(const std::string& name) const {
    if (name == "left") return left;
    if (name == "right") return right;
    if (name == "bottom") return bottom;
    if (name == "top") return top;
    throw ConfigError("unknown boundary group: " + name);
  }

  /// Nearest node to a point; throws if farther than dx/2 (point off-lattice).
  int snap_to_node(const Vec2& point) const {
    const int ix = static_cast<int>(std::lround(point.x() / dx));
    const int iy = static_cast<int>(std::lround(point.y() / dx));
    if (ix < 0 || ix > nx || iy < 0 || iy > ny)
      throw ConfigError("point outside the grid");
    const int node = id(ix, iy);
    if ((positions[node] - point).norm() > 0.5 * dx + 1e-12 * dx)
      throw ConfigError("point does not snap to a grid node within dx/2");
    return node;
  }
};

inline NodeGrid build_grid(const GridConfig& config) {
  config.validate();
  NodeGrid grid;
  grid.nx = config.cells_x();
  grid.ny = config.cells_y();
  grid.dx = config.spacing;
  grid.thickness = config.thickness;

  const int n_nodes = (grid.nx + 1) * (grid.ny + 1);
  grid.positions.reserve(n_nodes);
  grid.volumes.reserve(n_nodes);
  const double full = config.spacing * config.spacing * config.thickness;
  for (int iy = 0; iy <= grid.ny; ++iy) {
    for (int ix = 0; ix <= grid.nx; ++ix) {
      grid.positions.emplace_back(ix * config.spacing, iy * config.spacing);
      double v = full;
      if (config.partial_boundary_volumes) {
        if (ix == 0 || ix == grid.nx) v *= 0.5;
        if (iy == 0 || iy == grid.ny) v *= 0.5;
      }
      grid.volumes.push_back(v);
      if (ix == 0) grid.left.push_back(grid.id(ix, iy));
      if (ix == grid.nx) grid.right.push_back(grid.id(ix, iy));
      if (iy == 0) grid.bottom.push_back(grid.id(ix, iy));
      if (iy == grid.ny) grid.top.push_back(grid.id(ix, iy));
    }
  }
  return grid;
}

/// Bilinear quad mesh over the grid cells. Node order is counterclockwise
/// starting at the lower-left corner, matching the natural-domain corners
/// (-1,-1), (1,-1), (1,1), (-1,1).
struct FluidMesh {
  std::vector<std::array<int, 4>> elements;
  double dx = 0.0;

  int element_count() const { return static_cast<int>(elements.size()); }

  /// 2x2 Gauss points in the natural domain.
  static const std::array<std::array<double, 2>, 4>& gauss_points() {
    static const double g = 1.0 / std::sqrt(3.0);
    static const std::array<std::array<double, 2>, 4> pts = {
        {{-g, -g}, {g, -g}, {g, g}, {-g, g}}};
    return pts;
  }
};

inline FluidMesh build_fluid_mesh(const NodeGrid& grid) {
  FluidMesh mesh;
  mesh.dx = grid.dx;
  mesh.elements.reserve(grid.nx * grid.ny);
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      mesh.elements.push_back({grid.id(ix, iy), grid.id(ix + 1, iy),
                               grid.id(ix + 1, iy + 1), grid.id(ix, iy + 1)});
    }
  }
  return mesh;
}

} // namespace hfpd

#endif
