#pragma once

#include <vector>

#include "binpack/geometry.hpp"

namespace binpack {

/// Axis-aligned box on the voxel grid, half-open in every axis.
struct GridBox {
  int x0 = 0, y0 = 0, z0 = 0;
  int x1 = 0, y1 = 0, z1 = 0;

  long long volume() const {
    return static_cast<long long>(x1 - x0) * (y1 - y0) * (z1 - z0);
  }
  bool empty() const { return x0 >= x1 || y0 >= y1 || z0 >= z1; }
  bool intersects(const GridBox& b) const {
    return x0 < b.x1 && b.x0 < x1 && y0 < b.y1 && b.y0 < y1 && z0 < b.z1 &&
           b.z0 < z1;
  }
  bool contains(const GridBox& b) const {
    return x0 <= b.x0 && b.x1 <= x1 && y0 <= b.y0 && b.y1 <= y1 &&
           z0 <= b.z0 && b.z1 <= z1;
  }

  friend bool operator==(const GridBox&, const GridBox&) = default;
  friend auto operator<=>(const GridBox&, const GridBox&) = default;
};

GridBox placement_box(const Placement& p);

/// Empty maximal spaces via the difference process: start from the whole
/// container, split every space that intersects a placed box into its six
/// one-sided remainders, then drop spaces contained in another. The result
/// is exactly the set of maximal empty boxes, sorted for determinism.
std::vector<GridBox> compute_ems(const std::vector<Placement>& placements,
                                 const Dims3& container);

}  // namespace binpack
