#pragma once

#include <cstdint>
#include <vector>

namespace binpack {

inline constexpr int kOrientationCount = 6;

/// Integer cuboid dimensions in voxel units.
struct Dims3 {
  int l = 0;
  int w = 0;
  int h = 0;

  long long volume() const {
    return static_cast<long long>(l) * w * h;
  }
  bool valid() const { return l >= 1 && w >= 1 && h >= 1; }

  friend bool operator==(const Dims3&, const Dims3&) = default;
};

/// Grid placement action: front-left cell of the footprint plus one of the
/// six axis-permutation orientations. z is implied by the gravity drop.
struct Action {
  int x = 0;
  int y = 0;
  int o = 0;

  /// Flat index layout o * L * W + x * W + y; fixed so masks, logits and
  /// actions share one indexing scheme.
  int flat_index(int length, int width) const {
    return o * length * width + x * width + y;
  }
  static Action from_flat(int index, int length, int width);

  friend bool operator==(const Action&, const Action&) = default;
};

/// A committed placement: item corner coordinates after the drop, plus the
/// original dims and the orientation that was applied.
struct Placement {
  int item_id = 0;
  int x = 0;
  int y = 0;
  int z = 0;
  int orientation = 0;
  Dims3 dims;  // as given to the environment, before orientation

  Dims3 oriented() const;

  friend bool operator==(const Placement&, const Placement&) = default;
};

/// L x W grid of column heights; the container's observable geometry.
class HeightMap {
 public:
  HeightMap() = default;
  HeightMap(int length, int width)
      : length_(length), width_(width),
        cells_(static_cast<std::size_t>(length) * width, 0) {}

  int length() const { return length_; }
  int width() const { return width_; }

  int at(int x, int y) const { return cells_[idx(x, y)]; }
  void set(int x, int y, int value) { cells_[idx(x, y)] = value; }

  const std::vector<int>& cells() const { return cells_; }

  friend bool operator==(const HeightMap&, const HeightMap&) = default;

 private:
  std::size_t idx(int x, int y) const {
    return static_cast<std::size_t>(x) * width_ + y;
  }

  int length_ = 0;
  int width_ = 0;
  std::vector<int> cells_;
};

/// Result of the support analysis for one candidate footprint.
struct SupportReport {
  int rest_z = 0;            // max height under the footprint
  double support_ratio = 0;  // |cells at rest_z| / |footprint cells|
  bool com_supported = false;
};

/// Applies one of the six axis permutations. Orientation 0 is the identity;
/// the six indices enumerate all permutations of (l, w, h) in a fixed order.
Dims3 oriented_dims(const Dims3& d, int orientation);

/// Height at which an item with oriented footprint fd comes to rest when
/// dropped at (x, y). Throws OutOfBounds if the footprint leaves the grid.
int rest_height(const HeightMap& hm, int x, int y, const Dims3& fd);

/// Support analysis: rest height, contact ratio, and whether the footprint
/// center lies inside the convex hull of the supporting cells' unit squares.
SupportReport check_support(const HeightMap& hm, int x, int y,
                            const Dims3& fd);

/// Full constraint check for a grid action. Returns false on any violation:
/// container bounds, height cap, or support (ratio below rho_min or center
/// of mass outside the support hull).
bool check_placement(const HeightMap& hm, const Dims3& container,
                     const Dims3& item, const Action& a, double rho_min);

/// Commits a placement: raises all footprint columns to rest_z + height and
/// returns the updated map plus the placement record. Throws
/// InfeasiblePlacement when check_placement would fail.
std::pair<HeightMap, Placement> apply_placement(const HeightMap& hm,
                                                const Dims3& container,
                                                const Dims3& item,
                                                const Action& a,
                                                double rho_min,
                                                int item_id = 0);

/// Space utilization: packed volume as a percentage of container volume.
double utilization(const std::vector<Placement>& placements,
                   const Dims3& container);

/// Post-hoc audit of the bigger-items-below convention: counts direct
/// support contacts where the item on top has the larger volume. Not an
/// action filter; reported only.
struct LoadingOrderAudit {
  int contacts = 0;
  int violations = 0;
  double violation_ratio() const {
    return contacts == 0 ? 0.0 : static_cast<double>(violations) / contacts;
  }
};
LoadingOrderAudit audit_loading_order(const std::vector<Placement>& placements);

}  // namespace binpack
