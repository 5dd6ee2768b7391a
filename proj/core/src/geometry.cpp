#include "binpack/geometry.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include "binpack/errors.hpp"

namespace binpack {

Action Action::from_flat(int index, int length, int width) {
  if (index < 0 || index >= kOrientationCount * length * width) {
    throw std::out_of_range("Action::from_flat: index out of range");
  }
  Action a;
  a.o = index / (length * width);
  const int rest = index % (length * width);
  a.x = rest / width;
  a.y = rest % width;
  return a;
}

Dims3 oriented_dims(const Dims3& d, int orientation) {
  switch (orientation) {
    case 0: return {d.l, d.w, d.h};
    case 1: return {d.l, d.h, d.w};
    case 2: return {d.w, d.l, d.h};
    case 3: return {d.w, d.h, d.l};
    case 4: return {d.h, d.l, d.w};
    case 5: return {d.h, d.w, d.l};
    default:
      throw std::out_of_range("oriented_dims: orientation must be in [0, 6)");
  }
}

Dims3 Placement::oriented() const { return oriented_dims(dims, orientation); }

namespace {

void require_footprint_inside(const HeightMap& hm, int x, int y,
                              const Dims3& fd) {
  if (x < 0 || y < 0 || fd.l < 1 || fd.w < 1 || x + fd.l > hm.length() ||
      y + fd.w > hm.width()) {
    throw OutOfBounds("footprint exceeds height-map grid");
  }
}

struct Pt {
  long long x;
  long long y;
};

long long cross(const Pt& o, const Pt& a, const Pt& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Andrew monotone chain. Input points need not be unique.
std::vector<Pt> convex_hull(std::vector<Pt> pts) {
  std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Pt& a, const Pt& b) {
                          return a.x == b.x && a.y == b.y;
                        }),
            pts.end());
  const std::size_t n = pts.size();
  if (n <= 2) return pts;
  std::vector<Pt> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Point-in-convex-polygon, boundary inclusive, counter-clockwise hull.
bool hull_contains(const std::vector<Pt>& hull, const Pt& p) {
  if (hull.empty()) return false;
  if (hull.size() == 1) return hull[0].x == p.x && hull[0].y == p.y;
  if (hull.size() == 2) {
    // Degenerate segment: collinear and within the bounding box.
    if (cross(hull[0], hull[1], p) != 0) return false;
    return std::min(hull[0].x, hull[1].x) <= p.x &&
           p.x <= std::max(hull[0].x, hull[1].x) &&
           std::min(hull[0].y, hull[1].y) <= p.y &&
           p.y <= std::max(hull[0].y, hull[1].y);
  }
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Pt& a = hull[i];
    const Pt& b = hull[(i + 1) % hull.size()];
    if (cross(a, b, p) < 0) return false;
  }
  return true;
}

}  // namespace

int rest_height(const HeightMap& hm, int x, int y, const Dims3& fd) {
  require_footprint_inside(hm, x, y, fd);
  int top = 0;
  for (int cx = x; cx < x + fd.l; ++cx) {
    for (int cy = y; cy < y + fd.w; ++cy) {
      top = std::max(top, hm.at(cx, cy));
    }
  }
  return top;
}

SupportReport check_support(const HeightMap& hm, int x, int y,
                            const Dims3& fd) {
  require_footprint_inside(hm, x, y, fd);
  SupportReport report;
  report.rest_z = rest_height(hm, x, y, fd);

  // All coordinates are doubled so the footprint center is integral and the
  // hull test is exact.
  std::vector<Pt> corners;
  int support_cells = 0;
  for (int cx = x; cx < x + fd.l; ++cx) {
    for (int cy = y; cy < y + fd.w; ++cy) {
      if (hm.at(cx, cy) != report.rest_z) continue;
      ++support_cells;
      corners.push_back({2LL * cx, 2LL * cy});
      corners.push_back({2LL * cx + 2, 2LL * cy});
      corners.push_back({2LL * cx, 2LL * cy + 2});
      corners.push_back({2LL * cx + 2, 2LL * cy + 2});
    }
  }
  report.support_ratio =
      static_cast<double>(support_cells) / (static_cast<double>(fd.l) * fd.w);

  const Pt com{2LL * x + fd.l, 2LL * y + fd.w};
  if (support_cells == fd.l * fd.w) {
    report.com_supported = true;  // hull equals the footprint rectangle
  } else {
    report.com_supported = hull_contains(convex_hull(std::move(corners)), com);
  }
  return report;
}

bool check_placement(const HeightMap& hm, const Dims3& container,
                     const Dims3& item, const Action& a, double rho_min) {
  if (a.o < 0 || a.o >= kOrientationCount) return false;
  const Dims3 od = oriented_dims(item, a.o);
  if (a.x < 0 || a.y < 0 || a.x + od.l > container.l ||
      a.y + od.w > container.w) {
    return false;
  }
  const SupportReport support = check_support(hm, a.x, a.y, od);
  if (support.rest_z + od.h > container.h) return false;
  if (support.rest_z == 0) return true;  // resting on the floor: full support
  return support.com_supported && support.support_ratio >= rho_min;
}

std::pair<HeightMap, Placement> apply_placement(const HeightMap& hm,
                                                const Dims3& container,
                                                const Dims3& item,
                                                const Action& a,
                                                double rho_min, int item_id) {
  if (!check_placement(hm, container, item, a, rho_min)) {
    throw InfeasiblePlacement("apply_placement: action fails placement check");
  }
  const Dims3 od = oriented_dims(item, a.o);
  const int z = rest_height(hm, a.x, a.y, od);
  HeightMap next = hm;
  for (int cx = a.x; cx < a.x + od.l; ++cx) {
    for (int cy = a.y; cy < a.y + od.w; ++cy) {
      next.set(cx, cy, z + od.h);
    }
  }
  Placement placement;
  placement.item_id = item_id;
  placement.x = a.x;
  placement.y = a.y;
  placement.z = z;
  placement.orientation = a.o;
  placement.dims = item;
  return {std::move(next), placement};
}

double utilization(const std::vector<Placement>& placements,
                   const Dims3& container) {
  long long packed = 0;
  for (const Placement& p : placements) packed += p.dims.volume();
  return 100.0 * static_cast<double>(packed) /
         static_cast<double>(container.volume());
}

LoadingOrderAudit audit_loading_order(
    const std::vector<Placement>& placements) {
  LoadingOrderAudit audit;
  for (const Placement& top : placements) {
    const Dims3 td = top.oriented();
    if (top.z == 0) continue;
    for (const Placement& below : placements) {
      const Dims3 bd = below.oriented();
      if (below.z + bd.h != top.z) continue;
      const bool xy_overlap = below.x < top.x + td.l &&
                              top.x < below.x + bd.l &&
                              below.y < top.y + td.w && top.y < below.y + bd.w;
      if (!xy_overlap) continue;
      ++audit.contacts;
      if (top.dims.volume() > below.dims.volume()) ++audit.violations;
    }
  }
  return audit;
}

}  // namespace binpack
