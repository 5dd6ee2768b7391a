#include "binpack/ems.hpp"

#include <algorithm>

namespace binpack {

GridBox placement_box(const Placement& p) {
  const Dims3 od = p.oriented();
  return {p.x, p.y, p.z, p.x + od.l, p.y + od.w, p.z + od.h};
}

namespace {

void split_against(const GridBox& space, const GridBox& item,
                   std::vector<GridBox>& out) {
  // Six one-sided remainders; degenerate slabs are skipped.
  GridBox b = space;

  b = space; b.x1 = item.x0; if (!b.empty()) out.push_back(b);
  b = space; b.x0 = item.x1; if (!b.empty()) out.push_back(b);
  b = space; b.y1 = item.y0; if (!b.empty()) out.push_back(b);
  b = space; b.y0 = item.y1; if (!b.empty()) out.push_back(b);
  b = space; b.z1 = item.z0; if (!b.empty()) out.push_back(b);
  b = space; b.z0 = item.z1; if (!b.empty()) out.push_back(b);
}

void prune_non_maximal(std::vector<GridBox>& spaces) {
  std::sort(spaces.begin(), spaces.end());
  spaces.erase(std::unique(spaces.begin(), spaces.end()), spaces.end());
  std::vector<GridBox> kept;
  kept.reserve(spaces.size());
  for (std::size_t i = 0; i < spaces.size(); ++i) {
    bool contained = false;
    for (std::size_t j = 0; j < spaces.size() && !contained; ++j) {
      if (i != j && spaces[j].contains(spaces[i])) contained = true;
    }
    if (!contained) kept.push_back(spaces[i]);
  }
  spaces = std::move(kept);
}

}  // namespace

std::vector<GridBox> compute_ems(const std::vector<Placement>& placements,
                                 const Dims3& container) {
  std::vector<GridBox> spaces{
      {0, 0, 0, container.l, container.w, container.h}};
  std::vector<GridBox> next;
  for (const Placement& p : placements) {
    const GridBox item = placement_box(p);
    next.clear();
    for (const GridBox& space : spaces) {
      if (!space.intersects(item)) {
        next.push_back(space);
      } else {
        split_against(space, item, next);
      }
    }
    spaces = next;
    // Pruning each round keeps the working set small; containment is also
    // what removes duplicate remainders.
    prune_non_maximal(spaces);
  }
  return spaces;
}

}  // namespace binpack
