#include "binpack/heuristics.hpp"

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "binpack/ems.hpp"

namespace binpack {

namespace {

int corner_distance(const Dims3& c, int x, int y, const Dims3& fd) {
  const int left = x, right = c.l - (x + fd.l);
  const int front = y, back = c.w - (y + fd.w);
  const int d00 = std::max(left, front);
  const int d01 = std::max(left, back);
  const int d10 = std::max(right, front);
  const int d11 = std::max(right, back);
  return std::min({d00, d01, d10, d11});
}

std::optional<Action> boundary_scan(const PackingEnv& env) {
  const PackingState& st = env.state();
  if (st.terminal) return std::nullopt;
  const Dims3 c = env.container();
  std::optional<Action> best;
  int best_z = 0, best_corner = 0;
  for (int o = 0; o < kOrientationCount; ++o) {
    const Dims3 fd = oriented_dims(st.current_item, o);
    for (int x = 0; x + fd.l <= c.l; ++x) {
      for (int y = 0; y + fd.w <= c.w; ++y) {
        const Action a{x, y, o};
        if (!st.mask[a.flat_index(c.l, c.w)]) continue;
        const int z = rest_height(st.hm, x, y, fd);
        const int corner = corner_distance(c, x, y, fd);
        if (!best || z < best_z || (z == best_z && corner < best_corner)) {
          best = a;
          best_z = z;
          best_corner = corner;
        }
      }
    }
  }
  return best;
}

}  // namespace

std::optional<Action> BoundaryRulePolicy::choose(const PackingEnv& env) {
  return boundary_scan(env);
}

std::optional<Action> BphPolicy::choose(const PackingEnv& env) {
  const PackingState& st = env.state();
  if (st.terminal) return std::nullopt;
  const Dims3 c = env.container();
  const std::vector<GridBox> spaces = compute_ems(st.placed, c);
  std::optional<Action> best;
  long long best_residual = 0;
  GridBox best_box{};
  int best_flat = 0;
  for (const GridBox& box : spaces) {
    for (int o = 0; o < kOrientationCount; ++o) {
      const Dims3 fd = oriented_dims(st.current_item, o);
      if (fd.l > box.x1 - box.x0 || fd.w > box.y1 - box.y0 ||
          fd.h > box.z1 - box.z0) {
        continue;
      }
      const Action a{box.x0, box.y0, o};
      const int flat = a.flat_index(c.l, c.w);
      if (!st.mask[static_cast<std::size_t>(flat)]) continue;
      const long long residual = box.volume() - fd.volume();
      const bool better =
          !best || residual < best_residual ||
          (residual == best_residual &&
           (box.z0 < best_box.z0 ||
            (box.z0 == best_box.z0 &&
             (std::pair(box.x0, box.y0) < std::pair(best_box.x0, best_box.y0) ||
              (std::pair(box.x0, box.y0) == std::pair(best_box.x0, best_box.y0) &&
               flat < best_flat)))));
      if (better) {
        best = a;
        best_residual = residual;
        best_box = box;
        best_flat = flat;
      }
    }
  }
  if (best) return best;
  return boundary_scan(env);
}

std::optional<Action> RandomFeasiblePolicy::choose(const PackingEnv& env) {
  const PackingState& st = env.state();
  if (st.terminal) return std::nullopt;
  std::vector<std::size_t> feasible;
  for (std::size_t i = 0; i < st.mask.size(); ++i) {
    if (st.mask[i]) feasible.push_back(i);
  }
  if (feasible.empty()) return std::nullopt;
  const std::size_t pick = static_cast<std::size_t>(
      rng_.uniform_int(0, static_cast<int>(feasible.size()) - 1));
  const Dims3 c = env.container();
  return Action::from_flat(static_cast<int>(feasible[pick]), c.l, c.w);
}

}  // namespace binpack
