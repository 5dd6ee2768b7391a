#include "binpack/env.hpp"

#include <algorithm>
#include <stdexcept>

#include "binpack/errors.hpp"

namespace binpack {

FeasibilityMask compute_feasibility_mask(const HeightMap& hm,
                                         const Dims3& container,
                                         const Dims3& item, double rho_min) {
  FeasibilityMask mask(
      static_cast<std::size_t>(kOrientationCount) * container.l * container.w,
      0);
  for (int o = 0; o < kOrientationCount; ++o) {
    const Dims3 od = oriented_dims(item, o);
    if (od.l > container.l || od.w > container.w || od.h > container.h) {
      continue;
    }
    for (int x = 0; x + od.l <= container.l; ++x) {
      for (int y = 0; y + od.w <= container.w; ++y) {
        const Action a{x, y, o};
        if (check_placement(hm, container, item, a, rho_min)) {
          mask[a.flat_index(container.l, container.w)] = 1;
        }
      }
    }
  }
  return mask;
}

bool any_feasible(const FeasibilityMask& mask) {
  return std::find(mask.begin(), mask.end(), std::uint8_t{1}) != mask.end();
}

StateTensor encode_state(const PackingState& s, const Dims3& container) {
  StateTensor t;
  t.length = container.l;
  t.width = container.w;
  t.data.assign(static_cast<std::size_t>(container.l) * container.w * 4, 0.0);
  const double item_channels[3] = {
      static_cast<double>(s.current_item.l) / container.l,
      static_cast<double>(s.current_item.w) / container.w,
      static_cast<double>(s.current_item.h) / container.h};
  std::size_t i = 0;
  for (int x = 0; x < container.l; ++x) {
    for (int y = 0; y < container.w; ++y) {
      t.data[i++] = static_cast<double>(s.hm.at(x, y)) / container.h;
      t.data[i++] = item_channels[0];
      t.data[i++] = item_channels[1];
      t.data[i++] = item_channels[2];
    }
  }
  return t;
}

double episode_return(const std::vector<double>& rewards, double gamma) {
  if (gamma < 0.0 || gamma >= 1.0) {
    throw std::invalid_argument("episode_return: gamma must be in [0, 1)");
  }
  double total = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    total = rewards[i] + gamma * total;
  }
  return total;
}

PackingEnv::PackingEnv(Dims3 container, double rho_min)
    : container_(container), rho_min_(rho_min) {
  if (!container.valid()) throw BadConfig("PackingEnv: invalid container dims");
}

const PackingState& PackingEnv::reset(std::vector<Dims3> stream) {
  if (stream.empty()) throw EmptyStream("PackingEnv::reset: empty stream");
  stream_ = std::move(stream);
  state_ = PackingState{};
  state_.hm = HeightMap(container_.l, container_.w);
  state_.current_item = stream_[0];
  state_.stream_pos = 0;
  state_.mask = compute_feasibility_mask(state_.hm, container_,
                                         state_.current_item, rho_min_);
  state_.terminal = !any_feasible(state_.mask);
  return state_;
}

StepOutcome PackingEnv::step(const Action& a) {
  if (state_.terminal) {
    throw std::logic_error("PackingEnv::step called on a terminal state");
  }
  const int flat = a.flat_index(container_.l, container_.w);
  if (flat < 0 || flat >= static_cast<int>(state_.mask.size()) ||
      !state_.mask[flat]) {
    state_.terminal = true;
    return {0.0, true};
  }

  auto [next_hm, placement] =
      apply_placement(state_.hm, container_, state_.current_item, a, rho_min_,
                      state_.step_index);
  state_.hm = std::move(next_hm);
  state_.placed.push_back(placement);
  state_.step_index += 1;

  const double reward = static_cast<double>(state_.current_item.volume()) /
                        static_cast<double>(container_.volume());
  advance_item();
  return {reward, state_.terminal};
}

void PackingEnv::advance_item() {
  state_.stream_pos += 1;
  if (state_.stream_pos >= stream_.size()) {
    state_.terminal = true;
    state_.mask.assign(state_.mask.size(), 0);
    return;
  }
  state_.current_item = stream_[state_.stream_pos];
  state_.mask = compute_feasibility_mask(state_.hm, container_,
                                         state_.current_item, rho_min_);
  // Episode also ends when nothing fits the next item; stepping further
  // could only yield a guaranteed-zero move.
  state_.terminal = !any_feasible(state_.mask);
}

}  // namespace binpack
