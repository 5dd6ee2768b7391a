#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "binpack/geometry.hpp"

namespace binpack {

/// Network-facing encoding of a packing state: an L x W x 4 array where
/// channel 0 is the height map scaled by 1/H and channels 1-3 are filled
/// with the current item dims scaled by the container dims.
struct StateTensor {
  int length = 0;
  int width = 0;
  std::vector<double> data;  // row-major (x, y, channel)

  double at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(x) * width + y) * 4 + c];
  }
};

using FeasibilityMask = std::vector<std::uint8_t>;

struct PackingState {
  HeightMap hm;
  Dims3 current_item;
  std::vector<Placement> placed;
  int step_index = 0;
  std::size_t stream_pos = 0;  // index of current_item in the stream
  bool terminal = false;
  FeasibilityMask mask;  // ground truth for current_item, cached eagerly
};

struct StepOutcome {
  double reward = 0.0;
  bool done = false;
};

/// Ground-truth mask over all 6*L*W actions for the given item.
FeasibilityMask compute_feasibility_mask(const HeightMap& hm,
                                         const Dims3& container,
                                         const Dims3& item, double rho_min);

bool any_feasible(const FeasibilityMask& mask);

StateTensor encode_state(const PackingState& s, const Dims3& container);

/// Discounted return of a reward sequence.
double episode_return(const std::vector<double>& rewards, double gamma);

/// The packing MDP. One instance owns one episode's mutable state; run many
/// instances for parallel rollouts.
class PackingEnv {
 public:
  explicit PackingEnv(Dims3 container = {10, 10, 10}, double rho_min = 0.25);

  /// Starts an episode on the given item stream. Throws EmptyStream.
  const PackingState& reset(std::vector<Dims3> stream);

  /// Applies an action for the current item. Infeasible actions are a
  /// defined terminal outcome (reward 0), not an error.
  StepOutcome step(const Action& a);

  const PackingState& state() const { return state_; }
  const Dims3& container() const { return container_; }
  double rho_min() const { return rho_min_; }
  bool done() const { return state_.terminal; }
  const std::vector<Dims3>& stream() const { return stream_; }

  double current_utilization() const {
    return utilization(state_.placed, container_);
  }

 private:
  void advance_item();

  Dims3 container_;
  double rho_min_;
  std::vector<Dims3> stream_;
  PackingState state_;
};

/// Common interface for anything that can pick actions: heuristics and the
/// learned policy. Returns nullopt when no feasible action exists.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::optional<Action> choose(const PackingEnv& env) = 0;
  virtual const char* name() const = 0;

  /// Logits behind the last choice, for policies that have them; the replay
  /// buffer snapshots these. Null for heuristics.
  virtual const std::vector<double>* last_logits() const { return nullptr; }
};

}  // namespace binpack
