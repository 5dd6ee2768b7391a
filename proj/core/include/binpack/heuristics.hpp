#pragma once

#include <cstdint>
#include <optional>

#include "binpack/env.hpp"
#include "binpack/rng.hpp"

namespace binpack {

/// Wall-hugging rule: among feasible actions prefer the lowest resting
/// height, then the smallest Chebyshev distance from the footprint to the
/// nearest container corner, then the smallest flat action index.
class BoundaryRulePolicy final : public Policy {
 public:
  std::optional<Action> choose(const PackingEnv& env) override;
  const char* name() const override { return "boundary"; }
};

/// Best-fit over empty maximal spaces: for every (space, orientation) pair
/// where the oriented item fits, place it at the space's minimum corner and
/// keep the candidate with the least residual space volume; ties go to the
/// lower space, then lexicographic corner, then flat index. Falls back to
/// the boundary scan when no space admits a feasible placement.
class BphPolicy final : public Policy {
 public:
  std::optional<Action> choose(const PackingEnv& env) override;
  const char* name() const override { return "bph"; }
};

/// Uniform choice over the feasible-action mask.
class RandomFeasiblePolicy final : public Policy {
 public:
  explicit RandomFeasiblePolicy(std::uint64_t seed) : rng_(seed) {}
  std::optional<Action> choose(const PackingEnv& env) override;
  const char* name() const override { return "random"; }

 private:
  RandomEngine rng_;
};

}  // namespace binpack
