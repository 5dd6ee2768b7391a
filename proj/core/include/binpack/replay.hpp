#pragma once

#include <cstddef>
#include <vector>

#include "binpack/env.hpp"
#include "binpack/rng.hpp"
#include "binpack/tensor.hpp"

namespace binpack {

/// One environment interaction. return_to_go is filled in when the episode
/// finishes, before the transition reaches the buffer.
struct Transition {
  TensorND state;        // (L, W, 4)
  FeasibilityMask mask;  // ground truth at record time
  int action = -1;       // flat index
  std::vector<double> logits;  // sampled x0 behind the choice (may be empty)
  double reward = 0.0;
  TensorND next_state;   // empty when terminal
  bool done = false;
  double return_to_go = 0.0;
};

/// Fixed-capacity ring with FIFO eviction and uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t total_pushed() const { return pushed_; }

  /// i = 0 is the oldest retained transition.
  const Transition& at(std::size_t i) const;

  /// Uniform with replacement.
  std::vector<const Transition*> sample(int n, RandomEngine& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot the next push overwrites once full
  std::size_t pushed_ = 0;
  std::vector<Transition> data_;
};

}  // namespace binpack
