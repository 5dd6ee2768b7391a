#pragma once

#include <cstdint>
#include <vector>

#include "binpack/tensor.hpp"

namespace binpack {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adaptive-moment gradient descent with bias correction. Binds to a fixed
/// parameter list; moments live here and are checkpointable.
class Adam {
 public:
  Adam(std::vector<TensorND*> params, AdamConfig cfg);

  /// One update from the given gradients (aligned with the parameter list).
  void step(const std::vector<TensorND*>& grads);

  const AdamConfig& config() const { return cfg_; }
  std::int64_t step_count() const { return step_; }

  // Checkpoint access: moments aligned with the bound parameters.
  std::vector<TensorND>& first_moments() { return m_; }
  std::vector<TensorND>& second_moments() { return v_; }
  void set_step_count(std::int64_t t) { step_ = t; }

 private:
  std::vector<TensorND*> params_;
  AdamConfig cfg_;
  std::vector<TensorND> m_, v_;
  std::int64_t step_ = 0;
};

}  // namespace binpack
