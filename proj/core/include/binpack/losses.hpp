#pragma once

#include <cstdint>
#include <vector>

#include "binpack/tensor.hpp"

namespace binpack {

/// Scalar loss and its gradient w.r.t. the first argument, averaged over
/// the batch so learning rates do not scale with batch size.
struct LossResult {
  double value = 0.0;
  TensorND grad;
};

/// Mean squared error over all elements.
LossResult mse(const TensorND& pred, const TensorND& target);

/// Cross entropy of a masked softmax: rows are logits (N, K), targets are
/// class indices, mask rows flag admissible classes. Masked entries receive
/// exactly zero probability and zero gradient. Throws MaskedTarget if a
/// row's target class is masked out, AllMasked if a row has no admissible
/// class.
LossResult masked_cross_entropy(const TensorND& logits,
                                const std::vector<int>& target_index,
                                const std::vector<std::vector<std::uint8_t>>& mask);

/// Elementwise binary cross entropy between probabilities and labels in
/// [0, 1], averaged over all elements; probabilities are clipped away from
/// {0, 1} for finiteness.
LossResult binary_cross_entropy(const TensorND& probs, const TensorND& labels);

}  // namespace binpack
