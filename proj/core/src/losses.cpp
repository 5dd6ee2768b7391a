#include "binpack/losses.hpp"

#include <algorithm>
#include <cmath>

#include "binpack/errors.hpp"

namespace binpack {

LossResult mse(const TensorND& pred, const TensorND& target) {
  if (pred.shape() != target.shape()) throw ShapeMismatch("mse: shapes differ");
  pred.require_finite("mse prediction");
  target.require_finite("mse target");
  LossResult r;
  r.grad = TensorND(pred.shape());
  const double scale = 1.0 / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    r.value += d * d * scale;
    r.grad[i] = 2.0 * d * scale;
  }
  return r;
}

LossResult masked_cross_entropy(const TensorND& logits,
                                const std::vector<int>& target_index,
                                const std::vector<std::vector<std::uint8_t>>& mask) {
  if (logits.shape().size() != 2) throw ShapeMismatch("masked_ce: logits rank");
  const int n = logits.dim(0), k = logits.dim(1);
  if (target_index.size() != static_cast<std::size_t>(n) ||
      mask.size() != static_cast<std::size_t>(n)) {
    throw ShapeMismatch("masked_ce: batch size");
  }
  logits.require_finite("masked_ce logits");
  LossResult r;
  r.grad = TensorND(logits.shape());
  const double scale = 1.0 / n;
  for (int b = 0; b < n; ++b) {
    const std::vector<std::uint8_t>& m = mask[static_cast<std::size_t>(b)];
    if (m.size() != static_cast<std::size_t>(k)) throw ShapeMismatch("masked_ce: mask width");
    const int target = target_index[static_cast<std::size_t>(b)];
    if (target < 0 || target >= k) throw ShapeMismatch("masked_ce: target out of range");
    if (!m[static_cast<std::size_t>(target)]) {
      throw MaskedTarget("masked_ce: target class is masked out");
    }
    const std::size_t row = static_cast<std::size_t>(b) * k;
    double mx = -HUGE_VAL;
    for (int i = 0; i < k; ++i) {
      if (m[static_cast<std::size_t>(i)]) mx = std::max(mx, logits[row + i]);
    }
    if (mx == -HUGE_VAL) throw AllMasked("masked_ce: all classes masked");
    double z = 0.0;
    for (int i = 0; i < k; ++i) {
      if (m[static_cast<std::size_t>(i)]) z += std::exp(logits[row + i] - mx);
    }
    r.value += scale * (std::log(z) - (logits[row + static_cast<std::size_t>(target)] - mx));
    for (int i = 0; i < k; ++i) {
      if (!m[static_cast<std::size_t>(i)]) continue;
      const double p = std::exp(logits[row + i] - mx) / z;
      r.grad[row + i] = scale * (p - (i == target ? 1.0 : 0.0));
    }
  }
  return r;
}

LossResult binary_cross_entropy(const TensorND& probs, const TensorND& labels) {
  if (probs.shape() != labels.shape()) throw ShapeMismatch("bce: shapes differ");
  probs.require_finite("bce probabilities");
  labels.require_finite("bce labels");
  constexpr double kEps = 1e-7;
  LossResult r;
  r.grad = TensorND(probs.shape());
  const double scale = 1.0 / static_cast<double>(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], kEps, 1.0 - kEps);
    const double y = labels[i];
    r.value -= scale * (y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    r.grad[i] = scale * (p - y) / (p * (1.0 - p));
  }
  return r;
}

}  // namespace binpack
