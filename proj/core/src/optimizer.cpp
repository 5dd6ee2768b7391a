#include "binpack/optimizer.hpp"

#include <cmath>

#include "binpack/errors.hpp"

namespace binpack {

Adam::Adam(std::vector<TensorND*> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (TensorND* p : params_) {
    m_.emplace_back(p->shape());
    v_.emplace_back(p->shape());
  }
}

void Adam::step(const std::vector<TensorND*>& grads) {
  if (grads.size() != params_.size()) throw ShapeMismatch("adam: gradient list size");
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    TensorND& p = *params_[i];
    const TensorND& g = *grads[i];
    if (g.shape() != p.shape()) throw ShapeMismatch("adam: gradient shape");
    g.require_finite("adam gradient");
    TensorND& m = m_[i];
    TensorND& v = v_[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
      const double mh = m[j] / bc1;
      const double vh = v[j] / bc2;
      p[j] -= cfg_.lr * mh / (std::sqrt(vh) + cfg_.eps);
    }
  }
}

}  // namespace binpack
