#pragma once

#include <memory>
#include <string>
#include <vector>

#include "binpack/rng.hpp"
#include "binpack/tensor.hpp"

namespace binpack {

/// One differentiable stage. forward caches whatever backward needs; a
/// backward without a preceding forward raises MissingCache. Instances are
/// stateful and exclusive to one training thread; parameters can be
/// snapshotted and shared freely.
class Layer {
 public:
  virtual ~Layer() = default;

  /// in: (N, per-sample shape). Returns (N, output shape).
  virtual TensorND forward(const TensorND& in) = 0;

  /// grad_out matches the last forward's output. Returns the gradient w.r.t.
  /// that forward's input, accumulating parameter gradients unless
  /// param_grads is false.
  virtual TensorND backward(const TensorND& grad_out, bool param_grads) = 0;

  virtual std::vector<int> out_shape(const std::vector<int>& in) const = 0;
  virtual std::vector<TensorND*> params() { return {}; }
  virtual std::vector<TensorND*> grads() { return {}; }
  virtual void init(RandomEngine&) {}
  virtual const char* kind() const = 0;
};

/// 3x3-style 2D convolution, stride 1, zero padding preserving H x W.
/// Layout: (N, H, W, C); kernel (k, k, in_c, out_c).
class Conv2d final : public Layer {
 public:
  Conv2d(int in_channels, int out_channels, int kernel);

  TensorND forward(const TensorND& in) override;
  TensorND backward(const TensorND& grad_out, bool param_grads) override;
  std::vector<int> out_shape(const std::vector<int>& in) const override;
  std::vector<TensorND*> params() override { return {&weight_, &bias_}; }
  std::vector<TensorND*> grads() override { return {&grad_weight_, &grad_bias_}; }
  void init(RandomEngine& rng) override;
  const char* kind() const override { return "conv2d"; }

  TensorND& weight() { return weight_; }
  TensorND& bias() { return bias_; }

 private:
  int in_c_, out_c_, k_;
  TensorND weight_, bias_, grad_weight_, grad_bias_;
  TensorND cached_in_;
  bool has_cache_ = false;
};

/// Fully connected layer on flattened per-sample features: (N, in) -> (N, out).
class Dense final : public Layer {
 public:
  Dense(int in_features, int out_features);

  TensorND forward(const TensorND& in) override;
  TensorND backward(const TensorND& grad_out, bool param_grads) override;
  std::vector<int> out_shape(const std::vector<int>& in) const override;
  std::vector<TensorND*> params() override { return {&weight_, &bias_}; }
  std::vector<TensorND*> grads() override { return {&grad_weight_, &grad_bias_}; }
  void init(RandomEngine& rng) override;
  const char* kind() const override { return "dense"; }

  TensorND& weight() { return weight_; }
  TensorND& bias() { return bias_; }

 private:
  int in_f_, out_f_;
  TensorND weight_, bias_, grad_weight_, grad_bias_;
  TensorND cached_in_;
  bool has_cache_ = false;
};

class Relu final : public Layer {
 public:
  TensorND forward(const TensorND& in) override;
  TensorND backward(const TensorND& grad_out, bool param_grads) override;
  std::vector<int> out_shape(const std::vector<int>& in) const override { return in; }
  const char* kind() const override { return "relu"; }

 private:
  TensorND cached_in_;
  bool has_cache_ = false;
};

class Sigmoid final : public Layer {
 public:
  TensorND forward(const TensorND& in) override;
  TensorND backward(const TensorND& grad_out, bool param_grads) override;
  std::vector<int> out_shape(const std::vector<int>& in) const override { return in; }
  const char* kind() const override { return "sigmoid"; }

 private:
  TensorND cached_out_;
  bool has_cache_ = false;
};

class Flatten final : public Layer {
 public:
  TensorND forward(const TensorND& in) override;
  TensorND backward(const TensorND& grad_out, bool param_grads) override;
  std::vector<int> out_shape(const std::vector<int>& in) const override;
  const char* kind() const override { return "flatten"; }

 private:
  std::vector<int> cached_shape_;
  bool has_cache_ = false;
};

/// Maps a scalar step index to the standard alternating sin/cos frequency
/// ladder: (N, 1) -> (N, dim). No parameters; gradients stop here because
/// the step index is not a learnable quantity.
class SinusoidalEmbedding final : public Layer {
 public:
  explicit SinusoidalEmbedding(int dim);

  TensorND forward(const TensorND& in) override;
  TensorND backward(const TensorND& grad_out, bool param_grads) override;
  std::vector<int> out_shape(const std::vector<int>& in) const override;
  const char* kind() const override { return "sin_embed"; }

 private:
  int dim_;
  std::vector<int> cached_shape_;
  bool has_cache_ = false;
};

using LayerList = std::vector<std::unique_ptr<Layer>>;

/// A network is a set of named input slots, each with its own branch of
/// layers; branch outputs are flattened per sample, concatenated in slot
/// order, and fed to the trunk. This shape covers every net used here: an
/// encoder branch for the state plus flat slots for logits, features or
/// timestep embeddings.
class Network {
 public:
  Network() = default;

  void add_slot(std::string name, std::vector<int> sample_shape, LayerList branch);
  void set_trunk(LayerList trunk);

  /// Seeds every layer's parameters from one engine, in declaration order.
  void init(RandomEngine& rng);

  /// inputs[i] belongs to slot i and must be (N, slot sample shape).
  TensorND forward(const std::vector<TensorND>& inputs);

  /// Returns per-slot input gradients. param_grads=false leaves parameter
  /// gradient buffers untouched (used when a consumer only needs input
  /// gradients, e.g. guided sampling).
  std::vector<TensorND> backward(const TensorND& grad_out, bool param_grads = true);

  std::vector<TensorND*> params();
  std::vector<TensorND*> grads();
  void zero_grads();
  std::size_t param_count();

  int slot_count() const { return static_cast<int>(slots_.size()); }
  const std::string& slot_name(int i) const { return slots_[static_cast<std::size_t>(i)].name; }
  const std::vector<int>& slot_shape(int i) const {
    return slots_[static_cast<std::size_t>(i)].sample_shape;
  }

  /// Trunk input width (sum of flattened branch outputs), for wiring checks.
  int concat_width() const;

 private:
  struct Slot {
    std::string name;
    std::vector<int> sample_shape;
    LayerList branch;
    int flat_width = 0;  // per-sample width after the branch
  };

  std::vector<Slot> slots_;
  LayerList trunk_;
  std::vector<int> cached_widths_;
  int cached_batch_ = -1;
};

}  // namespace binpack
