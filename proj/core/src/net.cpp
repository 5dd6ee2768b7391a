#include "binpack/net.hpp"

#include <cmath>

#include "binpack/errors.hpp"

namespace binpack {

namespace {

void require_rank(const TensorND& t, std::size_t rank, const char* who) {
  if (t.shape().size() != rank) {
    throw ShapeMismatch(std::string(who) + ": unexpected tensor rank");
  }
}

int sample_width(const std::vector<int>& shape) {
  int w = 1;
  for (std::size_t i = 1; i < shape.size(); ++i) w *= shape[i];
  return w;
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int in_channels, int out_channels, int kernel)
    : in_c_(in_channels), out_c_(out_channels), k_(kernel),
      weight_({kernel, kernel, in_channels, out_channels}),
      bias_({out_channels}),
      grad_weight_({kernel, kernel, in_channels, out_channels}),
      grad_bias_({out_channels}) {
  if (kernel % 2 == 0 || kernel < 1) throw BadConfig("kernel must be odd");
}

void Conv2d::init(RandomEngine& rng) {
  const double std = std::sqrt(2.0 / (k_ * k_ * in_c_));
  for (std::size_t i = 0; i < weight_.size(); ++i) weight_[i] = rng.normal() * std;
  bias_.fill(0.0);
}

std::vector<int> Conv2d::out_shape(const std::vector<int>& in) const {
  if (in.size() != 4 || in[3] != in_c_) throw ShapeMismatch("conv2d input");
  return {in[0], in[1], in[2], out_c_};
}

TensorND Conv2d::forward(const TensorND& in) {
  require_rank(in, 4, "conv2d");
  const int n = in.dim(0), h = in.dim(1), w = in.dim(2);
  if (in.dim(3) != in_c_) throw ShapeMismatch("conv2d: channel count");
  const int pad = k_ / 2;
  TensorND out({n, h, w, out_c_});
  const double* x = in.data();
  const double* wt = weight_.data();
  double* y = out.data();
  for (int b = 0; b < n; ++b) {
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        double* yo = y + ((static_cast<std::size_t>(b) * h + i) * w + j) * out_c_;
        for (int oc = 0; oc < out_c_; ++oc) yo[oc] = bias_[static_cast<std::size_t>(oc)];
        for (int di = 0; di < k_; ++di) {
          const int ii = i + di - pad;
          if (ii < 0 || ii >= h) continue;
          for (int dj = 0; dj < k_; ++dj) {
            const int jj = j + dj - pad;
            if (jj < 0 || jj >= w) continue;
            const double* xr = x + ((static_cast<std::size_t>(b) * h + ii) * w + jj) * in_c_;
            const double* wr = wt + ((static_cast<std::size_t>(di) * k_ + dj) * in_c_) * out_c_;
            for (int ic = 0; ic < in_c_; ++ic) {
              const double xv = xr[ic];
              const double* wc = wr + static_cast<std::size_t>(ic) * out_c_;
              for (int oc = 0; oc < out_c_; ++oc) yo[oc] += xv * wc[oc];
            }
          }
        }
      }
    }
  }
  cached_in_ = in;
  has_cache_ = true;
  return out;
}

TensorND Conv2d::backward(const TensorND& grad_out, bool param_grads) {
  if (!has_cache_) throw MissingCache("conv2d backward before forward");
  const int n = cached_in_.dim(0), h = cached_in_.dim(1), w = cached_in_.dim(2);
  if (grad_out.shape() != std::vector<int>{n, h, w, out_c_}) {
    throw ShapeMismatch("conv2d: grad shape");
  }
  const int pad = k_ / 2;
  TensorND grad_in({n, h, w, in_c_});
  const double* x = cached_in_.data();
  const double* wt = weight_.data();
  const double* gy = grad_out.data();
  double* gx = grad_in.data();
  double* gw = grad_weight_.data();
  for (int b = 0; b < n; ++b) {
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        const double* go = gy + ((static_cast<std::size_t>(b) * h + i) * w + j) * out_c_;
        if (param_grads) {
          for (int oc = 0; oc < out_c_; ++oc) grad_bias_[static_cast<std::size_t>(oc)] += go[oc];
        }
        for (int di = 0; di < k_; ++di) {
          const int ii = i + di - pad;
          if (ii < 0 || ii >= h) continue;
          for (int dj = 0; dj < k_; ++dj) {
            const int jj = j + dj - pad;
            if (jj < 0 || jj >= w) continue;
            const std::size_t roff = ((static_cast<std::size_t>(b) * h + ii) * w + jj) * in_c_;
            const std::size_t woff = (static_cast<std::size_t>(di) * k_ + dj) * in_c_ * out_c_;
            for (int ic = 0; ic < in_c_; ++ic) {
              const double* wc = wt + woff + static_cast<std::size_t>(ic) * out_c_;
              double acc = 0.0;
              for (int oc = 0; oc < out_c_; ++oc) acc += wc[oc] * go[oc];
              gx[roff + static_cast<std::size_t>(ic)] += acc;
              if (param_grads) {
                const double xv = x[roff + static_cast<std::size_t>(ic)];
                double* gwc = gw + woff + static_cast<std::size_t>(ic) * out_c_;
                for (int oc = 0; oc < out_c_; ++oc) gwc[oc] += xv * go[oc];
              }
            }
          }
        }
      }
    }
  }
  return grad_in;
}

// ----------------------------------------------------------------- Dense

Dense::Dense(int in_features, int out_features)
    : in_f_(in_features), out_f_(out_features),
      weight_({in_features, out_features}), bias_({out_features}),
      grad_weight_({in_features, out_features}), grad_bias_({out_features}) {}

void Dense::init(RandomEngine& rng) {
  const double std = std::sqrt(2.0 / in_f_);
  for (std::size_t i = 0; i < weight_.size(); ++i) weight_[i] = rng.normal() * std;
  bias_.fill(0.0);
}

std::vector<int> Dense::out_shape(const std::vector<int>& in) const {
  if (in.size() != 2 || in[1] != in_f_) throw ShapeMismatch("dense input");
  return {in[0], out_f_};
}

TensorND Dense::forward(const TensorND& in) {
  require_rank(in, 2, "dense");
  if (in.dim(1) != in_f_) throw ShapeMismatch("dense: feature count");
  const int n = in.dim(0);
  TensorND out({n, out_f_});
  const double* x = in.data();
  const double* wt = weight_.data();
  double* y = out.data();
  for (int b = 0; b < n; ++b) {
    double* yo = y + static_cast<std::size_t>(b) * out_f_;
    for (int o = 0; o < out_f_; ++o) yo[o] = bias_[static_cast<std::size_t>(o)];
    const double* xr = x + static_cast<std::size_t>(b) * in_f_;
    for (int i = 0; i < in_f_; ++i) {
      const double xv = xr[i];
      const double* wr = wt + static_cast<std::size_t>(i) * out_f_;
      for (int o = 0; o < out_f_; ++o) yo[o] += xv * wr[o];
    }
  }
  cached_in_ = in;
  has_cache_ = true;
  return out;
}

TensorND Dense::backward(const TensorND& grad_out, bool param_grads) {
  if (!has_cache_) throw MissingCache("dense backward before forward");
  const int n = cached_in_.dim(0);
  if (grad_out.shape() != std::vector<int>{n, out_f_}) {
    throw ShapeMismatch("dense: grad shape");
  }
  TensorND grad_in({n, in_f_});
  const double* x = cached_in_.data();
  const double* wt = weight_.data();
  const double* gy = grad_out.data();
  double* gx = grad_in.data();
  double* gw = grad_weight_.data();
  for (int b = 0; b < n; ++b) {
    const double* go = gy + static_cast<std::size_t>(b) * out_f_;
    const double* xr = x + static_cast<std::size_t>(b) * in_f_;
    double* gr = gx + static_cast<std::size_t>(b) * in_f_;
    if (param_grads) {
      for (int o = 0; o < out_f_; ++o) grad_bias_[static_cast<std::size_t>(o)] += go[o];
    }
    for (int i = 0; i < in_f_; ++i) {
      const double* wr = wt + static_cast<std::size_t>(i) * out_f_;
      double acc = 0.0;
      for (int o = 0; o < out_f_; ++o) acc += wr[o] * go[o];
      gr[i] = acc;
      if (param_grads) {
        double* gwr = gw + static_cast<std::size_t>(i) * out_f_;
        const double xv = xr[i];
        for (int o = 0; o < out_f_; ++o) gwr[o] += xv * go[o];
      }
    }
  }
  return grad_in;
}

// ------------------------------------------------------------ pointwise

TensorND Relu::forward(const TensorND& in) {
  TensorND out = in;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0.0) out[i] = 0.0;
  }
  cached_in_ = in;
  has_cache_ = true;
  return out;
}

TensorND Relu::backward(const TensorND& grad_out, bool) {
  if (!has_cache_) throw MissingCache("relu backward before forward");
  if (grad_out.shape() != cached_in_.shape()) throw ShapeMismatch("relu: grad shape");
  TensorND grad_in = grad_out;
  for (std::size_t i = 0; i < grad_in.size(); ++i) {
    if (cached_in_[i] <= 0.0) grad_in[i] = 0.0;
  }
  return grad_in;
}

TensorND Sigmoid::forward(const TensorND& in) {
  TensorND out = in;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 1.0 / (1.0 + std::exp(-out[i]));
  }
  cached_out_ = out;
  has_cache_ = true;
  return out;
}

TensorND Sigmoid::backward(const TensorND& grad_out, bool) {
  if (!has_cache_) throw MissingCache("sigmoid backward before forward");
  if (grad_out.shape() != cached_out_.shape()) throw ShapeMismatch("sigmoid: grad shape");
  TensorND grad_in = grad_out;
  for (std::size_t i = 0; i < grad_in.size(); ++i) {
    grad_in[i] *= cached_out_[i] * (1.0 - cached_out_[i]);
  }
  return grad_in;
}

// -------------------------------------------------------------- flatten

std::vector<int> Flatten::out_shape(const std::vector<int>& in) const {
  return {in[0], sample_width(in)};
}

TensorND Flatten::forward(const TensorND& in) {
  cached_shape_ = in.shape();
  has_cache_ = true;
  return in.reshaped({in.dim(0), sample_width(in.shape())});
}

TensorND Flatten::backward(const TensorND& grad_out, bool) {
  if (!has_cache_) throw MissingCache("flatten backward before forward");
  return grad_out.reshaped(cached_shape_);
}

// ------------------------------------------------- sinusoidal embedding

SinusoidalEmbedding::SinusoidalEmbedding(int dim) : dim_(dim) {
  if (dim < 2 || dim % 2 != 0) throw BadConfig("embedding dim must be even");
}

std::vector<int> SinusoidalEmbedding::out_shape(const std::vector<int>& in) const {
  if (in.size() != 2 || in[1] != 1) throw ShapeMismatch("sin_embed input");
  return {in[0], dim_};
}

TensorND SinusoidalEmbedding::forward(const TensorND& in) {
  require_rank(in, 2, "sin_embed");
  if (in.dim(1) != 1) throw ShapeMismatch("sin_embed: expects (N, 1)");
  const int n = in.dim(0);
  const int half = dim_ / 2;
  TensorND out({n, dim_});
  for (int b = 0; b < n; ++b) {
    const double t = in[static_cast<std::size_t>(b)];
    for (int i = 0; i < half; ++i) {
      const double freq = std::exp(-std::log(10000.0) * i / half);
      out[static_cast<std::size_t>(b) * dim_ + 2 * i] = std::sin(t * freq);
      out[static_cast<std::size_t>(b) * dim_ + 2 * i + 1] = std::cos(t * freq);
    }
  }
  cached_shape_ = in.shape();
  has_cache_ = true;
  return out;
}

TensorND SinusoidalEmbedding::backward(const TensorND& grad_out, bool) {
  if (!has_cache_) throw MissingCache("sin_embed backward before forward");
  if (grad_out.shape() != std::vector<int>{cached_shape_[0], dim_}) {
    throw ShapeMismatch("sin_embed: grad shape");
  }
  return TensorND(cached_shape_);  // step index is not differentiated
}

// -------------------------------------------------------------- Network

void Network::add_slot(std::string name, std::vector<int> sample_shape, LayerList branch) {
  Slot slot;
  slot.name = std::move(name);
  slot.sample_shape = std::move(sample_shape);
  slot.branch = std::move(branch);
  std::vector<int> shape;
  shape.push_back(1);
  for (int d : slot.sample_shape) shape.push_back(d);
  for (const auto& layer : slot.branch) shape = layer->out_shape(shape);
  slot.flat_width = sample_width(shape);
  slots_.push_back(std::move(slot));
}

void Network::set_trunk(LayerList trunk) { trunk_ = std::move(trunk); }

void Network::init(RandomEngine& rng) {
  for (auto& slot : slots_) {
    for (auto& layer : slot.branch) layer->init(rng);
  }
  for (auto& layer : trunk_) layer->init(rng);
}

int Network::concat_width() const {
  int w = 0;
  for (const Slot& s : slots_) w += s.flat_width;
  return w;
}

TensorND Network::forward(const std::vector<TensorND>& inputs) {
  if (inputs.size() != slots_.size()) throw ShapeMismatch("network: slot count");
  const int n = inputs.empty() ? 0 : inputs[0].dim(0);
  std::vector<TensorND> flats(slots_.size());
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    const TensorND& in = inputs[s];
    std::vector<int> expect;
    expect.push_back(n);
    for (int d : slots_[s].sample_shape) expect.push_back(d);
    if (in.shape() != expect) {
      throw ShapeMismatch("network: input shape for slot " + slots_[s].name);
    }
    in.require_finite("network input");
    TensorND cur = in;
    for (auto& layer : slots_[s].branch) {
      cur = layer->forward(cur);
      cur.require_finite(layer->kind());
    }
    flats[s] = cur.reshaped({n, sample_width(cur.shape())});
  }
  cached_widths_.clear();
  for (const Slot& s : slots_) cached_widths_.push_back(s.flat_width);
  cached_batch_ = n;

  TensorND cur({n, concat_width()});
  {
    int off = 0;
    for (std::size_t s = 0; s < flats.size(); ++s) {
      const int w = cached_widths_[s];
      for (int b = 0; b < n; ++b) {
        for (int i = 0; i < w; ++i) {
          cur[static_cast<std::size_t>(b) * concat_width() + off + i] =
              flats[s][static_cast<std::size_t>(b) * w + i];
        }
      }
      off += w;
    }
  }
  for (auto& layer : trunk_) {
    cur = layer->forward(cur);
    cur.require_finite(layer->kind());
  }
  return cur;
}

std::vector<TensorND> Network::backward(const TensorND& grad_out, bool param_grads) {
  if (cached_batch_ < 0) throw MissingCache("network backward before forward");
  TensorND cur = grad_out;
  for (auto it = trunk_.rbegin(); it != trunk_.rend(); ++it) {
    cur = (*it)->backward(cur, param_grads);
  }
  const int n = cached_batch_;
  if (cur.shape() != std::vector<int>{n, concat_width()}) {
    throw ShapeMismatch("network: concat grad shape");
  }
  std::vector<TensorND> input_grads;
  input_grads.reserve(slots_.size());
  int off = 0;
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    const int w = cached_widths_[s];
    TensorND slice({n, w});
    for (int b = 0; b < n; ++b) {
      for (int i = 0; i < w; ++i) {
        slice[static_cast<std::size_t>(b) * w + i] =
            cur[static_cast<std::size_t>(b) * concat_width() + off + i];
      }
    }
    off += w;
    // Undo the flatten at the concat point before walking the branch back.
    TensorND g = slice;
    if (!slots_[s].branch.empty()) {
      std::vector<int> shape;
      shape.push_back(n);
      for (int d : slots_[s].sample_shape) shape.push_back(d);
      for (const auto& layer : slots_[s].branch) shape = layer->out_shape(shape);
      g = slice.reshaped(shape);
      for (auto it = slots_[s].branch.rbegin(); it != slots_[s].branch.rend(); ++it) {
        g = (*it)->backward(g, param_grads);
      }
    } else {
      std::vector<int> shape;
      shape.push_back(n);
      for (int d : slots_[s].sample_shape) shape.push_back(d);
      g = slice.reshaped(shape);
    }
    input_grads.push_back(std::move(g));
  }
  return input_grads;
}

std::vector<TensorND*> Network::params() {
  std::vector<TensorND*> out;
  for (auto& slot : slots_) {
    for (auto& layer : slot.branch) {
      for (TensorND* p : layer->params()) out.push_back(p);
    }
  }
  for (auto& layer : trunk_) {
    for (TensorND* p : layer->params()) out.push_back(p);
  }
  return out;
}

std::vector<TensorND*> Network::grads() {
  std::vector<TensorND*> out;
  for (auto& slot : slots_) {
    for (auto& layer : slot.branch) {
      for (TensorND* g : layer->grads()) out.push_back(g);
    }
  }
  for (auto& layer : trunk_) {
    for (TensorND* g : layer->grads()) out.push_back(g);
  }
  return out;
}

void Network::zero_grads() {
  for (TensorND* g : grads()) g->fill(0.0);
}

std::size_t Network::param_count() {
  std::size_t n = 0;
  for (TensorND* p : params()) n += p->size();
  return n;
}

}  // namespace binpack
