#include "binpack/diffusion.hpp"

#include <cmath>
#include <utility>

#include "binpack/errors.hpp"

namespace binpack {

TensorND to_batch(const StateTensor& s) {
  return TensorND({1, s.length, s.width, 4}, s.data);
}

namespace {

LayerList encoder_layers(int length, int width) {
  LayerList layers;
  layers.push_back(std::make_unique<Conv2d>(4, 16, 3));
  layers.push_back(std::make_unique<Relu>());
  layers.push_back(std::make_unique<Conv2d>(16, 32, 3));
  layers.push_back(std::make_unique<Relu>());
  layers.push_back(std::make_unique<Flatten>());
  layers.push_back(std::make_unique<Dense>(length * width * 32, kFeatureDim));
  return layers;
}

LayerList dense_head(int in, int hidden, int out) {
  LayerList layers;
  layers.push_back(std::make_unique<Dense>(in, hidden));
  layers.push_back(std::make_unique<Relu>());
  layers.push_back(std::make_unique<Dense>(hidden, out));
  return layers;
}

}  // namespace

Network make_state_encoder(int length, int width) {
  Network net;
  net.add_slot("state", {length, width, 4}, encoder_layers(length, width));
  net.set_trunk({});
  return net;
}

Network make_critic(int length, int width) {
  Network net;
  net.add_slot("state", {length, width, 4}, encoder_layers(length, width));
  net.set_trunk(dense_head(kFeatureDim, kHiddenDim, 1));
  return net;
}

Network make_denoiser_head(int actions) {
  Network net;
  net.add_slot("x_t", {actions}, {});
  {
    LayerList branch;
    branch.push_back(std::make_unique<SinusoidalEmbedding>(kTimeEmbedDim));
    net.add_slot("t", {1}, std::move(branch));
  }
  net.add_slot("feat", {kFeatureDim}, {});
  net.set_trunk(dense_head(actions + kTimeEmbedDim + kFeatureDim, kHiddenDim, actions));
  return net;
}

Network make_guidance_net(int actions) {
  Network net;
  net.add_slot("feat", {kFeatureDim}, {});
  net.add_slot("logits", {actions}, {});
  net.set_trunk(dense_head(kFeatureDim + actions, kHiddenDim, 1));
  return net;
}

Network make_mask_head(int actions) {
  Network net;
  net.add_slot("feat", {kFeatureDim}, {});
  LayerList trunk = dense_head(kFeatureDim, kHiddenDim, actions);
  trunk.push_back(std::make_unique<Sigmoid>());
  net.set_trunk(std::move(trunk));
  return net;
}

DiffusionActor::DiffusionActor(int actions, NoiseSchedule sched, int length, int width)
    : encoder(make_state_encoder(length, width)),
      denoiser(make_denoiser_head(actions)), schedule(std::move(sched)) {}

void DiffusionActor::init(RandomEngine& rng) {
  encoder.init(rng);
  denoiser.init(rng);
}

TensorND DiffusionActor::encode(const TensorND& state_batch) {
  return encoder.forward({state_batch});
}

TensorND DiffusionActor::predict_noise(const TensorND& x_t, const TensorND& t_column,
                                       const TensorND& feat) {
  return denoiser.forward({x_t, t_column, feat});
}

TensorND GuidanceModel::predict(const TensorND& feat, const TensorND& logits) {
  return net_.forward({feat, logits});
}

TensorND GuidanceModel::logits_gradient(const TensorND& feat, const TensorND& logits) {
  const TensorND out = net_.forward({feat, logits});
  TensorND ones(out.shape(), 1.0);
  std::vector<TensorND> grads = net_.backward(ones, /*param_grads=*/false);
  return std::move(grads[1]);
}

TensorND MaskPredictorModel::predict(const TensorND& state_batch) {
  return head_.forward({encoder_.forward({state_batch})});
}

std::vector<TensorND*> MaskPredictorModel::params() {
  std::vector<TensorND*> out = encoder_.params();
  for (TensorND* p : head_.params()) out.push_back(p);
  return out;
}

std::vector<TensorND*> MaskPredictorModel::grads() {
  std::vector<TensorND*> out = encoder_.grads();
  for (TensorND* g : head_.grads()) out.push_back(g);
  return out;
}

TensorND reverse_step(DiffusionActor& actor, const TensorND& x_t, int t,
                      const TensorND& feat, GuidanceModel* guide, double alpha,
                      RandomEngine& rng) {
  const NoiseSchedule& s = actor.schedule;
  if (t < 1 || t > s.steps) throw BadSchedule("reverse_step: t outside [1, T]");
  const int n = x_t.dim(0);
  TensorND t_column({n, 1}, static_cast<double>(t));
  const TensorND eps = actor.predict_noise(x_t, t_column, feat);
  const std::size_t ti = static_cast<std::size_t>(t);
  const double inv_sqrt_alpha = 1.0 / std::sqrt(s.alpha[ti]);
  const double eps_coef = s.beta[ti] / std::sqrt(1.0 - s.alpha_bar[ti]);
  TensorND mean(x_t.shape());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    mean[i] = inv_sqrt_alpha * (x_t[i] - eps_coef * eps[i]);
  }
  if (guide != nullptr && alpha != 0.0) {
    const TensorND g = guide->logits_gradient(feat, x_t);
    const double shift = s.beta[ti] * alpha;  // sigma_t^2 = beta_t
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += shift * g[i];
  }
  mean.require_finite("reverse_step mean");
  if (t == 1) return mean;
  const double sigma = s.sigma[ti];
  for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += sigma * rng.normal();
  return mean;
}

TensorND sample_action_logits(DiffusionActor& actor, const TensorND& feat,
                              GuidanceModel* guide, double alpha,
                              RandomEngine& rng) {
  const int n = feat.dim(0);
  const int actions = actor.denoiser.slot_shape(0)[0];
  TensorND x({n, actions});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
  for (int t = actor.schedule.steps; t >= 1; --t) {
    x = reverse_step(actor, x, t, feat, guide, alpha, rng);
  }
  x.require_finite("sampled logits");
  return x;
}

std::vector<double> policy_distribution(const std::vector<double>& logits,
                                        const FeasibilityMask& mask) {
  if (logits.size() != mask.size()) throw ShapeMismatch("policy_distribution: sizes");
  double mx = -HUGE_VAL;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i] && logits[i] > mx) mx = logits[i];
  }
  if (mx == -HUGE_VAL) throw AllMasked("policy_distribution: no feasible action");
  std::vector<double> probs(logits.size(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) {
      probs[i] = std::exp(logits[i] - mx);
      z += probs[i];
    }
  }
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (mask[i]) probs[i] /= z;
  }
  return probs;
}

std::optional<Action> DiffusionPolicy::choose(const PackingEnv& env) {
  const PackingState& st = env.state();
  if (st.terminal || !any_feasible(st.mask)) return std::nullopt;
  const Dims3 c = env.container();
  const TensorND state = to_batch(encode_state(st, c));
  const TensorND feat = actor_.encode(state);
  const TensorND x0 = sample_action_logits(actor_, feat, guide_, cfg_.alpha, rng_);
  last_logits_.assign(x0.values().begin(), x0.values().end());
  const std::vector<double> probs = policy_distribution(last_logits_, st.mask);
  std::size_t pick = 0;
  if (cfg_.sample) {
    const double u = rng_.uniform();
    double acc = 0.0;
    pick = probs.size() - 1;  // guard against round-off at the tail
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    while (!st.mask[pick]) --pick;  // tail fallback can land on a masked zero
  } else {
    double best = -1.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] > best) {
        best = probs[i];
        pick = i;
      }
    }
  }
  return Action::from_flat(static_cast<int>(pick), c.l, c.w);
}

}  // namespace binpack
