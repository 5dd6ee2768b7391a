#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "binpack/env.hpp"
#include "binpack/net.hpp"
#include "binpack/schedule.hpp"

namespace binpack {

inline constexpr int kFeatureDim = 128;
inline constexpr int kHiddenDim = 256;
inline constexpr int kTimeEmbedDim = 32;
// Logit magnitude of the clean diffusion target: the executed action sits at
// +c, everything else at -c, which makes the masked softmax nearly a point
// mass while keeping the variable continuous.
inline constexpr double kLogitScale = 3.0;

inline int action_count(const Dims3& container) {
  return kOrientationCount * container.l * container.w;
}

/// (N, L, W, 4) batch with a single state in it.
TensorND to_batch(const StateTensor& s);

// Net factories. All nets are seeded by the caller via Network::init.
Network make_state_encoder(int length = 10, int width = 10);
Network make_critic(int length = 10, int width = 10);
Network make_denoiser_head(int actions);  // (x_t, t, feat) -> predicted noise
Network make_guidance_net(int actions);   // (feat, logits) -> predicted return
Network make_mask_head(int actions);      // feat -> per-action probabilities

/// The actor: shared state encoder plus the noise-prediction head. Encoding
/// is factored out so one feature pass serves a whole reverse chain.
struct DiffusionActor {
  Network encoder;
  Network denoiser;
  NoiseSchedule schedule;

  DiffusionActor(int actions, NoiseSchedule sched, int length = 10, int width = 10);
  void init(RandomEngine& rng);

  /// (N, L, W, 4) -> (N, kFeatureDim)
  TensorND encode(const TensorND& state_batch);
  /// Noise prediction for explicit timesteps, one per row.
  TensorND predict_noise(const TensorND& x_t, const TensorND& t_column,
                         const TensorND& feat);
};

/// Return model: scalar predicted return, differentiable in the logits.
class GuidanceModel {
 public:
  explicit GuidanceModel(int actions) : net_(make_guidance_net(actions)) {}
  void init(RandomEngine& rng) { net_.init(rng); }

  /// (N, feat), (N, actions) -> (N, 1)
  TensorND predict(const TensorND& feat, const TensorND& logits);

  /// d(sum of predicted returns)/d(logits); parameter gradients untouched.
  TensorND logits_gradient(const TensorND& feat, const TensorND& logits);

  Network& network() { return net_; }

 private:
  Network net_;
};

/// Feasibility predictor: trained on ground-truth masks, audited at eval;
/// never the execution gate (the exact mask is).
class MaskPredictorModel {
 public:
  explicit MaskPredictorModel(int actions, int length = 10, int width = 10)
      : encoder_(make_state_encoder(length, width)), head_(make_mask_head(actions)) {}
  void init(RandomEngine& rng) {
    encoder_.init(rng);
    head_.init(rng);
  }

  /// (N, L, W, 4) -> (N, actions) probabilities in (0, 1).
  TensorND predict(const TensorND& state_batch);

  Network& encoder() { return encoder_; }
  Network& head() { return head_; }
  std::vector<TensorND*> params();
  std::vector<TensorND*> grads();

 private:
  Network encoder_;
  Network head_;
};

/// One ancestral sampling step x_t -> x_{t-1}. The base mean follows the
/// standard noise-prediction parameterization; a guidance model shifts the
/// mean by sigma_t^2 * alpha * d(zeta)/d(x_t). The final step (t=1) adds no
/// noise. alpha=0 must match the unguided step bitwise, so the shift is
/// skipped entirely rather than multiplied by zero.
TensorND reverse_step(DiffusionActor& actor, const TensorND& x_t, int t,
                      const TensorND& feat, GuidanceModel* guide, double alpha,
                      RandomEngine& rng);

/// Full reverse chain from standard-normal x_T; returns x_0, shape (N, actions).
TensorND sample_action_logits(DiffusionActor& actor, const TensorND& feat,
                              GuidanceModel* guide, double alpha,
                              RandomEngine& rng);

/// Masked softmax: probability exactly 0 on masked entries, sums to 1 over
/// the rest. Throws AllMasked when nothing is admissible.
std::vector<double> policy_distribution(const std::vector<double>& logits,
                                        const FeasibilityMask& mask);

struct DiffusionPolicyConfig {
  double alpha = 1.0;    // guidance scale
  bool sample = false;   // sample the distribution (training) vs argmax (eval)
  std::uint64_t seed = 0;
};

/// Policy adapter: encode state, run the guided reverse chain, decode via the
/// ground-truth mask. Keeps the last sampled logits for the trainer.
class DiffusionPolicy final : public Policy {
 public:
  DiffusionPolicy(DiffusionActor& actor, GuidanceModel* guide,
                  DiffusionPolicyConfig cfg)
      : actor_(actor), guide_(guide), cfg_(cfg), rng_(cfg.seed) {}

  std::optional<Action> choose(const PackingEnv& env) override;
  const char* name() const override { return "diffusion"; }
  const std::vector<double>* last_logits() const override { return &last_logits_; }

 private:
  DiffusionActor& actor_;
  GuidanceModel* guide_;
  DiffusionPolicyConfig cfg_;
  RandomEngine rng_;
  std::vector<double> last_logits_;
};

}  // namespace binpack
