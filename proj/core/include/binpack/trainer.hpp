#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "binpack/checkpoint.hpp"
#include "binpack/datasets.hpp"
#include "binpack/diffusion.hpp"
#include "binpack/env.hpp"
#include "binpack/optimizer.hpp"
#include "binpack/replay.hpp"

namespace binpack {

/// Training hyperparameters. The defaults are the full-scale settings;
/// short runs shrink epochs only.
struct TrainConfig {
  Dims3 container{10, 10, 10};
  double rho_min = 0.25;

  GeneratorKind kind = GeneratorKind::RS;
  int dim_min = 2;
  int dim_max = 5;
  int stream_length = 80;

  double gamma = 0.99;
  double actor_lr = 1e-4;
  double critic_lr = 5e-4;
  int batch_size = 64;
  int diffusion_steps = 100;
  double beta_1 = kDefaultBeta1;
  double beta_t = kDefaultBetaT;
  int epochs = 1000;
  int max_steps_per_epoch = 100;
  int updates_per_epoch = 16;
  double alpha = 1.0;  // guidance scale during collection
  std::size_t buffer_capacity = 10000;
  std::uint64_t seed = 0;

  void validate() const;  // throws BadConfig
};

/// One update round's scalars plus the stats of the epoch's collection
/// phase. "update" is the global step counter used as the timestamp.
struct LossRow {
  int epoch = 0;
  std::int64_t update = 0;
  double critic_loss = 0.0;
  double action_loss = 0.0;
  double guidance_loss = 0.0;
  double mask_loss = 0.0;
  double mean_return = 0.0;
  double mean_utilization = 0.0;
  double mean_items = 0.0;
};

inline constexpr const char* kLossCsvHeader =
    "epoch,update,critic_loss,action_loss,guidance_loss,mask_loss,"
    "mean_return,mean_utilization,mean_items";

std::string to_csv_row(const LossRow& row);

struct EpisodeStats {
  int steps = 0;
  double total_reward = 0.0;      // undiscounted; telescopes to utilization/100
  double discounted_return = 0.0; // gamma-discounted from the first step
  double utilization = 0.0;
  int items = 0;
};

struct EpochSummary {
  int episodes = 0;
  int steps = 0;
  double mean_return = 0.0;
  double mean_utilization = 0.0;
  double mean_items = 0.0;
};

/// Runs one episode under the policy, appending every transition (with its
/// episode-completed return-to-go) to the buffer.
EpisodeStats collect_episode(PackingEnv& env, std::vector<Dims3> stream,
                             Policy& policy, ReplayBuffer& buffer, double gamma);

/// Owns the four networks, their optimizers, the buffer and the environment.
class Trainer {
 public:
  explicit Trainer(TrainConfig cfg);

  /// Full loop: epochs x (collect then update rounds). Appends one LossRow
  /// per update round to losses.csv under out_dir and rewrites
  /// checkpoint.bpk after every epoch.
  void train(const std::string& out_dir);

  // The individual phases, exposed for tests and for the CLI's smoke paths.
  EpochSummary collect_epoch();
  double critic_update(const std::vector<const Transition*>& batch);
  std::pair<double, double> actor_update(const std::vector<const Transition*>& batch);
  double mask_update(const std::vector<const Transition*>& batch);
  LossRow update_round();

  Checkpoint make_checkpoint();
  void restore(const Checkpoint& ckpt);

  const TrainConfig& config() const { return cfg_; }
  int epoch() const { return epoch_; }
  std::int64_t global_update() const { return global_update_; }
  ReplayBuffer& buffer() { return buffer_; }
  DiffusionActor& actor() { return actor_; }
  GuidanceModel& guidance() { return guidance_; }
  MaskPredictorModel& mask_predictor() { return mask_predictor_; }
  Network& critic() { return critic_; }

  /// Clean-logits regression inputs for the guidance model: the executed
  /// action rendered as the +c/-c target vector.
  static TensorND target_logits(const std::vector<const Transition*>& batch,
                                int actions);

  static constexpr const char* kCheckpointFile = "checkpoint.bpk";
  static constexpr const char* kLossFile = "losses.csv";

 private:
  TensorND stack_states(const std::vector<const Transition*>& batch,
                        bool next) const;

  TrainConfig cfg_;
  int actions_;
  PackingEnv env_;
  ReplayBuffer buffer_;
  DiffusionActor actor_;
  GuidanceModel guidance_;
  MaskPredictorModel mask_predictor_;
  Network critic_;
  Adam actor_opt_;
  Adam critic_opt_;
  Adam guidance_opt_;
  Adam mask_opt_;
  RandomEngine update_rng_;
  int epoch_ = 0;
  std::int64_t global_update_ = 0;
  std::int64_t episode_index_ = 0;
  EpochSummary last_epoch_;
};

/// Actor + guidance pair reconstructed from a training checkpoint, enough
/// to run the diffusion policy at evaluation time.
struct ActorBundle {
  DiffusionActor actor;
  GuidanceModel guidance;
  double trained_alpha = 1.0;

  ActorBundle(int actions, NoiseSchedule sched, int length, int width)
      : actor(actions, std::move(sched), length, width), guidance(actions) {}
};

std::unique_ptr<ActorBundle> load_actor_bundle(const std::string& checkpoint_path,
                                               const Dims3& container);

}  // namespace binpack
