#include "binpack/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "binpack/errors.hpp"
#include "binpack/losses.hpp"

namespace binpack {

using nlohmann::json;

namespace {

// Sub-stream tags so every consumer of randomness gets its own engine.
constexpr std::uint64_t kStreamData = 1;
constexpr std::uint64_t kStreamInit = 2;
constexpr std::uint64_t kStreamUpdates = 3;
constexpr std::uint64_t kStreamSampler = 4;

std::vector<TensorND*> concat_params(Network& a, Network& b) {
  std::vector<TensorND*> out = a.params();
  for (TensorND* p : b.params()) out.push_back(p);
  return out;
}

std::vector<TensorND*> concat_grads(Network& a, Network& b) {
  std::vector<TensorND*> out = a.grads();
  for (TensorND* g : b.grads()) out.push_back(g);
  return out;
}

void restore_moments(const CheckpointSection& section, std::vector<TensorND>& moments) {
  if (section.tensors.size() != moments.size()) {
    throw ShapeMismatch("checkpoint section '" + section.name + "': moment count");
  }
  for (std::size_t i = 0; i < moments.size(); ++i) {
    if (section.tensors[i].shape() != moments[i].shape()) {
      throw ShapeMismatch("checkpoint section '" + section.name + "': moment shape");
    }
    moments[i] = section.tensors[i];
  }
}

}  // namespace

void TrainConfig::validate() const {
  GeneratorConfig g;
  g.container = container;
  g.dim_min = dim_min;
  g.dim_max = dim_max;
  g.kind = kind;
  g.stream_length = stream_length;
  g.validate();
  if (!(rho_min >= 0.0 && rho_min <= 1.0)) throw BadConfig("rho_min must be in [0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw BadConfig("gamma must be in [0, 1)");
  if (actor_lr <= 0.0 || critic_lr <= 0.0) throw BadConfig("learning rates must be positive");
  if (batch_size < 1) throw BadConfig("batch_size must be positive");
  if (diffusion_steps < 1) throw BadConfig("diffusion_steps must be positive");
  if (epochs < 1) throw BadConfig("epochs must be positive");
  if (max_steps_per_epoch < 1) throw BadConfig("max_steps_per_epoch must be positive");
  if (updates_per_epoch < 1) throw BadConfig("updates_per_epoch must be positive");
  if (buffer_capacity == 0) throw BadConfig("buffer_capacity must be positive");
  if (!std::isfinite(alpha) || alpha < 0.0) throw BadConfig("alpha must be finite and >= 0");
}

std::string to_csv_row(const LossRow& row) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%d,%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", row.epoch,
                static_cast<long long>(row.update), row.critic_loss,
                row.action_loss, row.guidance_loss, row.mask_loss,
                row.mean_return, row.mean_utilization, row.mean_items);
  return buf;
}

EpisodeStats collect_episode(PackingEnv& env, std::vector<Dims3> stream,
                             Policy& policy, ReplayBuffer& buffer, double gamma) {
  const Dims3 c = env.container();
  env.reset(std::move(stream));
  std::vector<Transition> episode;
  EpisodeStats stats;
  while (!env.done()) {
    const PackingState& st = env.state();
    Transition tr;
    tr.state = to_batch(encode_state(st, c)).reshaped({c.l, c.w, 4});
    tr.mask = st.mask;
    const std::optional<Action> a = policy.choose(env);
    if (!a) break;
    tr.action = a->flat_index(c.l, c.w);
    if (const std::vector<double>* lg = policy.last_logits()) tr.logits = *lg;
    const StepOutcome out = env.step(*a);
    tr.reward = out.reward;
    tr.done = out.done;
    if (!out.done) {
      tr.next_state = to_batch(encode_state(env.state(), c)).reshaped({c.l, c.w, 4});
    }
    stats.total_reward += out.reward;
    episode.push_back(std::move(tr));
  }
  double acc = 0.0;
  for (std::size_t i = episode.size(); i-- > 0;) {
    acc = episode[i].reward + gamma * acc;
    episode[i].return_to_go = acc;
  }
  stats.steps = static_cast<int>(episode.size());
  stats.discounted_return = episode.empty() ? 0.0 : episode.front().return_to_go;
  stats.utilization = env.current_utilization();
  stats.items = static_cast<int>(env.state().placed.size());
  for (Transition& tr : episode) buffer.push(std::move(tr));
  return stats;
}

Trainer::Trainer(TrainConfig cfg)
    : cfg_((cfg.validate(), cfg)),
      actions_(action_count(cfg.container)),
      env_(cfg.container, cfg.rho_min),
      buffer_(cfg.buffer_capacity),
      actor_(actions_, build_schedule(cfg.diffusion_steps, cfg.beta_1, cfg.beta_t),
             cfg.container.l, cfg.container.w),
      guidance_(actions_),
      mask_predictor_(actions_, cfg.container.l, cfg.container.w),
      critic_(make_critic(cfg.container.l, cfg.container.w)),
      actor_opt_(concat_params(actor_.encoder, actor_.denoiser), {.lr = cfg.actor_lr}),
      critic_opt_(critic_.params(), {.lr = cfg.critic_lr}),
      guidance_opt_(guidance_.network().params(), {.lr = cfg.critic_lr}),
      mask_opt_(mask_predictor_.params(), {.lr = cfg.critic_lr}),
      update_rng_(RandomEngine::mix(cfg.seed, kStreamUpdates)) {
  RandomEngine init_rng(RandomEngine::mix(cfg_.seed, kStreamInit));
  actor_.init(init_rng);
  guidance_.init(init_rng);
  mask_predictor_.init(init_rng);
  critic_.init(init_rng);
}

TensorND Trainer::stack_states(const std::vector<const Transition*>& batch,
                               bool next) const {
  const int n = static_cast<int>(batch.size());
  const int l = cfg_.container.l, w = cfg_.container.w;
  TensorND out({n, l, w, 4});
  const std::size_t stride = static_cast<std::size_t>(l) * w * 4;
  for (int b = 0; b < n; ++b) {
    const TensorND& s = next ? batch[static_cast<std::size_t>(b)]->next_state
                             : batch[static_cast<std::size_t>(b)]->state;
    if (s.empty()) continue;  // terminal next state stays all-zero
    for (std::size_t i = 0; i < stride; ++i) {
      out[static_cast<std::size_t>(b) * stride + i] = s[i];
    }
  }
  return out;
}

TensorND Trainer::target_logits(const std::vector<const Transition*>& batch,
                                int actions) {
  const int n = static_cast<int>(batch.size());
  TensorND x0({n, actions}, -kLogitScale);
  for (int b = 0; b < n; ++b) {
    const int a = batch[static_cast<std::size_t>(b)]->action;
    if (a < 0 || a >= actions) throw ShapeMismatch("transition action out of range");
    x0[static_cast<std::size_t>(b) * actions + a] = kLogitScale;
  }
  return x0;
}

EpochSummary Trainer::collect_epoch() {
  EpochSummary summary;
  DiffusionPolicyConfig pc;
  pc.alpha = cfg_.alpha;
  pc.sample = true;
  pc.seed = RandomEngine::mix(RandomEngine::mix(cfg_.seed, kStreamSampler),
                              static_cast<std::uint64_t>(epoch_));
  DiffusionPolicy policy(actor_, &guidance_, pc);
  double returns = 0.0, utils = 0.0, items = 0.0;
  while (summary.steps < cfg_.max_steps_per_epoch) {
    GeneratorConfig g;
    g.container = cfg_.container;
    g.dim_min = cfg_.dim_min;
    g.dim_max = cfg_.dim_max;
    g.kind = cfg_.kind;
    g.stream_length = cfg_.stream_length;
    g.seed = RandomEngine::mix(RandomEngine::mix(cfg_.seed, kStreamData),
                               static_cast<std::uint64_t>(episode_index_));
    ++episode_index_;
    const ItemSequence seq = generate_sequence(g);
    const EpisodeStats st = collect_episode(env_, seq.items, policy, buffer_, cfg_.gamma);
    summary.episodes += 1;
    summary.steps += std::max(st.steps, 1);
    returns += st.discounted_return;
    utils += st.utilization;
    items += st.items;
  }
  summary.mean_return = returns / summary.episodes;
  summary.mean_utilization = utils / summary.episodes;
  summary.mean_items = items / summary.episodes;
  last_epoch_ = summary;
  return summary;
}

double Trainer::critic_update(const std::vector<const Transition*>& batch) {
  const int n = static_cast<int>(batch.size());
  const TensorND v_next = critic_.forward({stack_states(batch, true)});
  TensorND targets({n, 1});
  for (int b = 0; b < n; ++b) {
    const Transition& tr = *batch[static_cast<std::size_t>(b)];
    const double bootstrap = tr.done ? 0.0 : v_next[static_cast<std::size_t>(b)];
    targets[static_cast<std::size_t>(b)] = tr.reward + cfg_.gamma * bootstrap;
  }
  const TensorND v = critic_.forward({stack_states(batch, false)});
  const LossResult loss = mse(v, targets);
  critic_.zero_grads();
  critic_.backward(loss.grad);
  critic_opt_.step(critic_.grads());
  return loss.value;
}

std::pair<double, double> Trainer::actor_update(const std::vector<const Transition*>& batch) {
  const int n = static_cast<int>(batch.size());
  const TensorND states = stack_states(batch, false);
  const TensorND feat = actor_.encoder.forward({states});
  const TensorND x0 = target_logits(batch, actions_);

  TensorND noise({n, actions_});
  for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = update_rng_.normal();
  TensorND t_col({n, 1});
  TensorND x_t({n, actions_});
  const NoiseSchedule& sched = actor_.schedule;
  for (int b = 0; b < n; ++b) {
    const int t = update_rng_.uniform_int(1, sched.steps);
    t_col[static_cast<std::size_t>(b)] = static_cast<double>(t);
    const double ab = sched.alpha_bar[static_cast<std::size_t>(t)];
    const double cs = std::sqrt(ab), cn = std::sqrt(1.0 - ab);
    const std::size_t row = static_cast<std::size_t>(b) * actions_;
    for (int k = 0; k < actions_; ++k) {
      x_t[row + k] = cs * x0[row + k] + cn * noise[row + k];
    }
  }

  const TensorND eps_hat = actor_.denoiser.forward({x_t, t_col, feat});
  const LossResult denoise = mse(eps_hat, noise);
  actor_.encoder.zero_grads();
  actor_.denoiser.zero_grads();
  const std::vector<TensorND> in_grads = actor_.denoiser.backward(denoise.grad);
  actor_.encoder.backward(in_grads[2]);
  actor_opt_.step(concat_grads(actor_.encoder, actor_.denoiser));

  // Guidance regression on the same clean targets; features enter as plain
  // inputs, so nothing propagates back into the encoder.
  TensorND rtg({n, 1});
  for (int b = 0; b < n; ++b) {
    rtg[static_cast<std::size_t>(b)] = batch[static_cast<std::size_t>(b)]->return_to_go;
  }
  const TensorND pred = guidance_.network().forward({feat, x0});
  const LossResult guide = mse(pred, rtg);
  guidance_.network().zero_grads();
  guidance_.network().backward(guide.grad);
  guidance_opt_.step(guidance_.network().grads());

  return {denoise.value, guide.value};
}

double Trainer::mask_update(const std::vector<const Transition*>& batch) {
  const int n = static_cast<int>(batch.size());
  const TensorND states = stack_states(batch, false);
  const TensorND probs = mask_predictor_.predict(states);
  TensorND labels({n, actions_});
  for (int b = 0; b < n; ++b) {
    const FeasibilityMask& m = batch[static_cast<std::size_t>(b)]->mask;
    if (m.size() != static_cast<std::size_t>(actions_)) {
      throw ShapeMismatch("transition mask width");
    }
    const std::size_t row = static_cast<std::size_t>(b) * actions_;
    for (int k = 0; k < actions_; ++k) labels[row + k] = m[static_cast<std::size_t>(k)];
  }
  const LossResult loss = binary_cross_entropy(probs, labels);
  mask_predictor_.encoder().zero_grads();
  mask_predictor_.head().zero_grads();
  const std::vector<TensorND> head_grads = mask_predictor_.head().backward(loss.grad);
  mask_predictor_.encoder().backward(head_grads[0]);
  mask_opt_.step(mask_predictor_.grads());
  return loss.value;
}

LossRow Trainer::update_round() {
  const std::vector<const Transition*> batch = buffer_.sample(cfg_.batch_size, update_rng_);
  LossRow row;
  row.epoch = epoch_;
  row.update = ++global_update_;
  row.critic_loss = critic_update(batch);
  const auto [action_loss, guidance_loss] = actor_update(batch);
  row.action_loss = action_loss;
  row.guidance_loss = guidance_loss;
  row.mask_loss = mask_update(batch);
  row.mean_return = last_epoch_.mean_return;
  row.mean_utilization = last_epoch_.mean_utilization;
  row.mean_items = last_epoch_.mean_items;
  return row;
}

Checkpoint Trainer::make_checkpoint() {
  Checkpoint ckpt;
  ckpt.sections.push_back(snapshot_section("actor.params",
                                           concat_params(actor_.encoder, actor_.denoiser)));
  ckpt.sections.push_back(snapshot_section("critic.params", critic_.params()));
  ckpt.sections.push_back(snapshot_section("guidance.params", guidance_.network().params()));
  ckpt.sections.push_back(snapshot_section("mask.params", mask_predictor_.params()));
  auto push_moments = [&ckpt](const std::string& prefix, Adam& opt) {
    CheckpointSection m{prefix + ".adam.m", opt.first_moments()};
    CheckpointSection v{prefix + ".adam.v", opt.second_moments()};
    ckpt.sections.push_back(std::move(m));
    ckpt.sections.push_back(std::move(v));
  };
  push_moments("actor", actor_opt_);
  push_moments("critic", critic_opt_);
  push_moments("guidance", guidance_opt_);
  push_moments("mask", mask_opt_);
  json meta;
  meta["epoch"] = epoch_;
  meta["global_update"] = global_update_;
  meta["episode_index"] = episode_index_;
  meta["actions"] = actions_;
  meta["adam_steps"] = {{"actor", actor_opt_.step_count()},
                        {"critic", critic_opt_.step_count()},
                        {"guidance", guidance_opt_.step_count()},
                        {"mask", mask_opt_.step_count()}};
  meta["schedule"] = {{"steps", cfg_.diffusion_steps},
                      {"beta_1", cfg_.beta_1},
                      {"beta_t", cfg_.beta_t}};
  meta["config"] = {{"container", {cfg_.container.l, cfg_.container.w, cfg_.container.h}},
                    {"kind", to_string(cfg_.kind)},
                    {"gamma", cfg_.gamma},
                    {"actor_lr", cfg_.actor_lr},
                    {"critic_lr", cfg_.critic_lr},
                    {"batch_size", cfg_.batch_size},
                    {"alpha", cfg_.alpha},
                    {"seed", cfg_.seed}};
  ckpt.meta_json = meta.dump();
  return ckpt;
}

void Trainer::restore(const Checkpoint& ckpt) {
  auto need = [&ckpt](const std::string& name) -> const CheckpointSection& {
    const CheckpointSection* s = ckpt.find(name);
    if (s == nullptr) throw FormatVersionMismatch("checkpoint misses section " + name);
    return *s;
  };
  restore_section(need("actor.params"), concat_params(actor_.encoder, actor_.denoiser));
  restore_section(need("critic.params"), critic_.params());
  restore_section(need("guidance.params"), guidance_.network().params());
  restore_section(need("mask.params"), mask_predictor_.params());
  restore_moments(need("actor.adam.m"), actor_opt_.first_moments());
  restore_moments(need("actor.adam.v"), actor_opt_.second_moments());
  restore_moments(need("critic.adam.m"), critic_opt_.first_moments());
  restore_moments(need("critic.adam.v"), critic_opt_.second_moments());
  restore_moments(need("guidance.adam.m"), guidance_opt_.first_moments());
  restore_moments(need("guidance.adam.v"), guidance_opt_.second_moments());
  restore_moments(need("mask.adam.m"), mask_opt_.first_moments());
  restore_moments(need("mask.adam.v"), mask_opt_.second_moments());
  const json meta = json::parse(ckpt.meta_json);
  epoch_ = meta.at("epoch").get<int>();
  global_update_ = meta.at("global_update").get<std::int64_t>();
  episode_index_ = meta.at("episode_index").get<std::int64_t>();
  actor_opt_.set_step_count(meta.at("adam_steps").at("actor").get<std::int64_t>());
  critic_opt_.set_step_count(meta.at("adam_steps").at("critic").get<std::int64_t>());
  guidance_opt_.set_step_count(meta.at("adam_steps").at("guidance").get<std::int64_t>());
  mask_opt_.set_step_count(meta.at("adam_steps").at("mask").get<std::int64_t>());
}

void Trainer::train(const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  const std::string csv_path = out_dir + "/" + kLossFile;
  const bool fresh = global_update_ == 0;
  std::ofstream csv(csv_path, fresh ? std::ios::trunc : std::ios::app);
  if (!csv) throw IoFailure("cannot open for writing: " + csv_path);
  if (fresh) csv << kLossCsvHeader << '\n';
  while (epoch_ < cfg_.epochs) {
    collect_epoch();
    if (buffer_.size() > 0) {
      for (int u = 0; u < cfg_.updates_per_epoch; ++u) {
        csv << to_csv_row(update_round()) << '\n';
      }
    }
    ++epoch_;
    save_checkpoint(make_checkpoint(), out_dir + "/" + kCheckpointFile);
    csv.flush();
    if (!csv) throw IoFailure("write failed: " + csv_path);
  }
}

std::unique_ptr<ActorBundle> load_actor_bundle(const std::string& checkpoint_path,
                                               const Dims3& container) {
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  const json meta = json::parse(ckpt.meta_json);
  const int actions = meta.at("actions").get<int>();
  if (actions != action_count(container)) {
    throw ShapeMismatch("checkpoint action space does not match the container");
  }
  const json& sched = meta.at("schedule");
  auto bundle = std::make_unique<ActorBundle>(
      actions,
      build_schedule(sched.at("steps").get<int>(), sched.at("beta_1").get<double>(),
                     sched.at("beta_t").get<double>()),
      container.l, container.w);
  const CheckpointSection* a = ckpt.find("actor.params");
  const CheckpointSection* g = ckpt.find("guidance.params");
  if (a == nullptr || g == nullptr) {
    throw FormatVersionMismatch("checkpoint misses actor/guidance sections");
  }
  restore_section(*a, concat_params(bundle->actor.encoder, bundle->actor.denoiser));
  restore_section(*g, bundle->guidance.network().params());
  if (meta.contains("config") && meta.at("config").contains("alpha")) {
    bundle->trained_alpha = meta.at("config").at("alpha").get<double>();
  }
  return bundle;
}

}  // namespace binpack
