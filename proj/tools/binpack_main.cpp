// binpack: dataset generation, training, evaluation, latency benchmarking
// and scene export for the online 3D bin-packing laboratory.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "binpack/datasets.hpp"
#include "binpack/diffusion.hpp"
#include "binpack/env.hpp"
#include "binpack/errors.hpp"
#include "binpack/evaluate.hpp"
#include "binpack/heuristics.hpp"
#include "binpack/manifest.hpp"
#include "binpack/render.hpp"
#include "binpack/trace.hpp"
#include "binpack/trainer.hpp"

namespace {

using binpack::Action;
using binpack::Dims3;
using binpack::GeneratorConfig;
using binpack::GeneratorKind;
using binpack::RunManifest;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct GenArgs {
  std::string kind = "rs";
  int count = 100;
  std::uint64_t seed = 0;
  std::string out = "dataset.jsonl";
  int dim_min = 2;
  int dim_max = 5;
  int stream_length = 80;
};

int run_gen_data(const GenArgs& a) {
  RunManifest manifest;
  manifest.subcommand = "gen-data";
  manifest.seed = a.seed;
  manifest.started_at = binpack::iso8601_utc_now();

  GeneratorConfig cfg;
  cfg.kind = binpack::generator_kind_from_string(a.kind);
  cfg.dim_min = a.dim_min;
  cfg.dim_max = a.dim_max;
  cfg.seed = a.seed;
  cfg.stream_length = a.stream_length;
  cfg.validate();
  if (a.count < 1) throw binpack::BadConfig("--count must be positive");

  std::vector<binpack::ItemSequence> seqs;
  seqs.reserve(static_cast<std::size_t>(a.count));
  for (int i = 0; i < a.count; ++i) {
    GeneratorConfig one = cfg;
    one.seed = binpack::RandomEngine::mix(a.seed, static_cast<std::uint64_t>(i));
    seqs.push_back(binpack::generate_sequence(one));
  }
  binpack::save_sequences(seqs, cfg, a.out);
  std::cout << "wrote " << seqs.size() << " sequences to " << a.out << "\n";

  manifest.config_json = json{{"kind", a.kind},
                              {"count", a.count},
                              {"dim_min", a.dim_min},
                              {"dim_max", a.dim_max},
                              {"stream_length", a.stream_length}}
                             .dump();
  manifest.outputs = {a.out};
  manifest.finished_at = binpack::iso8601_utc_now();
  binpack::write_manifest(manifest, a.out + ".manifest.json");
  return kExitOk;
}

struct TrainArgs {
  std::string out = "runs/train";
  std::string kind = "rs";
  int epochs = 1000;
  int steps_per_epoch = 100;
  int updates_per_epoch = 16;
  int batch = 64;
  int diffusion_steps = 100;
  double gamma = 0.99;
  double actor_lr = 1e-4;
  double critic_lr = 5e-4;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  int dim_min = 2;
  int dim_max = 5;
  int stream_length = 80;
  std::size_t buffer_capacity = 10000;
  double rho_min = 0.25;
  bool resume = false;
};

int run_train(const TrainArgs& a) {
  RunManifest manifest;
  manifest.subcommand = "train";
  manifest.seed = a.seed;
  manifest.started_at = binpack::iso8601_utc_now();

  binpack::TrainConfig cfg;
  cfg.kind = binpack::generator_kind_from_string(a.kind);
  cfg.epochs = a.epochs;
  cfg.max_steps_per_epoch = a.steps_per_epoch;
  cfg.updates_per_epoch = a.updates_per_epoch;
  cfg.batch_size = a.batch;
  cfg.diffusion_steps = a.diffusion_steps;
  cfg.gamma = a.gamma;
  cfg.actor_lr = a.actor_lr;
  cfg.critic_lr = a.critic_lr;
  cfg.alpha = a.alpha;
  cfg.seed = a.seed;
  cfg.dim_min = a.dim_min;
  cfg.dim_max = a.dim_max;
  cfg.stream_length = a.stream_length;
  cfg.buffer_capacity = a.buffer_capacity;
  cfg.rho_min = a.rho_min;
  cfg.validate();

  binpack::Trainer trainer(cfg);
  const std::string ckpt_path =
      a.out + "/" + binpack::Trainer::kCheckpointFile;
  if (a.resume) {
    trainer.restore(binpack::load_checkpoint(ckpt_path));
    std::cout << "resumed from " << ckpt_path << " at epoch " << trainer.epoch()
              << ", update " << trainer.global_update() << "\n";
  }
  trainer.train(a.out);
  std::cout << "trained " << trainer.epoch() << " epochs, "
            << trainer.global_update() << " updates; checkpoint at "
            << ckpt_path << "\n";

  manifest.config_json = json{{"kind", a.kind},
                              {"epochs", a.epochs},
                              {"steps_per_epoch", a.steps_per_epoch},
                              {"updates_per_epoch", a.updates_per_epoch},
                              {"batch", a.batch},
                              {"diffusion_steps", a.diffusion_steps},
                              {"gamma", a.gamma},
                              {"actor_lr", a.actor_lr},
                              {"critic_lr", a.critic_lr},
                              {"alpha", a.alpha},
                              {"dim_min", a.dim_min},
                              {"dim_max", a.dim_max},
                              {"stream_length", a.stream_length},
                              {"resume", a.resume}}
                             .dump();
  manifest.outputs = {ckpt_path, a.out + "/" + binpack::Trainer::kLossFile};
  manifest.finished_at = binpack::iso8601_utc_now();
  binpack::write_manifest(manifest, a.out + "/manifest.json");
  return kExitOk;
}

std::unique_ptr<binpack::Policy> make_policy(const std::string& name,
                                             std::uint64_t seed,
                                             const std::string& checkpoint,
                                             double alpha, bool sample,
                                             std::unique_ptr<binpack::ActorBundle>& bundle) {
  if (name == "boundary") return std::make_unique<binpack::BoundaryRulePolicy>();
  if (name == "bph") return std::make_unique<binpack::BphPolicy>();
  if (name == "random") return std::make_unique<binpack::RandomFeasiblePolicy>(seed);
  if (name == "replay") return std::make_unique<binpack::TilingReplayPolicy>();
  if (name == "diffusion") {
    if (checkpoint.empty()) {
      throw binpack::MissingCheckpoint("--policy diffusion requires --checkpoint");
    }
    bundle = binpack::load_actor_bundle(checkpoint, Dims3{10, 10, 10});
    binpack::DiffusionPolicyConfig pc;
    pc.alpha = alpha < 0.0 ? bundle->trained_alpha : alpha;
    pc.sample = sample;
    pc.seed = seed;
    return std::make_unique<binpack::DiffusionPolicy>(bundle->actor,
                                                      &bundle->guidance, pc);
  }
  throw binpack::BadConfig("unknown policy: " + name);
}

struct EvalArgs {
  std::string policy = "boundary";
  std::string data;
  int episodes = 0;  // 0 = all
  std::uint64_t seed = 0;
  std::string checkpoint;
  double alpha = -1.0;  // <0 = use the checkpoint's trained value
  double rho_min = 0.25;
  std::string out = "eval.csv";
  std::string trace;
};

int run_eval(const EvalArgs& a) {
  RunManifest manifest;
  manifest.subcommand = "eval";
  manifest.seed = a.seed;
  manifest.started_at = binpack::iso8601_utc_now();

  const binpack::DatasetFile data = binpack::load_sequences(a.data);
  std::unique_ptr<binpack::ActorBundle> bundle;
  std::unique_ptr<binpack::Policy> policy =
      make_policy(a.policy, a.seed, a.checkpoint, a.alpha, /*sample=*/false, bundle);
  const binpack::EvalReport report = binpack::evaluate_policy(
      *policy, data, a.episodes, data.config.container, a.rho_min, a.trace);
  binpack::write_eval_csv(report, a.out);
  const std::string latency_path = a.out + ".latency.csv";
  binpack::write_latency_csv(report, latency_path);
  std::cout << "policy     items / utilization\n"
            << binpack::format_summary(report) << "\n"
            << "latency ms: p50 " << report.latency.p50_ms << "  p99 "
            << report.latency.p99_ms << "  (sidecar: " << latency_path << ")\n";

  manifest.config_json = json{{"policy", a.policy},
                              {"episodes", a.episodes},
                              {"alpha", a.alpha},
                              {"checkpoint", a.checkpoint}}
                             .dump();
  manifest.inputs = {a.data};
  manifest.outputs = {a.out, latency_path};
  if (!a.trace.empty()) manifest.outputs.push_back(a.trace);
  manifest.finished_at = binpack::iso8601_utc_now();
  binpack::write_manifest(manifest, a.out + ".manifest.json");
  return kExitOk;
}

struct BenchArgs {
  std::string policy = "boundary";
  int decisions = 10000;
  std::uint64_t seed = 0;
  std::string checkpoint;
  double alpha = -1.0;
  double rho_min = 0.25;
  std::string out = "bench_latency.csv";
  double budget_ms = -1.0;  // <0: 10 ms for heuristics, report-only otherwise
};

int run_bench_latency(const BenchArgs& a) {
  RunManifest manifest;
  manifest.subcommand = "bench-latency";
  manifest.seed = a.seed;
  manifest.started_at = binpack::iso8601_utc_now();

  const Dims3 container{10, 10, 10};
  const double rho_min = a.rho_min;
  std::vector<double> samples_ms;
  samples_ms.reserve(static_cast<std::size_t>(a.decisions));

  if (a.policy == "mask") {
    // Measures the exact feasibility computation on states visited by a
    // random-feasible walk.
    binpack::PackingEnv env(container, rho_min);
    binpack::RandomFeasiblePolicy walker(a.seed);
    std::uint64_t episode = 0;
    while (static_cast<int>(samples_ms.size()) < a.decisions) {
      GeneratorConfig g;
      g.seed = binpack::RandomEngine::mix(a.seed, episode++);
      const binpack::ItemSequence seq = binpack::gen_rs(g);
      env.reset(seq.items);
      while (!env.done() && static_cast<int>(samples_ms.size()) < a.decisions) {
        const auto t0 = std::chrono::steady_clock::now();
        const binpack::FeasibilityMask mask = binpack::compute_feasibility_mask(
            env.state().hm, container, env.state().current_item, rho_min);
        const auto t1 = std::chrono::steady_clock::now();
        (void)mask;
        samples_ms.push_back(
            std::chrono::duration<double, std::milli>(t1 - t0).count());
        const auto act = walker.choose(env);
        if (!act) break;
        env.step(*act);
      }
    }
  } else {
    std::unique_ptr<binpack::ActorBundle> bundle;
    std::unique_ptr<binpack::Policy> policy =
        make_policy(a.policy, a.seed, a.checkpoint, a.alpha, false, bundle);
    binpack::PackingEnv env(container, rho_min);
    std::uint64_t episode = 0;
    while (static_cast<int>(samples_ms.size()) < a.decisions) {
      GeneratorConfig g;
      g.seed = binpack::RandomEngine::mix(a.seed, episode++);
      const binpack::ItemSequence seq = binpack::gen_rs(g);
      env.reset(seq.items);
      while (!env.done() && static_cast<int>(samples_ms.size()) < a.decisions) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto act = policy->choose(env);
        const auto t1 = std::chrono::steady_clock::now();
        samples_ms.push_back(
            std::chrono::duration<double, std::milli>(t1 - t0).count());
        if (!act) break;
        env.step(*act);
      }
    }
  }

  const double p50 = binpack::percentile(samples_ms, 50.0);
  const double p90 = binpack::percentile(samples_ms, 90.0);
  const double p99 = binpack::percentile(samples_ms, 99.0);
  const double mx = binpack::percentile(samples_ms, 100.0);

  double budget = a.budget_ms;
  if (budget < 0.0) {
    if (a.policy == "mask") budget = 2.0;
    else if (a.policy == "diffusion") budget = 0.0;  // report-only
    else budget = 10.0;
  }
  const bool has_budget = budget > 0.0;
  const bool pass = !has_budget || p99 <= budget;

  std::printf("%s: %zu decisions  p50 %.4f ms  p90 %.4f ms  p99 %.4f ms  max %.4f ms\n",
              a.policy.c_str(), samples_ms.size(), p50, p90, p99, mx);
  if (has_budget) {
    std::printf("budget %.2f ms p99: %s\n", budget, pass ? "PASS" : "FAIL");
  } else {
    std::printf("budget: report-only\n");
  }

  std::FILE* f = std::fopen(a.out.c_str(), "w");
  if (f == nullptr) throw binpack::IoFailure("cannot open for writing: " + a.out);
  std::fprintf(f, "policy,decisions,p50_ms,p90_ms,p99_ms,max_ms,budget_ms,pass\n");
  std::fprintf(f, "%s,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%d\n", a.policy.c_str(),
               samples_ms.size(), p50, p90, p99, mx, budget, pass ? 1 : 0);
  std::fclose(f);

  manifest.config_json = json{{"policy", a.policy},
                              {"decisions", a.decisions},
                              {"budget_ms", budget}}
                             .dump();
  manifest.outputs = {a.out};
  manifest.finished_at = binpack::iso8601_utc_now();
  binpack::write_manifest(manifest, a.out + ".manifest.json");
  return kExitOk;
}

struct RenderArgs {
  std::string trace;
  std::string out = "render";
};

int run_render(const RenderArgs& a) {
  RunManifest manifest;
  manifest.subcommand = "render";
  manifest.started_at = binpack::iso8601_utc_now();

  const binpack::EpisodeTrace trace = binpack::load_trace(a.trace);
  const int frames = binpack::render_trace_svg(trace, a.out);
  const std::string scene_path = a.out + "/scene.json";
  binpack::write_scene_json(trace, scene_path);
  std::cout << "wrote " << frames << " frames and " << scene_path << "\n";

  manifest.config_json = json{{"trace", a.trace}}.dump();
  manifest.inputs = {a.trace};
  manifest.outputs = {a.out, scene_path};
  manifest.finished_at = binpack::iso8601_utc_now();
  binpack::write_manifest(manifest, a.out + "/manifest.json");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online 3D bin-packing laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", binpack::kToolVersion);

  GenArgs gen;
  CLI::App* cmd_gen = app.add_subcommand("gen-data", "generate a dataset file");
  cmd_gen->add_option("--kind", gen.kind, "rs, cut1 or cut2")
      ->check(CLI::IsMember({"rs", "cut1", "cut2"}));
  cmd_gen->add_option("--count", gen.count, "number of sequences");
  cmd_gen->add_option("--seed", gen.seed, "master seed");
  cmd_gen->add_option("--out", gen.out, "output path");
  cmd_gen->add_option("--dim-min", gen.dim_min, "minimum item dimension");
  cmd_gen->add_option("--dim-max", gen.dim_max, "maximum item dimension");
  cmd_gen->add_option("--stream-length", gen.stream_length, "items per RS sequence");

  TrainArgs tr;
  CLI::App* cmd_train = app.add_subcommand("train", "train the diffusion policy");
  cmd_train->add_option("--out", tr.out, "output directory");
  cmd_train->add_option("--kind", tr.kind, "collection stream kind")
      ->check(CLI::IsMember({"rs", "cut1", "cut2"}));
  cmd_train->add_option("--epochs", tr.epochs, "training epochs");
  cmd_train->add_option("--steps-per-epoch", tr.steps_per_epoch, "env steps per epoch");
  cmd_train->add_option("--updates-per-epoch", tr.updates_per_epoch, "update rounds per epoch");
  cmd_train->add_option("--batch", tr.batch, "batch size");
  cmd_train->add_option("--diffusion-steps", tr.diffusion_steps, "reverse-chain length");
  cmd_train->add_option("--gamma", tr.gamma, "discount factor");
  cmd_train->add_option("--actor-lr", tr.actor_lr, "actor learning rate");
  cmd_train->add_option("--critic-lr", tr.critic_lr, "critic learning rate");
  cmd_train->add_option("--alpha", tr.alpha, "guidance scale");
  cmd_train->add_option("--seed", tr.seed, "master seed");
  cmd_train->add_option("--dim-min", tr.dim_min, "minimum item dimension");
  cmd_train->add_option("--dim-max", tr.dim_max, "maximum item dimension");
  cmd_train->add_option("--stream-length", tr.stream_length, "items per RS stream");
  cmd_train->add_option("--buffer-capacity", tr.buffer_capacity, "replay capacity");
  cmd_train->add_option("--rho-min", tr.rho_min, "support-ratio threshold");
  cmd_train->add_flag("--resume", tr.resume, "continue from the checkpoint in --out");

  EvalArgs ev;
  CLI::App* cmd_eval = app.add_subcommand("eval", "evaluate a policy on a dataset");
  cmd_eval->add_option("--policy", ev.policy, "random, boundary, bph, replay or diffusion")
      ->check(CLI::IsMember({"random", "boundary", "bph", "replay", "diffusion"}));
  cmd_eval->add_option("--data", ev.data, "dataset file")->required();
  cmd_eval->add_option("--episodes", ev.episodes, "episodes to run (0 = all)");
  cmd_eval->add_option("--seed", ev.seed, "policy seed");
  cmd_eval->add_option("--checkpoint", ev.checkpoint, "trained checkpoint (diffusion)");
  cmd_eval->add_option("--alpha", ev.alpha, "guidance scale (<0: use trained value)");
  cmd_eval->add_option("--rho-min", ev.rho_min, "support-ratio threshold");
  cmd_eval->add_option("--out", ev.out, "metrics CSV path");
  cmd_eval->add_option("--trace", ev.trace, "write the first episode's trace here");

  BenchArgs bench;
  CLI::App* cmd_bench = app.add_subcommand("bench-latency", "per-decision latency percentiles");
  cmd_bench->add_option("--policy", bench.policy, "policy or 'mask'")
      ->check(CLI::IsMember({"random", "boundary", "bph", "diffusion", "mask"}));
  cmd_bench->add_option("--decisions", bench.decisions, "decisions to measure");
  cmd_bench->add_option("--seed", bench.seed, "stream seed");
  cmd_bench->add_option("--checkpoint", bench.checkpoint, "trained checkpoint (diffusion)");
  cmd_bench->add_option("--alpha", bench.alpha, "guidance scale (<0: use trained value)");
  cmd_bench->add_option("--rho-min", bench.rho_min, "support-ratio threshold");
  cmd_bench->add_option("--out", bench.out, "report CSV path");
  cmd_bench->add_option("--budget-ms", bench.budget_ms, "p99 budget (<0: per-policy default)");

  RenderArgs rd;
  CLI::App* cmd_render = app.add_subcommand("render", "export SVG frames and a 3D scene");
  cmd_render->add_option("--trace", rd.trace, "episode trace file")->required();
  cmd_render->add_option("--out", rd.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cmd_gen->parsed()) return run_gen_data(gen);
    if (cmd_train->parsed()) return run_train(tr);
    if (cmd_eval->parsed()) return run_eval(ev);
    if (cmd_bench->parsed()) return run_bench_latency(bench);
    if (cmd_render->parsed()) return run_render(rd);
    std::cerr << "no subcommand given\n";
    return kExitUsage;
  } catch (const binpack::BadConfig& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const binpack::BadSchedule& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
