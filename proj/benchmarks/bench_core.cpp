// Microbenchmarks for the hot paths: feasibility masks, placement checks,
// EMS maintenance, heuristic decisions and network passes.

#include <benchmark/benchmark.h>

#include <optional>
#include <vector>

#include "binpack/datasets.hpp"
#include "binpack/diffusion.hpp"
#include "binpack/ems.hpp"
#include "binpack/env.hpp"
#include "binpack/heuristics.hpp"
#include "binpack/rng.hpp"

namespace {

using namespace binpack;

// A mid-episode state: drive a random-feasible walk a few items deep so the
// surface is rugged, which is the expensive regime for every kernel below.
struct Fixture {
  Dims3 container{10, 10, 10};
  double rho_min = 0.25;
  PackingEnv env{Dims3{10, 10, 10}, 0.25};

  Fixture() {
    GeneratorConfig cfg;
    cfg.seed = 99;
    const ItemSequence seq = gen_rs(cfg);
    env.reset(seq.items);
    RandomFeasiblePolicy walker(7);
    for (int i = 0; i < 8 && !env.done(); ++i) {
      const auto a = walker.choose(env);
      if (!a) break;
      env.step(*a);
    }
  }
};

void BM_FeasibilityMask(benchmark::State& state) {
  Fixture f;
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_feasibility_mask(
        f.env.state().hm, f.container, f.env.state().current_item, f.rho_min));
  }
}
BENCHMARK(BM_FeasibilityMask);

void BM_CheckPlacement(benchmark::State& state) {
  Fixture f;
  int flat = 0;
  for (auto _ : state) {
    const Action a = Action::from_flat(flat, f.container.l, f.container.w);
    benchmark::DoNotOptimize(check_placement(f.env.state().hm, f.container,
                                             f.env.state().current_item, a,
                                             f.rho_min));
    flat = (flat + 37) % (6 * f.container.l * f.container.w);
  }
}
BENCHMARK(BM_CheckPlacement);

void BM_ComputeEms(benchmark::State& state) {
  Fixture f;
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_ems(f.env.state().placed, f.container));
  }
}
BENCHMARK(BM_ComputeEms);

void BM_BoundaryDecision(benchmark::State& state) {
  Fixture f;
  BoundaryRulePolicy policy;
  for (auto _ : state) {
    benchmark::DoNotOptimize(policy.choose(f.env));
  }
}
BENCHMARK(BM_BoundaryDecision);

void BM_BphDecision(benchmark::State& state) {
  Fixture f;
  BphPolicy policy;
  for (auto _ : state) {
    benchmark::DoNotOptimize(policy.choose(f.env));
  }
}
BENCHMARK(BM_BphDecision);

void BM_EnvStep(benchmark::State& state) {
  GeneratorConfig cfg;
  cfg.seed = 5;
  cfg.stream_length = 10000;
  const ItemSequence seq = gen_rs(cfg);
  PackingEnv env;
  BoundaryRulePolicy policy;
  env.reset(seq.items);
  for (auto _ : state) {
    if (env.done()) {
      state.PauseTiming();
      env.reset(seq.items);
      state.ResumeTiming();
    }
    const auto a = policy.choose(env);
    if (a) benchmark::DoNotOptimize(env.step(*a));
  }
}
BENCHMARK(BM_EnvStep);

void BM_EncoderForward(benchmark::State& state) {
  Fixture f;
  auto enc = make_state_encoder();
  RandomEngine rng(1);
  enc.init(rng);
  const TensorND x = to_batch(encode_state(f.env.state(), f.container));
  for (auto _ : state) {
    benchmark::DoNotOptimize(enc.forward({x}));
  }
}
BENCHMARK(BM_EncoderForward);

void BM_ReverseChain(benchmark::State& state) {
  Fixture f;
  const int actions = action_count(f.container);
  DiffusionActor actor(actions, default_schedule());
  RandomEngine rng(1);
  actor.init(rng);
  const TensorND feat = actor.encode(to_batch(encode_state(f.env.state(), f.container)));
  RandomEngine sampler(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sample_action_logits(actor, feat, nullptr, 0.0, sampler));
  }
}
BENCHMARK(BM_ReverseChain);

}  // namespace

BENCHMARK_MAIN();
