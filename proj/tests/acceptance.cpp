// Acceptance gate: each numbered criterion runs as its own process and
// prints exactly one final PASS/FAIL line. Exit code 0 on pass, 1 on fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "binpack/checkpoint.hpp"
#include "binpack/datasets.hpp"
#include "binpack/diffusion.hpp"
#include "binpack/ems.hpp"
#include "binpack/env.hpp"
#include "binpack/errors.hpp"
#include "binpack/evaluate.hpp"
#include "binpack/heuristics.hpp"
#include "binpack/losses.hpp"
#include "binpack/net.hpp"
#include "binpack/optimizer.hpp"
#include "binpack/rng.hpp"
#include "binpack/schedule.hpp"
#include "binpack/trainer.hpp"
#include "oracles.hpp"

using namespace binpack;
namespace fs = std::filesystem;

namespace {

constexpr Dims3 kBox{10, 10, 10};

void note(const char* fmt, ...) {
  std::va_list args;
  va_start(args, fmt);
  std::printf("  ");
  std::vprintf(fmt, args);
  std::printf("\n");
  va_end(args);
  std::fflush(stdout);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

double wall_seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

DatasetFile build_dataset(GeneratorKind kind, int count, std::uint64_t seed0) {
  DatasetFile data;
  data.config.kind = kind;
  data.sequences.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    GeneratorConfig g = data.config;
    g.seed = seed0 + static_cast<std::uint64_t>(i);
    data.sequences.push_back(generate_sequence(g));
  }
  return data;
}

// ---------------------------------------------------------------- 1

bool c1_mask_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  long long states = 0, mismatches = 0;
  GeneratorConfig g;
  for (std::uint64_t ep = 0; states < 10000; ++ep) {
    const double rho = (ep % 2 == 0) ? 0.25 : 1.0;
    PackingEnv env(kBox, rho);
    g.seed = 100000 + ep;
    env.reset(gen_rs(g).items);
    oracle::VoxelSim sim(kBox);
    RandomFeasiblePolicy walker(ep * 7 + 1);
    while (!env.done()) {
      const PackingState& st = env.state();
      const FeasibilityMask fresh =
          compute_feasibility_mask(st.hm, kBox, st.current_item, rho);
      const auto want = sim.mask(st.current_item, rho);
      for (int flat = 0; flat < 600; ++flat) {
        const bool lib_mask = st.mask[static_cast<std::size_t>(flat)] != 0;
        const bool lib_fresh = fresh[static_cast<std::size_t>(flat)] != 0;
        const bool lib_check = check_placement(st.hm, kBox, st.current_item,
                                               Action::from_flat(flat, kBox.l, kBox.w), rho);
        const bool ref = want[static_cast<std::size_t>(flat)] != 0;
        if (lib_mask != ref || lib_fresh != ref || lib_check != ref) ++mismatches;
      }
      ++states;
      const auto a = walker.choose(env);
      if (!a) break;
      env.step(*a);
      const Placement& p = env.state().placed.back();
      sim.occupy(p.x, p.y, p.z, p.oriented());
    }
  }
  note("states checked: %lld, action mismatches: %lld, %.1fs", states, mismatches,
       wall_seconds_since(t0));
  return states >= 10000 && mismatches == 0;
}

// ---------------------------------------------------------------- 2

bool c2_ems_equality() {
  const auto t0 = std::chrono::steady_clock::now();
  long long sets = 0, mismatches = 0;
  GeneratorConfig g;
  for (std::uint64_t ep = 0; sets < 1000; ++ep) {
    const double rho = (ep % 2 == 0) ? 0.25 : 1.0;
    PackingEnv env(kBox, rho);
    g.seed = 200000 + ep;
    env.reset(gen_rs(g).items);
    oracle::VoxelSim sim(kBox);
    RandomFeasiblePolicy walker(ep * 13 + 5);
    while (!env.done() && sets < 1000) {
      const std::vector<GridBox> lib = compute_ems(env.state().placed, kBox);
      std::vector<GridBox> ref = oracle::brute_maximal_boxes(sim);
      std::sort(ref.begin(), ref.end());
      if (lib != ref) ++mismatches;
      ++sets;
      const auto a = walker.choose(env);
      if (!a) break;
      env.step(*a);
      const Placement& p = env.state().placed.back();
      sim.occupy(p.x, p.y, p.z, p.oriented());
    }
  }
  note("placement sets checked: %lld, mismatches: %lld, %.1fs", sets, mismatches,
       wall_seconds_since(t0));
  return sets >= 1000 && mismatches == 0;
}

// ---------------------------------------------------------------- 3

bool c3_cut_partition_replay() {
  const auto t0 = std::chrono::steady_clock::now();
  long long failures = 0, seeds = 0;
  for (const GeneratorKind kind : {GeneratorKind::CUT1, GeneratorKind::CUT2}) {
    for (std::uint64_t s = 0; s < 1000; ++s, ++seeds) {
      GeneratorConfig g;
      g.kind = kind;
      g.seed = 40000 + s;
      const ItemSequence seq = generate_sequence(g);

      long long vol = 0;
      for (const Dims3& d : seq.items) vol += static_cast<long long>(d.l) * d.w * d.h;
      bool ok = vol == 1000 && seq.tiling.size() == seq.items.size();

      std::vector<int> cover(1000, 0);
      for (const Placement& p : seq.tiling) {
        const Dims3 od = p.oriented();
        for (int x = p.x; x < p.x + od.l; ++x)
          for (int y = p.y; y < p.y + od.w; ++y)
            for (int z = p.z; z < p.z + od.h; ++z)
              ++cover[static_cast<std::size_t>((x * 10 + y) * 10 + z)];
      }
      for (const int c : cover) ok = ok && c == 1;

      PackingEnv env(kBox, 1.0);
      TilingReplayPolicy replay;
      replay.begin_sequence(seq);
      env.reset(seq.items);
      while (!env.done()) {
        const auto a = replay.choose(env);
        if (!a) break;
        env.step(*a);
      }
      ok = ok && std::abs(env.current_utilization() - 100.0) <= 1e-9 &&
           env.state().placed.size() == seq.items.size();
      if (!ok) {
        ++failures;
        if (failures <= 3) {
          note("failure: kind=%s seed=%llu vol=%lld util=%.6f", to_string(kind),
               static_cast<unsigned long long>(g.seed), vol, env.current_utilization());
        }
      }
    }
  }
  note("tilings checked: %lld (1000 per cut type), failures: %lld, %.1fs", seeds,
       failures, wall_seconds_since(t0));
  return seeds == 2000 && failures == 0;
}

// ---------------------------------------------------------------- 4

bool c4_reward_telescoping() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int episodes = 0;
  GeneratorConfig g;
  for (std::uint64_t i = 0; i < 1000; ++i, ++episodes) {
    const double rho = (i % 2 == 0) ? 0.25 : 1.0;
    PackingEnv env(kBox, rho);
    g.seed = 300000 + i;
    env.reset(gen_rs(g).items);
    RandomFeasiblePolicy walker(i + 1);
    double total = 0.0;
    while (!env.done()) {
      const auto a = walker.choose(env);
      if (!a) break;
      total += env.step(*a).reward;
    }
    worst = std::max(worst, std::abs(total - env.current_utilization() / 100.0));
  }
  note("episodes: %d, worst |sum reward - utilization/100|: %.3g, %.1fs", episodes,
       worst, wall_seconds_since(t0));
  return episodes == 1000 && worst <= 1e-12;
}

// ---------------------------------------------------------------- 5

double rel_gap(double a, double b) { return oracle::rel_err(a, b); }

// Scalar objective sum(w * layer(x)): analytic gradients vs central
// differences on randomly probed input and parameter coordinates.
double layer_fd_worst(Layer& layer, TensorND x, RandomEngine& rng, double h,
                      int probes) {
  const TensorND out0 = layer.forward(x);
  TensorND w(out0.shape());
  for (double& v : w.values()) v = rng.normal();
  for (TensorND* gptr : layer.grads()) {
    for (double& v : gptr->values()) v = 0.0;
  }
  layer.forward(x);
  const TensorND in_grad = layer.backward(w, true);

  auto objective = [&layer, &x, &w]() {
    const TensorND out = layer.forward(x);
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += w[i] * out[i];
    return s;
  };

  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    const std::size_t idx =
        static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(x.size()) - 1));
    const double fd = oracle::central_diff(objective, x[idx], h);
    worst = std::max(worst, rel_gap(fd, in_grad[idx]));
  }
  const auto params = layer.params();
  const auto grads = layer.grads();
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (int p = 0; p < probes; ++p) {
      const std::size_t idx = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(params[t]->size()) - 1));
      const double fd = oracle::central_diff(objective, (*params[t])[idx], h);
      worst = std::max(worst, rel_gap(fd, (*grads[t])[idx]));
    }
  }
  return worst;
}

TensorND random_tensor(const std::vector<int>& shape, RandomEngine& rng) {
  TensorND t(shape);
  for (double& v : t.values()) v = rng.normal();
  return t;
}

bool c5_gradient_checks() {
  const auto t0 = std::chrono::steady_clock::now();
  const int kInstantiations = 100;
  bool ok = true;

  auto report = [&ok](const char* what, double worst, int count) {
    note("%-12s worst rel err %.3g over %d instantiations", what, worst, count);
    ok = ok && worst <= 1e-4;
  };

  double worst = 0.0;
  for (int i = 0; i < kInstantiations; ++i) {
    RandomEngine rng(1000 + static_cast<std::uint64_t>(i));
    Dense layer(2 + i % 7, 1 + i % 5);
    layer.init(rng);
    worst = std::max(worst, layer_fd_worst(layer, random_tensor({2 + i % 3, 2 + i % 7}, rng),
                                           rng, 1e-6, 4));
  }
  report("dense", worst, kInstantiations);

  worst = 0.0;
  for (int i = 0; i < kInstantiations; ++i) {
    RandomEngine rng(2000 + static_cast<std::uint64_t>(i));
    Conv2d layer(1 + i % 3, 1 + i % 2, 3);
    layer.init(rng);
    worst = std::max(
        worst, layer_fd_worst(layer, random_tensor({1 + i % 2, 3 + i % 3, 3 + i % 2, 1 + i % 3}, rng),
                              rng, 1e-6, 4));
  }
  report("conv2d", worst, kInstantiations);

  worst = 0.0;
  for (int i = 0; i < kInstantiations; ++i) {
    RandomEngine rng(3000 + static_cast<std::uint64_t>(i));
    Relu layer;
    TensorND x = random_tensor({2, 5 + i % 4}, rng);
    for (double& v : x.values()) {
      if (std::abs(v) < 1e-3) v += (v >= 0 ? 2e-3 : -2e-3);  // step off the kink
    }
    worst = std::max(worst, layer_fd_worst(layer, x, rng, 1e-6, 4));
  }
  report("relu", worst, kInstantiations);

  worst = 0.0;
  for (int i = 0; i < kInstantiations; ++i) {
    RandomEngine rng(4000 + static_cast<std::uint64_t>(i));
    Sigmoid layer;
    worst = std::max(worst, layer_fd_worst(layer, random_tensor({2, 4 + i % 5}, rng),
                                           rng, 1e-6, 4));
  }
  report("sigmoid", worst, kInstantiations);

  worst = 0.0;
  for (int i = 0; i < kInstantiations; ++i) {
    RandomEngine rng(5000 + static_cast<std::uint64_t>(i));
    Flatten layer;
    worst = std::max(worst, layer_fd_worst(layer, random_tensor({2, 2 + i % 2, 3, 2}, rng),
                                           rng, 1e-6, 4));
  }
  report("flatten", worst, kInstantiations);

  // The timestep embedding is a declared gradient stop (its input indexes a
  // discrete schedule position), so the analytic gradient is exactly zero.
  bool embed_ok = true;
  for (int i = 0; i < kInstantiations; ++i) {
    RandomEngine rng(6000 + static_cast<std::uint64_t>(i));
    SinusoidalEmbedding layer(8 + 2 * (i % 3));
    TensorND tcol({3, 1});
    for (double& v : tcol.values()) v = rng.uniform_int(1, 100);
    const TensorND out = layer.forward(tcol);
    TensorND w(out.shape());
    for (double& v : w.values()) v = rng.normal();
    const TensorND back = layer.backward(w, true);
    for (std::size_t k = 0; k < back.size(); ++k) embed_ok = embed_ok && back[k] == 0.0;
  }
  note("%-12s gradient stop exact over %d instantiations: %s", "sin_embed",
       kInstantiations, embed_ok ? "yes" : "NO");
  ok = ok && embed_ok;

  worst = 0.0;
  for (int i = 0; i < kInstantiations; ++i) {
    RandomEngine rng(7000 + static_cast<std::uint64_t>(i));
    TensorND pred = random_tensor({2 + i % 3, 3 + i % 4}, rng);
    const TensorND target = random_tensor(pred.shape(), rng);
    auto objective = [&pred, &target]() { return mse(pred, target).value; };
    const TensorND grad = mse(pred, target).grad;
    for (int p = 0; p < 4; ++p) {
      const std::size_t idx = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(pred.size()) - 1));
      worst = std::max(worst, rel_gap(oracle::central_diff(objective, pred[idx], 1e-6),
                                      grad[idx]));
    }
  }
  report("mse", worst, kInstantiations);

  worst = 0.0;
  for (int i = 0; i < kInstantiations; ++i) {
    RandomEngine rng(8000 + static_cast<std::uint64_t>(i));
    const int n = 2 + i % 3, k = 3 + i % 6;
    TensorND logits = random_tensor({n, k}, rng);
    std::vector<std::vector<std::uint8_t>> mask(static_cast<std::size_t>(n));
    std::vector<int> target(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) {
      auto& row = mask[static_cast<std::size_t>(r)];
      row.resize(static_cast<std::size_t>(k));
      int admissible = 0;
      for (auto& m : row) admissible += (m = static_cast<std::uint8_t>(rng.uniform_int(0, 1)));
      if (admissible == 0) {
        row[static_cast<std::size_t>(rng.uniform_int(0, k - 1))] = 1;
        admissible = 1;
      }
      int pick = rng.uniform_int(1, admissible);
      for (int c = 0; c < k; ++c) {
        if (row[static_cast<std::size_t>(c)] && --pick == 0) {
          target[static_cast<std::size_t>(r)] = c;
          break;
        }
      }
    }
    auto objective = [&]() { return masked_cross_entropy(logits, target, mask).value; };
    const TensorND grad = masked_cross_entropy(logits, target, mask).grad;
    for (int p = 0; p < 4; ++p) {
      const std::size_t idx = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(logits.size()) - 1));
      worst = std::max(worst, rel_gap(oracle::central_diff(objective, logits[idx], 1e-6),
                                      grad[idx]));
    }
  }
  report("masked_ce", worst, kInstantiations);

  worst = 0.0;
  for (int i = 0; i < kInstantiations; ++i) {
    RandomEngine rng(9000 + static_cast<std::uint64_t>(i));
    TensorND probs({2 + i % 2, 3 + i % 5});
    TensorND labels(probs.shape());
    for (double& v : probs.values()) v = 0.05 + 0.9 * rng.uniform();
    for (double& v : labels.values()) v = rng.uniform_int(0, 1);
    auto objective = [&]() { return binary_cross_entropy(probs, labels).value; };
    const TensorND grad = binary_cross_entropy(probs, labels).grad;
    for (int p = 0; p < 4; ++p) {
      const std::size_t idx = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(probs.size()) - 1));
      worst = std::max(worst, rel_gap(oracle::central_diff(objective, probs[idx], 1e-7),
                                      grad[idx]));
    }
  }
  report("bce", worst, kInstantiations);

  note("%.1fs", wall_seconds_since(t0));
  return ok;
}

// ---------------------------------------------------------------- 6

TensorND tile_rows(const TensorND& row, int n) {
  const int width = row.shape().back();
  TensorND out({n, width});
  for (int b = 0; b < n; ++b)
    for (int k = 0; k < width; ++k)
      out[static_cast<std::size_t>(b) * width + k] = row[static_cast<std::size_t>(k)];
  return out;
}

// Teaches the actor's denoiser to invert the noising of x0 rows produced by
// draw_x0, conditioning on one fixed feature row. The last few reverse steps
// dominate the final sample error, so t draws favor the small-t range and a
// low-rate polish phase follows the main one.
template <typename DrawX0>
void train_denoiser(DiffusionActor& actor, const TensorND& feat, DrawX0&& draw_x0,
                    int steps, double lr, std::uint64_t seed) {
  const int dim = [&] {
    RandomEngine probe(0);
    return static_cast<int>(draw_x0(probe).size());
  }();
  const int batch = 64;
  RandomEngine rng(seed);
  const TensorND feat_b = tile_rows(feat, batch);
  const NoiseSchedule& sched = actor.schedule;
  auto phase = [&](int phase_steps, double phase_lr) {
    Adam opt(actor.denoiser.params(), {.lr = phase_lr});
    for (int s = 0; s < phase_steps; ++s) {
      TensorND x0({batch, dim}), noise({batch, dim}), xt({batch, dim}), tcol({batch, 1});
      for (int b = 0; b < batch; ++b) {
        const std::vector<double> row = draw_x0(rng);
        const int t = rng.uniform() < 0.6 ? rng.uniform_int(1, 8)
                                          : rng.uniform_int(1, sched.steps);
        tcol[static_cast<std::size_t>(b)] = t;
        const double ab = sched.alpha_bar[static_cast<std::size_t>(t)];
        for (int k = 0; k < dim; ++k) {
          const std::size_t i = static_cast<std::size_t>(b) * dim + k;
          x0[i] = row[static_cast<std::size_t>(k)];
          noise[i] = rng.normal();
          xt[i] = std::sqrt(ab) * x0[i] + std::sqrt(1.0 - ab) * noise[i];
        }
      }
      const TensorND eps_hat = actor.denoiser.forward({xt, tcol, feat_b});
      const LossResult loss = mse(eps_hat, noise);
      actor.denoiser.zero_grads();
      actor.denoiser.backward(loss.grad);
      opt.step(actor.denoiser.grads());
    }
  };
  phase((steps * 2) / 3, lr);
  phase(steps / 3, lr / 10.0);
}

bool c6_diffusion_sampler() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;

  // (a) alpha = 0 with a guide attached must replay the unguided stream
  // bitwise, leaving the rng at the same position.
  {
    DiffusionActor actor(600, default_schedule());
    GuidanceModel guide(600);
    RandomEngine init(12);
    actor.init(init);
    guide.init(init);
    bool bitwise = true, stream_equal = true;
    GeneratorConfig g;
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
      PackingEnv env(kBox, 1.0);
      g.seed = 880000 + trial;
      env.reset(gen_rs(g).items);
      RandomFeasiblePolicy walker(trial);
      for (std::uint64_t hop = 0; hop < trial % 4; ++hop) {
        const auto a = walker.choose(env);
        if (!a) break;
        env.step(*a);
      }
      const TensorND feat =
          actor.encode(to_batch(encode_state(env.state(), kBox)));
      RandomEngine ra(500 + trial), rb(500 + trial);
      const TensorND unguided = sample_action_logits(actor, feat, nullptr, 0.0, ra);
      const TensorND guided = sample_action_logits(actor, feat, &guide, 0.0, rb);
      for (std::size_t i = 0; i < unguided.size(); ++i) {
        const double a = unguided[i], b = guided[i];
        bitwise = bitwise && std::memcmp(&a, &b, sizeof(double)) == 0;
      }
      stream_equal = stream_equal && ra.next_u64() == rb.next_u64();
    }
    note("alpha=0 bitwise equality over 10 states: %s (rng stream aligned: %s)",
         bitwise ? "yes" : "NO", stream_equal ? "yes" : "NO");
    ok = ok && bitwise && stream_equal;
  }

  // (b) trained on a single point, the sampler must return that point.
  {
    const std::vector<double> target{1.0, -0.5, 0.25, 2.0};
    DiffusionActor actor(4, default_schedule());
    RandomEngine init(77);
    actor.init(init);
    const TensorND feat = actor.encode(TensorND({1, 10, 10, 4}, 0.0));
    train_denoiser(actor, feat, [&target](RandomEngine&) { return target; }, 12000,
                   1e-3, 31);
    double linf = 0.0;
    RandomEngine sample_rng(99);
    for (int s = 0; s < 20; ++s) {
      const TensorND x0 = sample_action_logits(actor, feat, nullptr, 0.0, sample_rng);
      for (std::size_t k = 0; k < 4; ++k) {
        linf = std::max(linf, std::abs(x0[k] - target[k]));
      }
    }
    note("delta recovery L-inf over 20 samples: %.4f (budget 0.1)", linf);
    ok = ok && linf < 0.1;
  }

  // (c) a 50/50 two-point distribution must keep both modes.
  {
    DiffusionActor actor(2, default_schedule());
    RandomEngine init(78);
    actor.init(init);
    const TensorND feat = actor.encode(TensorND({1, 10, 10, 4}, 0.0));
    const std::vector<double> mode_a{2.0, -2.0}, mode_b{-2.0, 2.0};
    train_denoiser(actor, feat,
                   [&](RandomEngine& r) { return r.uniform() < 0.5 ? mode_a : mode_b; },
                   6000, 1e-3, 32);
    int count_a = 0, count_b = 0;
    double worst_dist = 0.0;
    RandomEngine sample_rng(101);
    for (int s = 0; s < 500; ++s) {
      const TensorND x0 = sample_action_logits(actor, feat, nullptr, 0.0, sample_rng);
      const bool is_a = x0[0] > x0[1];
      (is_a ? count_a : count_b) += 1;
      const std::vector<double>& m = is_a ? mode_a : mode_b;
      worst_dist = std::max(worst_dist,
                            std::max(std::abs(x0[0] - m[0]), std::abs(x0[1] - m[1])));
    }
    note("two-mode recovery: %d / %d of 500 samples (need >= 50 each), worst mode "
         "distance %.3f",
         count_a, count_b, worst_dist);
    ok = ok && count_a >= 50 && count_b >= 50;
  }

  note("%.1fs", wall_seconds_since(t0));
  return ok;
}

// ---------------------------------------------------------------- 7

bool c7_heuristic_benchmarks() {
  const auto t0 = std::chrono::steady_clock::now();
  const int kSequences = 2000;
  const double rho = 1.0;

  note("generating %d sequences per dataset...", kSequences);
  const DatasetFile rs = build_dataset(GeneratorKind::RS, kSequences, 500000);
  const DatasetFile cut1 = build_dataset(GeneratorKind::CUT1, kSequences, 600000);
  const DatasetFile cut2 = build_dataset(GeneratorKind::CUT2, kSequences, 700000);

  auto mean_util = [&](Policy& p, const DatasetFile& data) {
    return evaluate_policy(p, data, 0, kBox, rho).mean_utilization;
  };
  BoundaryRulePolicy boundary;
  BphPolicy bph;
  const double boundary_rs = mean_util(boundary, rs);
  const double bph_rs = mean_util(bph, rs);
  const double boundary_c1 = mean_util(boundary, cut1);
  const double bph_c1 = mean_util(bph, cut1);
  const double boundary_c2 = mean_util(boundary, cut2);
  const double bph_c2 = mean_util(bph, cut2);

  struct WindowCell {
    const char* label;
    double got;
    double target;
  };
  const WindowCell cells[] = {{"boundary/RS", boundary_rs, 34.9},
                              {"bph/RS", bph_rs, 35.4},
                              {"bph/CUT-1", bph_c1, 51.9}};
  bool windows_ok = true;
  for (const WindowCell& c : cells) {
    const bool in = std::abs(c.got - c.target) <= 6.0;
    note("%-12s mean utilization %.1f%% vs reference %.1f%% +/- 6.0: %s", c.label,
         c.got, c.target, in ? "in window" : "OUT OF WINDOW");
    windows_ok = windows_ok && in;
  }
  const bool order_c1 = boundary_c1 <= bph_c1;
  const bool order_c2 = boundary_c2 <= bph_c2;
  note("ordering boundary <= bph: CUT-1 %.1f <= %.1f: %s; CUT-2 %.1f <= %.1f: %s",
       boundary_c1, bph_c1, order_c1 ? "yes" : "NO", boundary_c2, bph_c2,
       order_c2 ? "yes" : "NO");
  note("%.1fs", wall_seconds_since(t0));
  return windows_ok && order_c1 && order_c2;
}

// ---------------------------------------------------------------- 8

std::vector<double> read_action_losses(const std::string& csv_path) {
  std::ifstream in(csv_path);
  std::vector<double> out;
  std::string line;
  if (!std::getline(in, line)) return out;  // header
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    for (int c = 0; c <= 3 && std::getline(row, cell, ','); ++c) {
      if (c == 3) out.push_back(std::stod(cell));
    }
  }
  return out;
}

bool c8_training_improvement() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string dir = "acceptance_c8";

  TrainConfig cfg;
  cfg.rho_min = 1.0;
  cfg.epochs = 200;
  cfg.seed = 7;

  const std::string ckpt_path = dir + "/" + Trainer::kCheckpointFile;
  auto trainer = std::make_unique<Trainer>(cfg);
  if (fs::exists(ckpt_path)) {
    try {
      trainer->restore(load_checkpoint(ckpt_path));
      note("resuming from %s at epoch %d", ckpt_path.c_str(), trainer->epoch());
    } catch (const std::exception& e) {
      note("existing checkpoint unusable (%s), starting over", e.what());
      trainer = std::make_unique<Trainer>(cfg);
      fs::remove_all(dir);
    }
  }
  if (trainer->epoch() >= cfg.epochs) {
    note("run already finished, reusing its outputs");
  } else {
    note("training epochs %d..%d (seed %llu)...", trainer->epoch(), cfg.epochs,
         static_cast<unsigned long long>(cfg.seed));
    trainer->train(dir);
    note("training done after %.0fs", wall_seconds_since(t0));
  }
  trainer.reset();

  const std::vector<double> losses = read_action_losses(dir + "/" + Trainer::kLossFile);
  const std::size_t quarter = losses.size() / 4;
  bool trend_ok = quarter > 0;
  double means[4] = {0, 0, 0, 0};
  if (trend_ok) {
    for (int q = 0; q < 4; ++q) {
      for (std::size_t i = 0; i < quarter; ++i) {
        means[q] += losses[static_cast<std::size_t>(q) * quarter + i];
      }
      means[q] /= static_cast<double>(quarter);
      if (q > 0) trend_ok = trend_ok && means[q] < means[q - 1];
    }
  }
  note("action-loss moving average by quarter: %.4f %.4f %.4f %.4f -> %s", means[0],
       means[1], means[2], means[3],
       trend_ok ? "strictly decreasing" : "NOT DECREASING");

  const DatasetFile test = build_dataset(GeneratorKind::RS, 100, 910000);
  RandomFeasiblePolicy random_pol(123);
  BoundaryRulePolicy boundary;
  const double util_random =
      evaluate_policy(random_pol, test, 0, kBox, cfg.rho_min).mean_utilization;
  const double util_boundary =
      evaluate_policy(boundary, test, 0, kBox, cfg.rho_min).mean_utilization;
  note("baselines: random %.1f%%, boundary %.1f%%", util_random, util_boundary);

  const auto bundle = load_actor_bundle(ckpt_path, kBox);
  double best_util = -1.0, best_alpha = 0.0;
  for (const double alpha : {0.0, 0.5, 1.0, 2.0, 5.0}) {
    DiffusionPolicyConfig pc;
    pc.alpha = alpha;
    pc.sample = false;
    pc.seed = 4242;
    DiffusionPolicy policy(bundle->actor, &bundle->guidance, pc);
    const double util =
        evaluate_policy(policy, test, 0, kBox, cfg.rho_min).mean_utilization;
    note("diffusion policy alpha=%.1f: %.1f%%", alpha, util);
    if (util > best_util) {
      best_util = util;
      best_alpha = alpha;
    }
  }
  const bool beats_random = best_util >= util_random + 10.0;
  const bool beats_boundary = best_util >= util_boundary;
  note("best alpha %.1f: %.1f%% (needs >= random+10 = %.1f%%: %s; >= boundary %.1f%%: %s)",
       best_alpha, best_util, util_random + 10.0, beats_random ? "yes" : "NO",
       util_boundary, beats_boundary ? "yes" : "NO");
  note("%.0fs total", wall_seconds_since(t0));
  return trend_ok && beats_random && beats_boundary;
}

// ---------------------------------------------------------------- 9

bool c9_latency_budgets() {
  const auto t0 = std::chrono::steady_clock::now();
  const int kDecisions = 3000;

  auto run_policy = [&](Policy& pol, const char* label, double budget_ms) {
    std::vector<double> lat;
    lat.reserve(kDecisions);
    GeneratorConfig g;
    std::uint64_t ep = 0;
    while (static_cast<int>(lat.size()) < kDecisions) {
      PackingEnv env(kBox, 1.0);
      g.seed = 810000 + ep++;
      env.reset(gen_rs(g).items);
      while (!env.done() && static_cast<int>(lat.size()) < kDecisions) {
        const auto s0 = std::chrono::steady_clock::now();
        const auto a = pol.choose(env);
        const auto s1 = std::chrono::steady_clock::now();
        lat.push_back(std::chrono::duration<double, std::milli>(s1 - s0).count());
        if (!a) break;
        env.step(*a);
      }
    }
    const double p99 = percentile(lat, 99.0);
    note("%-8s p99 %.3f ms (budget %.1f ms) over %d decisions", label, p99, budget_ms,
         kDecisions);
    return p99 <= budget_ms;
  };

  BoundaryRulePolicy boundary;
  BphPolicy bph;
  const bool ok_boundary = run_policy(boundary, "boundary", 10.0);
  const bool ok_bph = run_policy(bph, "bph", 10.0);

  std::vector<double> lat;
  lat.reserve(kDecisions);
  GeneratorConfig g;
  std::uint64_t ep = 0;
  RandomFeasiblePolicy walker(5);
  while (static_cast<int>(lat.size()) < kDecisions) {
    PackingEnv env(kBox, 1.0);
    g.seed = 820000 + ep++;
    env.reset(gen_rs(g).items);
    while (!env.done() && static_cast<int>(lat.size()) < kDecisions) {
      const PackingState& st = env.state();
      const auto s0 = std::chrono::steady_clock::now();
      const FeasibilityMask mask =
          compute_feasibility_mask(st.hm, kBox, st.current_item, 1.0);
      const auto s1 = std::chrono::steady_clock::now();
      lat.push_back(std::chrono::duration<double, std::milli>(s1 - s0).count());
      if (!any_feasible(mask)) break;
      const auto a = walker.choose(env);
      if (!a) break;
      env.step(*a);
    }
  }
  const double p99_mask = percentile(lat, 99.0);
  note("%-8s p99 %.3f ms (budget 2.0 ms) over %d decisions", "mask", p99_mask,
       kDecisions);
  const bool ok_mask = p99_mask <= 2.0;

  note("%.1fs", wall_seconds_since(t0));
  return ok_boundary && ok_bph && ok_mask;
}

// ---------------------------------------------------------------- 10

bool c10_determinism() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path base = fs::temp_directory_path() / "bp_acceptance_det";
  fs::remove_all(base);
  fs::create_directories(base);
  bool ok = true;

  // Datasets, three generations per kind.
  for (const GeneratorKind kind : {GeneratorKind::RS, GeneratorKind::CUT2}) {
    std::string first;
    bool same = true;
    for (int run = 0; run < 3; ++run) {
      GeneratorConfig cfg;
      cfg.kind = kind;
      cfg.seed = 99;
      std::vector<ItemSequence> seqs;
      for (std::uint64_t i = 0; i < 50; ++i) {
        GeneratorConfig g = cfg;
        g.seed = RandomEngine::mix(cfg.seed, i);
        seqs.push_back(generate_sequence(g));
      }
      const std::string path =
          (base / (std::string("data_") + to_string(kind) + "_" + std::to_string(run) + ".jsonl"))
              .string();
      save_sequences(seqs, cfg, path);
      const std::string bytes = slurp(path);
      if (run == 0) {
        first = bytes;
      } else {
        same = same && bytes == first;
      }
      same = same && !bytes.empty();
    }
    note("dataset %s: 3 runs byte-identical: %s", to_string(kind), same ? "yes" : "NO");
    ok = ok && same;
  }

  // Checkpoints and loss logs from three identical short trainings.
  {
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.max_steps_per_epoch = 10;
    cfg.updates_per_epoch = 2;
    cfg.batch_size = 8;
    cfg.diffusion_steps = 8;
    cfg.stream_length = 10;
    cfg.buffer_capacity = 512;
    cfg.seed = 3;
    std::string ckpt0, losses0;
    bool same = true;
    for (int run = 0; run < 3; ++run) {
      const std::string dir = (base / ("train_" + std::to_string(run))).string();
      Trainer trainer(cfg);
      trainer.train(dir);
      const std::string ckpt = slurp(dir + "/checkpoint.bpk");
      const std::string losses = slurp(dir + "/losses.csv");
      if (run == 0) {
        ckpt0 = ckpt;
        losses0 = losses;
      } else {
        same = same && ckpt == ckpt0 && losses == losses0;
      }
      same = same && !ckpt.empty() && !losses.empty();
    }
    note("checkpoint + loss log: 3 runs byte-identical: %s", same ? "yes" : "NO");
    ok = ok && same;
  }

  // Evaluation CSVs from three identical runs.
  {
    const DatasetFile data = build_dataset(GeneratorKind::RS, 20, 930000);
    std::string first;
    bool same = true;
    for (int run = 0; run < 3; ++run) {
      BphPolicy policy;
      const EvalReport rep = evaluate_policy(policy, data, 0, kBox, 1.0);
      const std::string path = (base / ("eval_" + std::to_string(run) + ".csv")).string();
      write_eval_csv(rep, path);
      const std::string bytes = slurp(path);
      if (run == 0) {
        first = bytes;
      } else {
        same = same && bytes == first;
      }
      same = same && !bytes.empty();
    }
    note("evaluation csv: 3 runs byte-identical: %s", same ? "yes" : "NO");
    ok = ok && same;
  }

  // The same facts through the installed command-line surface.
  {
    bool same = true;
    std::string first;
    for (int run = 0; run < 3; ++run) {
      const std::string path = (base / ("cli_" + std::to_string(run) + ".jsonl")).string();
      const std::string cmd = std::string(BINPACK_CLI_PATH) + " gen-data --kind cut1 " +
                              "--count 10 --seed 44 --out " + path + " > /dev/null 2>&1";
      same = same && std::system(cmd.c_str()) == 0;
      const std::string bytes = slurp(path);
      if (run == 0) {
        first = bytes;
      } else {
        same = same && bytes == first;
      }
      same = same && !bytes.empty();
    }
    note("cli gen-data: 3 runs byte-identical: %s", same ? "yes" : "NO");
    ok = ok && same;
  }

  fs::remove_all(base);
  note("%.1fs", wall_seconds_since(t0));
  return ok;
}

struct CriterionEntry {
  int id;
  const char* name;
  bool (*run)();
};

const CriterionEntry kCriteria[] = {
    {1, "feasibility mask equivalence", c1_mask_equivalence},
    {2, "empty maximal space enumeration", c2_ems_equality},
    {3, "cut tilings partition and replay", c3_cut_partition_replay},
    {4, "reward telescoping", c4_reward_telescoping},
    {5, "gradient checks", c5_gradient_checks},
    {6, "diffusion sampler sanity", c6_diffusion_sampler},
    {7, "heuristic baseline benchmarks", c7_heuristic_benchmarks},
    {8, "training improvement", c8_training_improvement},
    {9, "decision latency budgets", c9_latency_budgets},
    {10, "bitwise determinism", c10_determinism},
};

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <criterion 1-10>\n", argv[0]);
    return 2;
  }
  const int wanted = std::atoi(argv[1]);
  for (const CriterionEntry& c : kCriteria) {
    if (c.id != wanted) continue;
    bool pass = false;
    try {
      pass = c.run();
    } catch (const std::exception& e) {
      note("unhandled exception: %s", e.what());
      pass = false;
    }
    std::printf("ACCEPTANCE %d %s: %s\n", c.id, c.name, pass ? "PASS" : "FAIL");
    return pass ? 0 : 1;
  }
  std::fprintf(stderr, "no such criterion: %s\n", argv[1]);
  return 2;
}
