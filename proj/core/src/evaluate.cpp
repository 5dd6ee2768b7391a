#include "binpack/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "binpack/errors.hpp"
#include "binpack/trace.hpp"

namespace binpack {

void TilingReplayPolicy::begin_sequence(const ItemSequence& seq) {
  tiling_ = seq.tiling;
  next_ = 0;
}

std::optional<Action> TilingReplayPolicy::choose(const PackingEnv& env) {
  if (env.done() || next_ >= tiling_.size()) return std::nullopt;
  const Placement& p = tiling_[next_++];
  return Action{p.x, p.y, p.orientation};
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double rank = p / 100.0 * static_cast<double>(values.size());
  std::size_t idx = static_cast<std::size_t>(std::ceil(rank));
  if (idx > 0) --idx;
  if (idx >= values.size()) idx = values.size() - 1;
  return values[idx];
}

EvalReport evaluate_policy(Policy& policy, const DatasetFile& data, int episodes,
                           Dims3 container, double rho_min,
                           const std::string& trace_path) {
  if (data.sequences.empty()) throw EmptyStream("dataset has no sequences");
  std::size_t n = data.sequences.size();
  if (episodes > 0) n = std::min(n, static_cast<std::size_t>(episodes));
  EvalReport report;
  report.policy = policy.name();
  report.episodes = static_cast<int>(n);
  PackingEnv env(container, rho_min);
  std::vector<double> latencies_ms;
  double items_sum = 0.0, util_sum = 0.0;
  for (std::size_t e = 0; e < n; ++e) {
    const ItemSequence& seq = data.sequences[e];
    if (auto* aware = dynamic_cast<SequenceAwarePolicy*>(&policy)) {
      aware->begin_sequence(seq);
    }
    env.reset(seq.items);
    EpisodeTrace trace;
    trace.container = container;
    EpisodeRow row;
    row.episode = static_cast<int>(e);
    row.seed = seq.seed;
    while (!env.done()) {
      const Dims3 item = env.state().current_item;
      const auto t0 = std::chrono::steady_clock::now();
      const std::optional<Action> a = policy.choose(env);
      const auto t1 = std::chrono::steady_clock::now();
      latencies_ms.push_back(
          std::chrono::duration<double, std::milli>(t1 - t0).count());
      if (!a) break;
      const int placed_before = static_cast<int>(env.state().placed.size());
      const StepOutcome out = env.step(*a);
      row.steps += 1;
      row.total_reward += out.reward;
      if (e == 0 && !trace_path.empty()) {
        TraceStep ts;
        ts.step = row.steps - 1;
        ts.item = item;
        ts.action = *a;
        const auto& placed = env.state().placed;
        ts.placement = static_cast<int>(placed.size()) > placed_before
                           ? placed.back()
                           : Placement{ts.step, a->x, a->y, 0, a->o, item};
        ts.reward = out.reward;
        ts.done = out.done;
        trace.steps.push_back(ts);
      }
    }
    row.items = static_cast<int>(env.state().placed.size());
    row.utilization = env.current_utilization();
    items_sum += row.items;
    util_sum += row.utilization;
    report.rows.push_back(row);
    if (e == 0 && !trace_path.empty()) save_trace(trace, trace_path);
  }
  report.mean_items = items_sum / static_cast<double>(n);
  report.mean_utilization = util_sum / static_cast<double>(n);
  report.latency.decisions = latencies_ms.size();
  report.latency.p50_ms = percentile(latencies_ms, 50.0);
  report.latency.p90_ms = percentile(latencies_ms, 90.0);
  report.latency.p99_ms = percentile(latencies_ms, 99.0);
  report.latency.max_ms =
      latencies_ms.empty() ? 0.0
                           : *std::max_element(latencies_ms.begin(), latencies_ms.end());
  return report;
}

void write_eval_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot open for writing: " + path);
  out << kEvalCsvHeader << '\n';
  char buf[256];
  for (const EpisodeRow& r : report.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%llu,%d,%d,%.17g,%.17g",
                  report.policy.c_str(), r.episode,
                  static_cast<unsigned long long>(r.seed), r.steps, r.items,
                  r.utilization, r.total_reward);
    out << buf << '\n';
  }
  if (!out) throw IoFailure("write failed: " + path);
}

void write_latency_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot open for writing: " + path);
  out << kLatencyCsvHeader << '\n';
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%zu,%.6f,%.6f,%.6f,%.6f",
                report.policy.c_str(), report.latency.decisions,
                report.latency.p50_ms, report.latency.p90_ms,
                report.latency.p99_ms, report.latency.max_ms);
  out << buf << '\n';
  if (!out) throw IoFailure("write failed: " + path);
}

std::string format_summary(const EvalReport& report) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-10s %.1f / %.1f%%  (episodes: %d)",
                report.policy.c_str(), report.mean_items,
                report.mean_utilization, report.episodes);
  return buf;
}

}  // namespace binpack
