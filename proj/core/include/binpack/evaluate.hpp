#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "binpack/datasets.hpp"
#include "binpack/env.hpp"

namespace binpack {

/// Policies that need to see each sequence before the episode starts
/// (e.g. tiling replay). evaluate_policy calls begin_sequence per episode.
class SequenceAwarePolicy : public Policy {
 public:
  virtual void begin_sequence(const ItemSequence& seq) = 0;
};

/// Replays a CUT tiling verbatim: step k places item k at its recorded
/// footprint. On a valid tiling this reaches 100% utilization.
class TilingReplayPolicy final : public SequenceAwarePolicy {
 public:
  void begin_sequence(const ItemSequence& seq) override;
  std::optional<Action> choose(const PackingEnv& env) override;
  const char* name() const override { return "replay"; }

 private:
  std::vector<Placement> tiling_;
  std::size_t next_ = 0;
};

struct EpisodeRow {
  int episode = 0;
  std::uint64_t seed = 0;
  int steps = 0;
  int items = 0;
  double utilization = 0.0;
  double total_reward = 0.0;
};

struct LatencySummary {
  std::size_t decisions = 0;
  double p50_ms = 0.0;
  double p90_ms = 0.0;
  double p99_ms = 0.0;
  double max_ms = 0.0;
};

struct EvalReport {
  std::string policy;
  int episodes = 0;
  double mean_items = 0.0;
  double mean_utilization = 0.0;
  std::vector<EpisodeRow> rows;
  LatencySummary latency;  // wall-clock; kept out of the deterministic CSV
};

/// Runs the policy over the dataset's sequences in order. episodes = 0
/// means all. Throws EmptyStream when the dataset has no sequences. When
/// trace_path is non-empty, the first episode's trace is written there.
EvalReport evaluate_policy(Policy& policy, const DatasetFile& data, int episodes,
                           Dims3 container, double rho_min,
                           const std::string& trace_path = {});

/// Nearest-rank percentile, p in [0, 100].
double percentile(std::vector<double> values, double p);

/// Deterministic per-episode metrics; byte-identical across reruns.
inline constexpr const char* kEvalCsvHeader =
    "policy,episode,seed,steps,items,utilization,total_reward";
void write_eval_csv(const EvalReport& report, const std::string& path);

/// Wall-clock latency percentiles; separate file because timings vary.
inline constexpr const char* kLatencyCsvHeader =
    "policy,decisions,p50_ms,p90_ms,p99_ms,max_ms";
void write_latency_csv(const EvalReport& report, const std::string& path);

/// "items / utilization%" summary in the conventional comparison format.
std::string format_summary(const EvalReport& report);

}  // namespace binpack
