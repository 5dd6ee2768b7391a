#pragma once

#include <string>
#include <vector>

#include "binpack/geometry.hpp"

namespace binpack {

/// One executed step of an episode, as written to trace files.
struct TraceStep {
  int step = 0;
  Dims3 item;
  Action action;
  Placement placement;  // resolved position after the drop
  double reward = 0.0;
  bool done = false;
};

struct EpisodeTrace {
  Dims3 container{10, 10, 10};
  std::vector<TraceStep> steps;
};

void save_trace(const EpisodeTrace& trace, const std::string& path);

/// Throws IoFailure, FormatVersionMismatch, or MalformedTrace.
EpisodeTrace load_trace(const std::string& path);

}  // namespace binpack
