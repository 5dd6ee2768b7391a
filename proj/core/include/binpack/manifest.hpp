#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace binpack {

inline constexpr const char* kToolVersion = "0.1.0";

/// Provenance record written beside every CLI run's outputs. The only place
/// wall-clock timestamps are allowed; everything else stays deterministic.
struct RunManifest {
  std::string subcommand;
  std::string config_json = "{}";  // resolved flag values
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string started_at;   // ISO 8601 UTC
  std::string finished_at;
};

std::string iso8601_utc_now();

void write_manifest(const RunManifest& m, const std::string& path);

}  // namespace binpack
