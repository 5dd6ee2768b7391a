#include "binpack/manifest.hpp"

#include <ctime>
#include <fstream>

#include <json.hpp>

#include "binpack/errors.hpp"

namespace binpack {

using nlohmann::json;

std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const RunManifest& m, const std::string& path) {
  json j;
  j["format"] = "binpack-manifest";
  j["version"] = 1;
  j["tool_version"] = kToolVersion;
  j["subcommand"] = m.subcommand;
  j["config"] = json::parse(m.config_json);
  j["seed"] = m.seed;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoFailure("write failed: " + path);
}

}  // namespace binpack
