#include "binpack/trace.hpp"

#include <fstream>

#include <json.hpp>

#include "binpack/errors.hpp"

namespace binpack {

using nlohmann::json;

void save_trace(const EpisodeTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot open for writing: " + path);
  json header{{"format", "binpack-trace"},
              {"version", 1},
              {"container", {trace.container.l, trace.container.w, trace.container.h}}};
  out << header.dump() << '\n';
  for (const TraceStep& s : trace.steps) {
    json rec{{"step", s.step},
             {"item", {s.item.l, s.item.w, s.item.h}},
             {"action", {{"x", s.action.x}, {"y", s.action.y}, {"o", s.action.o}}},
             {"pos", {s.placement.x, s.placement.y, s.placement.z}},
             {"reward", s.reward},
             {"done", s.done}};
    out << rec.dump() << '\n';
  }
  if (!out) throw IoFailure("write failed: " + path);
}

EpisodeTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw MalformedTrace("empty trace file: " + path);
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("format", "") != "binpack-trace") {
    throw FormatVersionMismatch("not a trace file: " + path);
  }
  if (header.value("version", -1) != 1) {
    throw FormatVersionMismatch("unsupported trace version in " + path);
  }
  EpisodeTrace trace;
  try {
    trace.container = Dims3{header.at("container").at(0).get<int>(),
                            header.at("container").at(1).get<int>(),
                            header.at("container").at(2).get<int>()};
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json rec = json::parse(line, nullptr, false);
      if (rec.is_discarded()) throw MalformedTrace("unparseable trace row in " + path);
      TraceStep s;
      s.step = rec.at("step").get<int>();
      s.item = Dims3{rec.at("item").at(0).get<int>(), rec.at("item").at(1).get<int>(),
                     rec.at("item").at(2).get<int>()};
      s.action = Action{rec.at("action").at("x").get<int>(),
                        rec.at("action").at("y").get<int>(),
                        rec.at("action").at("o").get<int>()};
      s.placement = Placement{s.step,
                              rec.at("pos").at(0).get<int>(),
                              rec.at("pos").at(1).get<int>(),
                              rec.at("pos").at(2).get<int>(),
                              s.action.o,
                              s.item};
      s.reward = rec.at("reward").get<double>();
      s.done = rec.at("done").get<bool>();
      trace.steps.push_back(s);
    }
  } catch (const json::exception& e) {
    throw MalformedTrace("trace field error in " + path + ": " + e.what());
  }
  return trace;
}

}  // namespace binpack
