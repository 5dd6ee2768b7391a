#include "binpack/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "binpack/errors.hpp"
#include "binpack/geometry.hpp"

namespace binpack {

using nlohmann::json;

namespace {

std::string rgb_hex(double r, double g, double b) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                static_cast<int>(std::lround(r * 255)),
                static_cast<int>(std::lround(g * 255)),
                static_cast<int>(std::lround(b * 255)));
  return buf;
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  const double c = v * s;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r1 = 0, g1 = 0, b1 = 0;
  if (hp < 1) { r1 = c; g1 = x; }
  else if (hp < 2) { r1 = x; g1 = c; }
  else if (hp < 3) { g1 = c; b1 = x; }
  else if (hp < 4) { g1 = x; b1 = c; }
  else if (hp < 5) { r1 = x; b1 = c; }
  else { r1 = c; b1 = x; }
  const double m = v - c;
  r = r1 + m;
  g = g1 + m;
  b = b1 + m;
}

void write_frame(const HeightMap& hm, int max_h, int frame, int step_count,
                 const std::string& out_dir) {
  constexpr int kCell = 28, kMargin = 12;
  const int width = hm.length() * kCell + 2 * kMargin;
  const int height = hm.width() * kCell + 2 * kMargin;
  char name[32];
  std::snprintf(name, sizeof(name), "frame_%03d.svg", frame);
  const std::string path = out_dir + "/" + name;
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot open for writing: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<title>step " << frame << " of " << step_count << "</title>\n";
  for (int x = 0; x < hm.length(); ++x) {
    for (int y = 0; y < hm.width(); ++y) {
      const int h = hm.at(x, y);
      out << "<rect x=\"" << (kMargin + x * kCell) << "\" y=\""
          << (kMargin + y * kCell) << "\" width=\"" << kCell << "\" height=\""
          << kCell << "\" fill=\"" << height_color(h, max_h)
          << "\" stroke=\"#404040\" stroke-width=\"1\"><title>(" << x << ","
          << y << ") h=" << h << "</title></rect>\n";
    }
  }
  out << "</svg>\n";
  if (!out) throw IoFailure("write failed: " + path);
}

void stamp(HeightMap& hm, const Dims3& container, const Placement& p) {
  const Dims3 od = p.oriented();
  if (p.x < 0 || p.y < 0 || p.z < 0 || p.x + od.l > container.l ||
      p.y + od.w > container.w || p.z + od.h > container.h) {
    throw MalformedTrace("trace placement leaves the container");
  }
  for (int x = p.x; x < p.x + od.l; ++x) {
    for (int y = p.y; y < p.y + od.w; ++y) {
      hm.set(x, y, std::max(hm.at(x, y), p.z + od.h));
    }
  }
}

}  // namespace

std::string item_color(int index) {
  const double hue = std::fmod(index * 137.50776405003785, 360.0);
  double r, g, b;
  hsv_to_rgb(hue, 0.62, 0.92, r, g, b);
  return rgb_hex(r, g, b);
}

std::string height_color(int h, int max_h) {
  if (max_h <= 0) max_h = 1;
  const double f = std::clamp(static_cast<double>(h) / max_h, 0.0, 1.0);
  // white at 0 up to a saturated blue at the ceiling
  return rgb_hex(1.0 - 0.75 * f, 1.0 - 0.55 * f, 1.0 - 0.15 * f);
}

int render_trace_svg(const EpisodeTrace& trace, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  HeightMap hm(trace.container.l, trace.container.w);
  const int steps = static_cast<int>(trace.steps.size());
  write_frame(hm, trace.container.h, 0, steps, out_dir);
  int frame = 1;
  for (const TraceStep& s : trace.steps) {
    stamp(hm, trace.container, s.placement);
    write_frame(hm, trace.container.h, frame++, steps, out_dir);
  }
  return frame;
}

void write_scene_json(const EpisodeTrace& trace, const std::string& path) {
  json scene;
  scene["format"] = "binpack-scene";
  scene["version"] = 1;
  scene["container"] = {trace.container.l, trace.container.w, trace.container.h};
  json boxes = json::array();
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const Placement& p = trace.steps[i].placement;
    const Dims3 od = p.oriented();
    boxes.push_back({{"item", static_cast<int>(i)},
                     {"pos", {p.x, p.y, p.z}},
                     {"dims", {od.l, od.w, od.h}},
                     {"color", item_color(static_cast<int>(i))}});
  }
  scene["boxes"] = std::move(boxes);
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot open for writing: " + path);
  out << scene.dump(2) << '\n';
  if (!out) throw IoFailure("write failed: " + path);
}

}  // namespace binpack
