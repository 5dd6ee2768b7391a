#pragma once

#include <string>

#include "binpack/trace.hpp"

namespace binpack {

/// Deterministic per-item fill color (golden-angle hue walk).
std::string item_color(int index);

/// Grayscale-to-blue fill for a column height in [0, max_h].
std::string height_color(int h, int max_h);

/// Replays the trace onto a height map and writes frame_000.svg ...
/// frame_NNN.svg (one frame per step plus the initial empty container) into
/// out_dir. Returns the frame count. Throws MalformedTrace when a placement
/// leaves the grid.
int render_trace_svg(const EpisodeTrace& trace, const std::string& out_dir);

/// Structured scene export: the container plus every placed box with its
/// position, oriented dims and color.
void write_scene_json(const EpisodeTrace& trace, const std::string& path);

}  // namespace binpack
