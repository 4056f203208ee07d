#pragma once

#include <string>

#include "gdraw/geometry.hpp"
#include "gdraw/graph.hpp"

namespace gdraw {

struct RenderOptions {
  double width_px = 600;
  double node_radius = 4;
  double edge_width = 1;
  double margin = 20;
};

// Deterministic SVG: edges as <line>, nodes as <circle>, layout fit to the
// viewport with preserved aspect ratio. A fully coincident layout renders a
// single centered node with a warning comment.
std::string render_svg(const Layout& x, const Graph& g, const RenderOptions& opts = {});

}  // namespace gdraw
