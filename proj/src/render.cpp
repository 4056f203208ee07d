#include "gdraw/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace gdraw {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  // normalize negative zero for byte-stable output
  if (std::string(buf) == "-0.000") return "0.000";
  return buf;
}

}  // namespace

std::string render_svg(const Layout& x, const Graph& g, const RenderOptions& opts) {
  x.validate(g.node_count());

  double min_x = x.pos[0][0], max_x = x.pos[0][0];
  double min_y = x.pos[0][1], max_y = x.pos[0][1];
  for (const auto& p : x.pos) {
    min_x = std::min(min_x, p[0]);
    max_x = std::max(max_x, p[0]);
    min_y = std::min(min_y, p[1]);
    max_y = std::max(max_y, p[1]);
  }
  const double span_x = max_x - min_x;
  const double span_y = max_y - min_y;
  const bool degenerate = span_x < 1e-12 && span_y < 1e-12;

  const double inner = opts.width_px - 2 * opts.margin;
  const double span = std::max({span_x, span_y, 1e-12});
  const double scale = inner / span;  // uniform: preserves aspect ratio
  const double height_px = degenerate ? opts.width_px : span_y * scale + 2 * opts.margin;
  const double width_px = degenerate ? opts.width_px : span_x * scale + 2 * opts.margin;

  auto map = [&](const Vec2& p) -> Vec2 {
    if (degenerate) return {opts.width_px / 2, opts.width_px / 2};
    // flip y: SVG's y-axis points down
    return {opts.margin + (p[0] - min_x) * scale, opts.margin + (max_y - p[1]) * scale};
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width_px) << "\" height=\""
      << fmt(height_px) << "\" viewBox=\"0 0 " << fmt(width_px) << ' ' << fmt(height_px)
      << "\">\n";
  if (degenerate) {
    out << "<!-- warning: degenerate layout, all nodes coincide -->\n";
    const Vec2 c = map(x.pos[0]);
    out << "<circle cx=\"" << fmt(c[0]) << "\" cy=\"" << fmt(c[1]) << "\" r=\""
        << fmt(opts.node_radius) << "\" fill=\"#1f77b4\"/>\n";
    out << "</svg>\n";
    return out.str();
  }
  for (const auto& [u, v] : g.edges()) {
    const Vec2 a = map(x.pos[u]);
    const Vec2 b = map(x.pos[v]);
    out << "<line x1=\"" << fmt(a[0]) << "\" y1=\"" << fmt(a[1]) << "\" x2=\"" << fmt(b[0])
        << "\" y2=\"" << fmt(b[1]) << "\" stroke=\"#555555\" stroke-width=\""
        << fmt(opts.edge_width) << "\"/>\n";
  }
  for (const auto& p : x.pos) {
    const Vec2 c = map(p);
    out << "<circle cx=\"" << fmt(c[0]) << "\" cy=\"" << fmt(c[1]) << "\" r=\""
        << fmt(opts.node_radius) << "\" fill=\"#1f77b4\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace gdraw
