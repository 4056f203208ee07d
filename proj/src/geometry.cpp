#include "gdraw/geometry.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gdraw/errors.hpp"

namespace gdraw {

namespace {
constexpr double kOrientEps = 1e-12;
constexpr double kIsotropyEps = 1e-12;
}  // namespace

void Layout::validate(int n) const {
  if (n >= 0 && static_cast<int>(pos.size()) != n)
    throw ValidationError("layout has " + std::to_string(pos.size()) + " rows, graph has " +
                          std::to_string(n) + " nodes");
  for (const auto& p : pos)
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]))
      throw ValidationError("layout contains a non-finite coordinate");
}

Layout parse_layout(const std::string& text) {
  Layout x;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a >> b))
      throw ParseError("layout line " + std::to_string(line_no) + ": expected \"x y\"");
    x.pos.push_back({a, b});
  }
  x.validate();
  return x;
}

Layout load_layout(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open layout file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_layout(ss.str());
}

std::string format_layout(const Layout& x) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& p : x.pos) out << p[0] << ' ' << p[1] << '\n';
  return out.str();
}

void save_layout(const Layout& x, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write layout file: " + path);
    out << format_layout(x);
  }
  std::filesystem::rename(tmp, path);
}

Layout translate_to_origin(const Layout& x) {
  const int n = x.size();
  if (n == 0) return x;
  double cx = 0, cy = 0;
  for (const auto& p : x.pos) {
    cx += p[0];
    cy += p[1];
  }
  cx /= n;
  cy /= n;
  Layout out;
  out.pos.reserve(n);
  for (const auto& p : x.pos) out.pos.push_back({p[0] - cx, p[1] - cy});
  return out;
}

std::array<std::array<double, 2>, 2> pca_rotation_matrix(const Layout& x) {
  const int n = x.size();
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : x.pos) {
    sxx += p[0] * p[0];
    sxy += p[0] * p[1];
    syy += p[1] * p[1];
  }
  sxx /= n;
  sxy /= n;
  syy /= n;

  // eigen decomposition of [[sxx, sxy], [sxy, syy]]
  const double tr = sxx + syy;
  const double diff = sxx - syy;
  const double disc = std::sqrt(diff * diff + 4 * sxy * sxy);
  const double l1 = (tr + disc) / 2;  // major
  const double l2 = (tr - disc) / 2;
  if (disc < kIsotropyEps || l1 - l2 < kIsotropyEps) return {{{1, 0}, {0, 1}}};

  // eigenvector for the major eigenvalue
  double ex, ey;
  if (std::abs(sxy) > kOrientEps) {
    ex = l1 - syy;
    ey = sxy;
  } else if (sxx >= syy) {
    ex = 1;
    ey = 0;
  } else {
    ex = 0;
    ey = 1;
  }
  const double norm = std::sqrt(ex * ex + ey * ey);
  ex /= norm;
  ey /= norm;
  // resolve the eigenvector sign ambiguity with the third moment along the
  // major axis, so rotated copies of a layout share one canonical form
  // (flipping both axes stays a det(+1) rotation)
  double skew = 0;
  for (const auto& p : x.pos) {
    const double t = p[0] * ex + p[1] * ey;
    skew += t * t * t;
  }
  if (skew < 0) {
    ex = -ex;
    ey = -ey;
  }
  // columns: major eigenvector, then its det(+1) perpendicular
  return {{{ex, -ey}, {ey, ex}}};
}

Layout pca_rotate(const Layout& x) {
  const auto r = pca_rotation_matrix(x);
  Layout out;
  out.pos.reserve(x.pos.size());
  for (const auto& p : x.pos)
    out.pos.push_back({p[0] * r[0][0] + p[1] * r[1][0], p[0] * r[0][1] + p[1] * r[1][1]});
  return out;
}

double optimal_scale_factor(const Layout& x, const DistanceMatrix& d) {
  const int n = x.size();
  double num = 0, den = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dij = d.at(i, j);
      const double e = dist(x.pos[i], x.pos[j]);
      num += e / dij;
      den += e * e / (dij * dij);
    }
  }
  if (den == 0) throw DegenerateLayout("all positions coincide, scale factor undefined");
  return num / den;
}

Layout optimal_rescale(const Layout& x, const DistanceMatrix& d) {
  const double s = optimal_scale_factor(x, d);
  Layout out;
  out.pos.reserve(x.pos.size());
  for (const auto& p : x.pos) out.pos.push_back({p[0] * s, p[1] * s});
  return out;
}

Layout canonicalize(const Layout& x, const DistanceMatrix& d) {
  return optimal_rescale(pca_rotate(translate_to_origin(x)), d);
}

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

}  // namespace

std::optional<Crossing> segment_intersection(const Vec2& p1, const Vec2& p2, const Vec2& p3,
                                             const Vec2& p4) {
  const double d1 = cross(p3, p4, p1);
  const double d2 = cross(p3, p4, p2);
  const double d3 = cross(p1, p2, p3);
  const double d4 = cross(p1, p2, p4);

  // proper crossing requires strictly opposite orientations on both sides;
  // any near-zero orientation (endpoint touch, collinearity) is excluded
  if (std::abs(d1) < kOrientEps || std::abs(d2) < kOrientEps || std::abs(d3) < kOrientEps ||
      std::abs(d4) < kOrientEps)
    return std::nullopt;
  if ((d1 > 0) == (d2 > 0) || (d3 > 0) == (d4 > 0)) return std::nullopt;

  const double t = d1 / (d1 - d2);
  const Vec2 point{p1[0] + t * (p2[0] - p1[0]), p1[1] + t * (p2[1] - p1[1])};

  const double ux = p2[0] - p1[0], uy = p2[1] - p1[1];
  const double vx = p4[0] - p3[0], vy = p4[1] - p3[1];
  const double nu = std::sqrt(ux * ux + uy * uy);
  const double nv = std::sqrt(vx * vx + vy * vy);
  double c = std::abs(ux * vx + uy * vy) / (nu * nv);
  if (c > 1) c = 1;
  return Crossing{point, std::acos(c)};
}

}  // namespace gdraw
