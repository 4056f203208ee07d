#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gdraw/graph.hpp"

namespace gdraw {

using Vec2 = std::array<double, 2>;

// N x 2 straight-line node positions.
struct Layout {
  std::vector<Vec2> pos;

  int size() const { return static_cast<int>(pos.size()); }
  // All coordinates finite and row count matches n (n < 0 skips the count check).
  void validate(int n = -1) const;
};

Layout load_layout(const std::string& path);
void save_layout(const Layout& x, const std::string& path);
std::string format_layout(const Layout& x);
Layout parse_layout(const std::string& text);

// Canonicalization stages: translation, PCA rotation, stress-optimal rescale.
Layout translate_to_origin(const Layout& x);
Layout pca_rotate(const Layout& x);
Layout optimal_rescale(const Layout& x, const DistanceMatrix& d);
Layout canonicalize(const Layout& x, const DistanceMatrix& d);

// The scale factor applied by optimal_rescale:
//   s = (sum |Xi-Xj| / d_ij) / (sum |Xi-Xj|^2 / d_ij^2)   over unordered pairs.
double optimal_scale_factor(const Layout& x, const DistanceMatrix& d);

// 2x2 rotation aligning the first principal component with the x-axis,
// normalized to determinant +1. Identity when the covariance is isotropic
// within 1e-12. Applied as row-vector times matrix.
std::array<std::array<double, 2>, 2> pca_rotation_matrix(const Layout& x);

struct Crossing {
  Vec2 point;
  double acute_angle;  // in (0, pi/2]
};

// Proper interior crossing of open segments p1-p2 and p3-p4. Shared or
// touching endpoints and collinear overlap yield nullopt.
std::optional<Crossing> segment_intersection(const Vec2& p1, const Vec2& p2, const Vec2& p3,
                                             const Vec2& p4);

inline double dist(const Vec2& a, const Vec2& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace gdraw
