#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "gdraw/criteria.hpp"
#include "gdraw/errors.hpp"
#include "gdraw/graph.hpp"
#include "gdraw/rng.hpp"

using namespace gdraw;

namespace {

Layout random_points(int n, Rng& rng, double span = 5) {
  Layout x;
  for (int i = 0; i < n; ++i) {
    const double a = rng.uniform(-span, span);
    const double b = rng.uniform(-span, span);
    x.pos.push_back({a, b});
  }
  return x;
}

// Independent crossing oracle using determinant signs only.
int crossing_oracle(const Layout& x, const Graph& g) {
  auto side = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const double v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    if (std::abs(v) < 1e-12) return 0;
    return v > 0 ? 1 : -1;
  };
  const auto& e = g.edges();
  int count = 0;
  for (size_t a = 0; a < e.size(); ++a)
    for (size_t b = a + 1; b < e.size(); ++b) {
      const Vec2 &p1 = x.pos[e[a].first], &p2 = x.pos[e[a].second];
      const Vec2 &p3 = x.pos[e[b].first], &p4 = x.pos[e[b].second];
      const int s1 = side(p3, p4, p1), s2 = side(p3, p4, p2);
      const int s3 = side(p1, p2, p3), s4 = side(p1, p2, p4);
      if (s1 && s2 && s3 && s4 && s1 != s2 && s3 != s4) ++count;
    }
  return count;
}

Layout rigid_transform(const Layout& x, double theta, double tx, double ty, double scale = 1) {
  Layout y;
  for (const auto& p : x.pos)
    y.pos.push_back({scale * (p[0] * std::cos(theta) - p[1] * std::sin(theta)) + tx,
                     scale * (p[0] * std::sin(theta) + p[1] * std::cos(theta)) + ty});
  return y;
}

}  // namespace

TEST_CASE("stress: perfect embeddings score zero") {
  const Graph path3 = Graph::from_edges(3, {{0, 1}, {1, 2}});
  const DistanceMatrix d = shortest_paths(path3);
  CHECK(stress(Layout{{{0, 0}, {1, 0}, {2, 0}}}, d) == doctest::Approx(0).epsilon(1e-15));

  const Graph k3 = Graph::from_edges(3, {{0, 1}, {0, 2}, {1, 2}});
  const DistanceMatrix dk = shortest_paths(k3);
  const Layout tri{{{0, 0}, {1, 0}, {0.5, std::sqrt(3) / 2}}};
  CHECK(stress(tri, dk) < 1e-15);
}

TEST_CASE("stress: hand-computed value") {
  const Graph path3 = Graph::from_edges(3, {{0, 1}, {1, 2}});
  const DistanceMatrix d = shortest_paths(path3);
  // terms: (1-1)^2/1 + (0.5-1)^2/1 + (1.5-2)^2/4 = 0.25 + 0.0625
  CHECK(stress(Layout{{{0, 0}, {1, 0}, {1.5, 0}}}, d) == doctest::Approx(0.3125).epsilon(1e-12));
}

TEST_CASE("crossing_count on 4-cycles") {
  const Graph c4 = Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  CHECK(crossing_count(Layout{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}, c4) == 0);
  CHECK(crossing_count(Layout{{{0, 0}, {1, 1}, {1, 0}, {0, 1}}}, c4) == 1);
}

TEST_CASE("crossing_count matches oracle on 200 random cases") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 4 + static_cast<int>(rng.index(17));
    const Graph g = random_graph(n, 0.6, 7000 + trial);
    const Layout x = random_points(n, rng);
    REQUIRE(crossing_count(x, g) == crossing_oracle(x, g));
  }
}

TEST_CASE("crossing_angle_penalty: perpendicular and 45 degrees") {
  // path 0-1-2-3; edges sharing an endpoint never count as crossings, so the
  // only candidate pair is (0,1) x (2,3)
  const Graph g = Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
  CHECK(crossing_angle_penalty(Layout{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}}, g) ==
        doctest::Approx(0).epsilon(1e-12));
  // crossing at 45 degrees: penalty (pi/2 - pi/4)/(pi/2) = 0.5
  CHECK(crossing_angle_penalty(Layout{{{-1, 0}, {1, 0}, {-1, -1}, {1, 1}}}, g) ==
        doctest::Approx(0.5).epsilon(1e-12));
  // no crossings at all
  CHECK(crossing_angle_penalty(Layout{{{0, 0}, {1, 0}, {0, 1}, {1, 1}}}, g) == 0);
}

TEST_CASE("crossing_angle_penalty equals recomputation from intersections") {
  Rng rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 6 + static_cast<int>(rng.index(10));
    const Graph g = random_graph(n, 0.7, 7100 + trial);
    const Layout x = random_points(n, rng);
    double total = 0;
    int count = 0;
    const auto& e = g.edges();
    for (size_t a = 0; a < e.size(); ++a)
      for (size_t b = a + 1; b < e.size(); ++b)
        if (const auto hit = segment_intersection(x.pos[e[a].first], x.pos[e[a].second],
                                                  x.pos[e[b].first], x.pos[e[b].second])) {
          total += (M_PI / 2 - hit->acute_angle) / (M_PI / 2);
          ++count;
        }
    const double expected = count ? total / count : 0;
    CHECK(crossing_angle_penalty(x, g) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("angular resolution: ideal star and collinear degree-2") {
  const Graph star = Graph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  const Layout x{{{0, 0}, {1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
  CHECK(angular_resolution_penalty(x, star) == doctest::Approx(0).epsilon(1e-12));

  const Graph path3 = Graph::from_edges(3, {{0, 1}, {1, 2}});
  const Layout line{{{-1, 0}, {0, 0}, {1, 0}}};
  CHECK(angular_resolution_penalty(line, path3) == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("angular resolution matches sorted-angle oracle") {
  Rng rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5 + static_cast<int>(rng.index(12));
    const Graph g = random_graph(n, 0.5, 7200 + trial);
    const Layout x = random_points(n, rng);
    double total = 0;
    int counted = 0;
    for (int v = 0; v < n; ++v) {
      if (g.degree(v) < 2) continue;
      std::vector<double> angles;
      for (const int w : g.neighbors(v))
        angles.push_back(std::atan2(x.pos[w][1] - x.pos[v][1], x.pos[w][0] - x.pos[v][0]));
      std::sort(angles.begin(), angles.end());
      double min_gap = angles.front() + 2 * M_PI - angles.back();
      for (size_t i = 1; i < angles.size(); ++i)
        min_gap = std::min(min_gap, angles[i] - angles[i - 1]);
      const double ideal = 2 * M_PI / g.degree(v);
      total += (ideal - min_gap) / ideal;
      ++counted;
    }
    const double expected = counted ? total / counted : 0;
    CHECK(angular_resolution_penalty(x, g) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("node_occlusion") {
  CHECK(node_occlusion(Layout{{{0, 0}, {0.05, 0}}}, 0.1) == 1);
  CHECK(node_occlusion(Layout{{{0, 0}, {1, 0}, {0, 1}, {1, 1}}}, 0.1) == 0);
  CHECK_THROWS_AS(node_occlusion(Layout{{{0, 0}}}, 0.0), ArgumentError);

  Rng rng(34);
  const Layout x = random_points(30, rng, 0.4);
  int oracle = 0;
  for (int i = 0; i < 30; ++i)
    for (int j = i + 1; j < 30; ++j)
      if (dist(x.pos[i], x.pos[j]) < 0.1) ++oracle;
  CHECK(node_occlusion(x, 0.1) == oracle);
}

TEST_CASE("edge_uniformity") {
  const Graph k3 = Graph::from_edges(3, {{0, 1}, {0, 2}, {1, 2}});
  const Layout tri{{{0, 0}, {1, 0}, {0.5, std::sqrt(3) / 2}}};
  CHECK(edge_uniformity(tri, k3) == doctest::Approx(0).epsilon(1e-12));

  // edge lengths {1, 1, 2}: population std / mean = sqrt(2/9)/(4/3)
  const Graph p4 = Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
  const Layout x{{{0, 0}, {1, 0}, {2, 0}, {4, 0}}};
  CHECK(edge_uniformity(x, p4) == doctest::Approx(std::sqrt(2.0 / 9.0) / (4.0 / 3.0)).epsilon(1e-12));

  // scale invariance
  Layout scaled = x;
  for (auto& p : scaled.pos) {
    p[0] *= 7.3;
    p[1] *= 7.3;
  }
  CHECK(edge_uniformity(scaled, p4) == doctest::Approx(edge_uniformity(x, p4)).epsilon(1e-12));

  const Layout degenerate{{{0, 0}, {0, 0}, {0, 0}, {0, 0}}};
  CHECK_THROWS_AS(edge_uniformity(degenerate, p4), DegenerateLayout);
}

TEST_CASE("tsne_divergence: nonnegative and matches naive summation") {
  Rng rng(35);
  const Graph g = random_graph(5, 0.5, 77);
  const DistanceMatrix d = shortest_paths(g);
  const Layout x = random_points(5, rng);

  // independent two-loop oracle
  const int n = 5;
  double mean_d = 0;
  int pairs = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      mean_d += d.at(i, j);
      ++pairs;
    }
  mean_d /= pairs;
  double psum = 0, qsum = 0;
  std::vector<double> p, q;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double pij = std::exp(-d.at(i, j) * d.at(i, j) / (2 * mean_d * mean_d));
      const double e2 = std::pow(dist(x.pos[i], x.pos[j]), 2);
      p.push_back(pij);
      q.push_back(1 / (1 + e2));
      psum += p.back();
      qsum += q.back();
    }
  double kl = 0;
  for (int k = 0; k < pairs; ++k) kl += (p[k] / psum) * std::log((p[k] / psum) / (q[k] / qsum));
  CHECK(tsne_divergence(x, d) == doctest::Approx(kl).epsilon(1e-10));

  for (int trial = 0; trial < 100; ++trial) {
    const int m = 4 + static_cast<int>(rng.index(10));
    const Graph h = random_graph(m, 0.4, 600 + trial);
    const DistanceMatrix dh = shortest_paths(h);
    CHECK(tsne_divergence(random_points(m, rng), dh) >= -1e-12);
  }
}

TEST_CASE("rigid invariance and scale behavior of criteria") {
  Rng rng(36);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 8 + static_cast<int>(rng.index(8));
    const Graph g = random_graph(n, 0.5, 800 + trial);
    const DistanceMatrix d = shortest_paths(g);
    const Layout x = random_points(n, rng);
    const Layout y = rigid_transform(x, rng.uniform(0, 2 * M_PI), rng.uniform(-5, 5),
                                     rng.uniform(-5, 5));

    CHECK(stress(y, d) == doctest::Approx(stress(x, d)).epsilon(1e-9));
    CHECK(crossing_count(y, g) == crossing_count(x, g));
    CHECK(crossing_angle_penalty(y, g) ==
          doctest::Approx(crossing_angle_penalty(x, g)).epsilon(1e-9));
    CHECK(angular_resolution_penalty(y, g) ==
          doctest::Approx(angular_resolution_penalty(x, g)).epsilon(1e-9));
    CHECK(node_occlusion(y) == node_occlusion(x));
    CHECK(edge_uniformity(y, g) == doctest::Approx(edge_uniformity(x, g)).epsilon(1e-9));

    // xing/xangle/iangle/edgeuni are scale invariant; stress is not
    const Layout z = rigid_transform(x, 0, 0, 0, 3.0);
    CHECK(crossing_count(z, g) == crossing_count(x, g));
    CHECK(crossing_angle_penalty(z, g) ==
          doctest::Approx(crossing_angle_penalty(x, g)).epsilon(1e-9));
    CHECK(angular_resolution_penalty(z, g) ==
          doctest::Approx(angular_resolution_penalty(x, g)).epsilon(1e-9));
    CHECK(edge_uniformity(z, g) == doctest::Approx(edge_uniformity(x, g)).epsilon(1e-9));
  }
}

TEST_CASE("evaluate: weighted sums and normalization") {
  Rng rng(37);
  const Graph g = random_graph(10, 0.5, 900);
  const DistanceMatrix d = shortest_paths(g);
  const Layout x = random_points(10, rng);

  const CriterionSpec stress_only = CriterionSpec::single(CriterionId::stress);
  CHECK(evaluate(stress_only, x, g, d).value == doctest::Approx(stress(x, d)).epsilon(1e-12));

  CriterionSpec two{{{CriterionId::stress, 1.0}, {CriterionId::xing, 0.2}}, Normalization::none};
  CHECK(evaluate(two, x, g, d).value ==
        doctest::Approx(stress(x, d) + 0.2 * crossing_count(x, g)).epsilon(1e-12));

  // on the init layout itself, per_graph_initial gives sum of weights
  CriterionSpec combined = CriterionSpec::combined();
  const Layout canon = canonicalize(x, d);
  if (crossing_count(canon, g) > 0 && node_occlusion(canon) > 0) {
    const CriterionValue v = evaluate(combined, canon, g, d, &canon);
    double weight_sum = 0;
    for (const auto& [id, w] : combined.terms) weight_sum += w;
    CHECK(v.value == doctest::Approx(weight_sum).epsilon(1e-9));
  }

  CHECK_THROWS_AS(evaluate(combined, x, g, d, nullptr), MissingInitialLayout);

  // linearity in weights
  CriterionSpec doubled = two;
  for (auto& [id, w] : doubled.terms) w *= 2;
  CHECK(evaluate(doubled, x, g, d).value ==
        doctest::Approx(2 * evaluate(two, x, g, d).value).epsilon(1e-12));
}

TEST_CASE("evaluate records raw components") {
  Rng rng(38);
  const Graph g = random_graph(8, 0.5, 901);
  const DistanceMatrix d = shortest_paths(g);
  const Layout x = random_points(8, rng);
  const CriterionValue v = evaluate(CriterionSpec::combined(), canonicalize(x, d), g, d, &x);
  CHECK(v.components.size() == 7);
  CHECK(v.components.at(CriterionId::xing) == crossing_count(canonicalize(x, d), g));
}

TEST_CASE("better_than: strict with stress tiebreak") {
  CHECK(better_than(3.0, 9.0, 4.0, 1.0));
  CHECK_FALSE(better_than(4.0, 1.0, 3.0, 9.0));
  CHECK(better_than(2.0, 5.0, 2.0, 7.0));
  CHECK_FALSE(better_than(2.0, 7.0, 2.0, 5.0));
  CHECK_FALSE(better_than(2.0, 5.0, 2.0, 5.0));
}

TEST_CASE("criterion spec JSON round trip and validation") {
  const CriterionSpec spec = CriterionSpec::from_json_text(
      R"({"terms": {"stress": 0.2, "xing": 0.05}, "normalization": "per_graph_initial"})");
  CHECK(spec.terms.size() == 2);
  CHECK(spec.normalization == Normalization::per_graph_initial);
  const CriterionSpec round = CriterionSpec::from_json_text(spec.to_json_text());
  CHECK(round.terms == spec.terms);

  CHECK_THROWS_AS(CriterionSpec::from_json_text(R"({"terms": {}})"), ValidationError);
  CHECK_THROWS_AS(CriterionSpec::from_json_text(R"({"terms": {"bogus": 1}})"), ParseError);
  CHECK_THROWS_AS(CriterionSpec::from_json_text("not json"), ParseError);

  const CriterionSpec combined = CriterionSpec::combined();
  double sum = 0;
  for (const auto& [id, w] : combined.terms) sum += w;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}
