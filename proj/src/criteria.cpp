#include "gdraw/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gdraw/errors.hpp"
#include "json.hpp"

namespace gdraw {

namespace {
const std::pair<CriterionId, const char*> kNames[] = {
    {CriterionId::stress, "stress"},   {CriterionId::xing, "xing"},
    {CriterionId::xangle, "xangle"},   {CriterionId::iangle, "iangle"},
    {CriterionId::nodeocc, "nodeocc"}, {CriterionId::edgeuni, "edgeuni"},
    {CriterionId::tsne, "tsne"},
};
}

const char* criterion_name(CriterionId id) {
  for (const auto& [cid, name] : kNames)
    if (cid == id) return name;
  throw ArgumentError("unknown criterion id");
}

CriterionId criterion_from_name(const std::string& name) {
  for (const auto& [cid, cname] : kNames)
    if (name == cname) return cid;
  throw ArgumentError("unknown criterion name: " + name);
}

void CriterionSpec::validate() const {
  if (terms.empty()) throw ValidationError("criterion spec needs at least one term");
  for (size_t i = 0; i < terms.size(); ++i) {
    const auto& [id, w] = terms[i];
    if (!std::isfinite(w) || w < 0) throw ValidationError("criterion weight must be finite and >= 0");
    for (size_t j = i + 1; j < terms.size(); ++j)
      if (terms[j].first == id)
        throw ValidationError(std::string("duplicate criterion term: ") + criterion_name(id));
  }
}

CriterionSpec CriterionSpec::combined() {
  return {{{CriterionId::stress, 0.2},
           {CriterionId::xing, 0.05},
           {CriterionId::xangle, 0.1},
           {CriterionId::iangle, 0.1},
           {CriterionId::nodeocc, 0.2},
           {CriterionId::edgeuni, 0.15},
           {CriterionId::tsne, 0.2}},
          Normalization::per_graph_initial};
}

CriterionSpec CriterionSpec::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("criterion spec JSON: ") + e.what());
  }
  CriterionSpec spec;
  if (!j.contains("terms") || !j["terms"].is_object())
    throw ParseError("criterion spec needs an object field \"terms\"");
  // iterate in canonical id order so serialization is deterministic
  for (const auto& [id, name] : kNames)
    if (j["terms"].contains(name)) spec.terms.emplace_back(id, j["terms"][name].get<double>());
  if (j["terms"].size() != spec.terms.size()) throw ParseError("unknown criterion name in \"terms\"");
  if (j.contains("normalization")) {
    const std::string norm = j["normalization"].get<std::string>();
    if (norm == "none")
      spec.normalization = Normalization::none;
    else if (norm == "per_graph_initial")
      spec.normalization = Normalization::per_graph_initial;
    else
      throw ParseError("unknown normalization: " + norm);
  }
  spec.validate();
  return spec;
}

CriterionSpec CriterionSpec::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open criterion spec: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string CriterionSpec::to_json_text() const {
  nlohmann::json terms = nlohmann::json::object();
  for (const auto& [id, w] : this->terms) terms[criterion_name(id)] = w;
  nlohmann::json j{{"terms", terms},
                   {"normalization",
                    normalization == Normalization::none ? "none" : "per_graph_initial"}};
  return j.dump(2);
}

std::string CriterionSpec::label() const {
  if (terms.size() == 1) return criterion_name(terms.front().first);
  return "combined";
}

double stress(const Layout& x, const DistanceMatrix& d) {
  const int n = x.size();
  double total = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dij = d.at(i, j);
      const double diff = dist(x.pos[i], x.pos[j]) - dij;
      total += diff * diff / (dij * dij);
    }
  }
  return total;
}

int crossing_count(const Layout& x, const Graph& g) {
  const auto& edges = g.edges();
  const int m = g.edge_count();
  int count = 0;
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      if (segment_intersection(x.pos[edges[a].first], x.pos[edges[a].second],
                               x.pos[edges[b].first], x.pos[edges[b].second]))
        ++count;
    }
  }
  return count;
}

double crossing_angle_penalty(const Layout& x, const Graph& g) {
  const auto& edges = g.edges();
  const int m = g.edge_count();
  double total = 0;
  int crossings = 0;
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      const auto hit = segment_intersection(x.pos[edges[a].first], x.pos[edges[a].second],
                                            x.pos[edges[b].first], x.pos[edges[b].second]);
      if (hit) {
        total += (M_PI / 2 - hit->acute_angle) / (M_PI / 2);
        ++crossings;
      }
    }
  }
  return crossings == 0 ? 0.0 : total / crossings;
}

double angular_resolution_penalty(const Layout& x, const Graph& g) {
  const int n = g.node_count();
  double total = 0;
  int counted = 0;
  std::vector<double> angles;
  for (int v = 0; v < n; ++v) {
    const auto& nbrs = g.neighbors(v);
    const int deg = static_cast<int>(nbrs.size());
    if (deg < 2) continue;
    angles.clear();
    for (const int w : nbrs)
      angles.push_back(std::atan2(x.pos[w][1] - x.pos[v][1], x.pos[w][0] - x.pos[v][0]));
    std::sort(angles.begin(), angles.end());
    double min_gap = 2 * M_PI - (angles.back() - angles.front());
    for (int i = 1; i < deg; ++i) min_gap = std::min(min_gap, angles[i] - angles[i - 1]);
    const double ideal = 2 * M_PI / deg;
    total += (ideal - min_gap) / ideal;
    ++counted;
  }
  return counted == 0 ? 0.0 : total / counted;
}

int node_occlusion(const Layout& x, double radius) {
  if (radius <= 0) throw ArgumentError("node_occlusion radius must be > 0");
  const int n = x.size();
  int count = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (dist(x.pos[i], x.pos[j]) < radius) ++count;
  return count;
}

double edge_uniformity(const Layout& x, const Graph& g) {
  const auto& edges = g.edges();
  double sum = 0;
  for (const auto& [u, v] : edges) sum += dist(x.pos[u], x.pos[v]);
  const double mean = sum / edges.size();
  if (mean <= 0) throw DegenerateLayout("mean edge length is zero");
  double var = 0;
  for (const auto& [u, v] : edges) {
    const double diff = dist(x.pos[u], x.pos[v]) - mean;
    var += diff * diff;
  }
  var /= edges.size();  // population variance
  return std::sqrt(var) / mean;
}

double tsne_divergence(const Layout& x, const DistanceMatrix& d) {
  const int n = x.size();
  if (n < 3) throw ArgumentError("tsne_divergence needs N >= 3");

  double mean_d = 0;
  const int pairs = n * (n - 1) / 2;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) mean_d += d.at(i, j);
  mean_d /= pairs;
  const double sigma2 = mean_d * mean_d;

  std::vector<double> p, q;
  p.reserve(pairs);
  q.reserve(pairs);
  double psum = 0, qsum = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dij = d.at(i, j);
      const double pij = std::exp(-dij * dij / (2 * sigma2));
      const double e = dist(x.pos[i], x.pos[j]);
      const double qij = 1.0 / (1.0 + e * e);
      p.push_back(pij);
      q.push_back(qij);
      psum += pij;
      qsum += qij;
    }
  }
  double kl = 0;
  for (int k = 0; k < pairs; ++k) {
    const double pk = p[k] / psum;
    const double qk = q[k] / qsum;
    if (pk > 0) {
      if (qk <= 0) throw DegenerateLayout("q_ij underflowed to zero with p_ij > 0");
      kl += pk * std::log(pk / qk);
    }
  }
  return kl;
}

namespace {

double raw_criterion(CriterionId id, const Layout& x, const Graph& g, const DistanceMatrix& d) {
  switch (id) {
    case CriterionId::stress:
      return stress(x, d);
    case CriterionId::xing:
      return crossing_count(x, g);
    case CriterionId::xangle:
      return crossing_angle_penalty(x, g);
    case CriterionId::iangle:
      return angular_resolution_penalty(x, g);
    case CriterionId::nodeocc:
      return node_occlusion(x);
    case CriterionId::edgeuni:
      return edge_uniformity(x, g);
    case CriterionId::tsne:
      return tsne_divergence(x, d);
  }
  throw ArgumentError("unknown criterion id");
}

}  // namespace

CriterionValue evaluate(const CriterionSpec& spec, const Layout& x, const Graph& g,
                        const DistanceMatrix& d, const Layout* init) {
  spec.validate();
  if (spec.normalization == Normalization::per_graph_initial && init == nullptr)
    throw MissingInitialLayout("per_graph_initial normalization requires an initial layout");

  CriterionValue result;
  for (const auto& [id, w] : spec.terms) {
    const double raw = raw_criterion(id, x, g, d);
    result.components[id] = raw;
    double norm = raw;
    if (spec.normalization == Normalization::per_graph_initial) {
      const double base = raw_criterion(id, *init, g, d);
      norm = raw / std::max(base, 1e-9);
    }
    result.value += w * norm;
  }
  return result;
}

bool better_than(double value_a, double stress_a, double value_b, double stress_b) {
  if (std::abs(value_a - value_b) <= 1e-12) return stress_a < stress_b;
  return value_a < value_b;
}

}  // namespace gdraw
