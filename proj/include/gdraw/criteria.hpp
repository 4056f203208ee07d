#pragma once

#include <map>
#include <string>
#include <vector>

#include "gdraw/geometry.hpp"
#include "gdraw/graph.hpp"

namespace gdraw {

// Aesthetic criteria, all with a lower-is-better convention.
enum class CriterionId { stress, xing, xangle, iangle, nodeocc, edgeuni, tsne };

const char* criterion_name(CriterionId id);
CriterionId criterion_from_name(const std::string& name);

enum class Normalization { none, per_graph_initial };

struct CriterionSpec {
  std::vector<std::pair<CriterionId, double>> terms;
  Normalization normalization = Normalization::none;

  void validate() const;
  static CriterionSpec single(CriterionId id) { return {{{id, 1.0}}, Normalization::none}; }
  // The seven-way combination with its default weights.
  static CriterionSpec combined();

  static CriterionSpec from_json_text(const std::string& text);
  static CriterionSpec load(const std::string& path);
  std::string to_json_text() const;

  // Display name: the criterion name for a single-term spec, "combined"
  // otherwise.
  std::string label() const;
};

struct CriterionValue {
  double value = 0;
  std::map<CriterionId, double> components;  // raw (unnormalized) values
};

double stress(const Layout& x, const DistanceMatrix& d);
int crossing_count(const Layout& x, const Graph& g);
double crossing_angle_penalty(const Layout& x, const Graph& g);
double angular_resolution_penalty(const Layout& x, const Graph& g);
int node_occlusion(const Layout& x, double radius = 0.1);
double edge_uniformity(const Layout& x, const Graph& g);
double tsne_divergence(const Layout& x, const DistanceMatrix& d);

// Weighted combination. init is required when normalization is
// per_graph_initial; each term is divided by max(value on init, 1e-9).
CriterionValue evaluate(const CriterionSpec& spec, const Layout& x, const Graph& g,
                        const DistanceMatrix& d, const Layout* init = nullptr);

// Strict "a beats b" with stress tiebreak on near-equal values.
bool better_than(double value_a, double stress_a, double value_b, double stress_b);

}  // namespace gdraw
