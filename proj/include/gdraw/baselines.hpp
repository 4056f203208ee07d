#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gdraw/criteria.hpp"
#include "gdraw/geometry.hpp"
#include "gdraw/graph.hpp"

namespace gdraw {

// Sampling-based approximation of classical MDS; paper-default constants.
Layout pivot_mds(const Graph& g, const DistanceMatrix& d, int pivots = 50, int iters = 200,
                 uint64_t seed = 0);

// Pairwise stress descent: each epoch visits all unordered pairs in shuffled
// order with step mu = min(1, eta_t / d_ij^2), eta annealed exponentially
// from max d^2 down to 0.01.
Layout stress_sgd(const Graph& g, const DistanceMatrix& d, const Layout& init, int epochs,
                  uint64_t seed);

Layout fruchterman_reingold(const Graph& g, const Layout& init, int iters, uint64_t seed);

// Uniform random positions in [-1, 1]^2; used for seeding and benchmarks.
Layout random_layout(int n, uint64_t seed);

using LayoutMethod = std::function<Layout(const Graph&, const DistanceMatrix&, uint64_t seed)>;

struct NamedMethod {
  std::string name;
  LayoutMethod run;
};

// The built-in method pool keyed by CLI names: pmds, stress_sgd, fr, random.
NamedMethod make_method(const std::string& name);

struct CollectionEntry {
  Layout layout;  // stored canonicalized
  double value = 0;
  double stress = 0;
  std::string provenance;
};

struct LayoutCollection {
  std::map<std::string, CollectionEntry> entries;            // graph id -> best
  std::map<std::string, std::string> failures;               // graph id -> error
  std::map<std::string, int> composition() const;            // method -> win count
};

struct GraphRecord {
  std::string id;
  Graph graph;
  DistanceMatrix dist;
  Layout init;  // PivotMDS layout; generator input and normalization baseline
};

// Computes distances and the PivotMDS initial layout for a graph.
GraphRecord make_graph_record(std::string id, Graph g, uint64_t seed);

// Per graph, runs every method, canonicalizes, evaluates the criterion and
// keeps the better_than winner. Layouts for per_graph_initial normalization
// are judged against the PivotMDS layout of the same graph.
LayoutCollection build_collection(const std::vector<GraphRecord>& graphs,
                                  const CriterionSpec& spec,
                                  const std::vector<NamedMethod>& methods, uint64_t seed);

// Evaluates one canonicalized candidate the way build_collection does.
CollectionEntry make_entry(const Layout& raw, const GraphRecord& rec, const CriterionSpec& spec,
                           const std::string& provenance);

// Manifest JSON + layout files in the manifest's directory.
void save_collection(const LayoutCollection& c, const std::string& manifest_path);
LayoutCollection load_collection(const std::string& manifest_path);

}  // namespace gdraw
