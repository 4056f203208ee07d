#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gdraw {

// Simple undirected connected graph. Node ids are 0..N-1, edges are stored
// with u < v. Immutable after construction.
class Graph {
 public:
  // Validates simplicity (no self-loops, no duplicates) and connectivity.
  static Graph from_edges(int node_count, std::vector<std::pair<int, int>> edges);

  int node_count() const { return n_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int v) const { return nbrs_[v]; }
  bool adjacent(int u, int v) const { return adj_[static_cast<size_t>(u) * n_ + v] != 0; }
  int degree(int v) const { return static_cast<int>(nbrs_[v].size()); }

 private:
  Graph() = default;

  int n_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<uint8_t> adj_;            // N*N, symmetric
  std::vector<std::vector<int>> nbrs_;  // sorted adjacency lists
};

// All-pairs hop distances, exact integers.
class DistanceMatrix {
 public:
  DistanceMatrix(int n, std::vector<int> d) : n_(n), d_(std::move(d)) {}

  int size() const { return n_; }
  int at(int i, int j) const { return d_[static_cast<size_t>(i) * n_ + j]; }

 private:
  int n_;
  std::vector<int> d_;
};

enum class GraphFormat { edge_list, graphml_subset };

Graph load_graph(const std::string& path, GraphFormat format);
Graph parse_edge_list(const std::string& text);
Graph parse_graphml_subset(const std::string& text);

void save_edge_list(const Graph& g, const std::string& path);
std::string format_edge_list(const Graph& g);

// BFS from every source; g is connected by invariant.
DistanceMatrix shortest_paths(const Graph& g);

// Uniform random spanning tree (Pruefer sequence) plus
// floor(extra_edge_fraction * n) distinct random non-tree edges.
Graph random_graph(int n, double extra_edge_fraction, uint64_t seed);

}  // namespace gdraw
