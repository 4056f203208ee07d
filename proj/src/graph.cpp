#include "gdraw/graph.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gdraw/errors.hpp"
#include "gdraw/rng.hpp"

namespace gdraw {

Graph Graph::from_edges(int node_count, std::vector<std::pair<int, int>> edges) {
  if (node_count < 2) throw ValidationError("graph must have at least 2 nodes");

  Graph g;
  g.n_ = node_count;
  g.adj_.assign(static_cast<size_t>(node_count) * node_count, 0);
  g.nbrs_.resize(node_count);

  for (auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= node_count || v >= node_count)
      throw ValidationError("edge endpoint out of range: (" + std::to_string(u) + ", " +
                            std::to_string(v) + ")");
    if (u == v) throw ValidationError("self-loop at node " + std::to_string(u));
    if (u > v) std::swap(u, v);
    auto& cell = g.adj_[static_cast<size_t>(u) * node_count + v];
    if (cell) throw ValidationError("duplicate edge (" + std::to_string(u) + ", " +
                                    std::to_string(v) + ")");
    cell = 1;
    g.adj_[static_cast<size_t>(v) * node_count + u] = 1;
    g.nbrs_[u].push_back(v);
    g.nbrs_[v].push_back(u);
  }
  std::sort(edges.begin(), edges.end());
  g.edges_ = std::move(edges);
  for (auto& nb : g.nbrs_) std::sort(nb.begin(), nb.end());

  // connectivity
  std::vector<uint8_t> seen(node_count, 0);
  std::deque<int> queue{0};
  seen[0] = 1;
  int reached = 1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (const int w : g.nbrs_[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        queue.push_back(w);
      }
    }
  }
  if (reached != node_count) throw ValidationError("graph is disconnected");
  return g;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Graph parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int n = -1, m = -1;
  std::vector<std::pair<int, int>> raw;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    if (n < 0) {
      if (!(ls >> n >> m) || n < 0 || m < 0)
        throw ParseError("line " + std::to_string(line_no) + ": expected header \"N M\"");
      continue;
    }
    int u, v;
    if (!(ls >> u >> v))
      throw ParseError("line " + std::to_string(line_no) + ": expected \"u v\"");
    raw.emplace_back(u, v);
  }
  if (n < 0) throw ParseError("empty edge list file");
  if (static_cast<int>(raw.size()) != m)
    throw ParseError("header declares " + std::to_string(m) + " edges, found " +
                     std::to_string(raw.size()));

  // compact ids in first-appearance order; ids already dense in 0..N-1 are
  // kept as-is so formatting and re-parsing round-trips exactly
  std::map<int, int> remap;
  std::vector<int> order;
  for (const auto& [u, v] : raw) {
    for (const int id : {u, v}) {
      if (remap.emplace(id, static_cast<int>(order.size())).second) order.push_back(id);
    }
  }
  if (static_cast<int>(remap.size()) > n)
    throw ParseError("more distinct node ids than declared N");
  bool dense = true;
  for (const auto& [id, slot] : remap)
    if (id < 0 || id >= n) dense = false;
  std::vector<std::pair<int, int>> edges;
  edges.reserve(raw.size());
  for (const auto& [u, v] : raw)
    edges.emplace_back(dense ? u : remap[u], dense ? v : remap[v]);
  return Graph::from_edges(n, std::move(edges));
}

namespace {

// Minimal attribute scanner for one XML tag body.
std::string xml_attr(const std::string& tag, const std::string& name) {
  const std::string needle = name + "=";
  size_t pos = 0;
  while ((pos = tag.find(needle, pos)) != std::string::npos) {
    // require attribute-name boundary
    if (pos > 0 && (std::isalnum(static_cast<unsigned char>(tag[pos - 1])) || tag[pos - 1] == ':' ||
                    tag[pos - 1] == '_')) {
      pos += needle.size();
      continue;
    }
    size_t q = pos + needle.size();
    if (q >= tag.size() || (tag[q] != '"' && tag[q] != '\'')) throw ParseError("malformed attribute in <" + tag + ">");
    const char quote = tag[q];
    const size_t end = tag.find(quote, q + 1);
    if (end == std::string::npos) throw ParseError("unterminated attribute in <" + tag + ">");
    return tag.substr(q + 1, end - q - 1);
  }
  throw ParseError("missing attribute '" + name + "' in <" + tag + ">");
}

}  // namespace

Graph parse_graphml_subset(const std::string& text) {
  std::map<std::string, int> remap;
  std::vector<std::pair<int, int>> edges;
  auto node_id = [&](const std::string& s) {
    const auto [it, inserted] = remap.emplace(s, static_cast<int>(remap.size()));
    return it->second;
  };

  size_t pos = 0;
  while ((pos = text.find('<', pos)) != std::string::npos) {
    const size_t end = text.find('>', pos);
    if (end == std::string::npos) throw ParseError("unterminated XML tag");
    std::string tag = text.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag.empty() || tag[0] == '/' || tag[0] == '?' || tag[0] == '!') continue;
    // strip namespace prefix on the element name
    const size_t sp = tag.find_first_of(" \t\n\r/");
    std::string name = tag.substr(0, sp);
    if (const size_t colon = name.find(':'); colon != std::string::npos) name = name.substr(colon + 1);
    if (name == "node") {
      node_id(xml_attr(tag, "id"));
    } else if (name == "edge") {
      const int u = node_id(xml_attr(tag, "source"));
      const int v = node_id(xml_attr(tag, "target"));
      edges.emplace_back(u, v);
    }
  }
  if (remap.empty()) throw ParseError("no <node> elements found");
  return Graph::from_edges(static_cast<int>(remap.size()), std::move(edges));
}

Graph load_graph(const std::string& path, GraphFormat format) {
  const std::string text = read_file(path);
  switch (format) {
    case GraphFormat::edge_list:
      return parse_edge_list(text);
    case GraphFormat::graphml_subset:
      return parse_graphml_subset(text);
  }
  throw ArgumentError("unknown graph format");
}

std::string format_edge_list(const Graph& g) {
  std::ostringstream out;
  out << g.node_count() << ' ' << g.edge_count() << '\n';
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
  return out.str();
}

void save_edge_list(const Graph& g, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << format_edge_list(g);
  }
  std::filesystem::rename(tmp, path);
}

DistanceMatrix shortest_paths(const Graph& g) {
  const int n = g.node_count();
  std::vector<int> d(static_cast<size_t>(n) * n, -1);
  std::deque<int> queue;
  for (int src = 0; src < n; ++src) {
    int* row = d.data() + static_cast<size_t>(src) * n;
    row[src] = 0;
    queue.clear();
    queue.push_back(src);
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (const int w : g.neighbors(v)) {
        if (row[w] < 0) {
          row[w] = row[v] + 1;
          queue.push_back(w);
        }
      }
    }
  }
  return DistanceMatrix(n, std::move(d));
}

Graph random_graph(int n, double extra_edge_fraction, uint64_t seed) {
  if (n < 2) throw ArgumentError("random_graph needs n >= 2");
  if (extra_edge_fraction < 0) throw ArgumentError("extra_edge_fraction must be >= 0");

  const long max_edges = static_cast<long>(n) * (n - 1) / 2;
  const long extra = static_cast<long>(extra_edge_fraction * n);
  if (extra > max_edges - (n - 1))
    throw ArgumentError("requested extra edges exceed the simple-graph capacity");

  Rng rng(seed);
  std::set<std::pair<int, int>> edge_set;
  auto canon = [](int u, int v) { return u < v ? std::make_pair(u, v) : std::make_pair(v, u); };

  if (n == 2) {
    edge_set.insert({0, 1});
  } else {
    // uniform labeled tree via a random Pruefer sequence
    std::vector<int> pruefer(n - 2);
    for (auto& p : pruefer) p = static_cast<int>(rng.index(static_cast<uint64_t>(n)));
    std::vector<int> deg(n, 1);
    for (const int p : pruefer) ++deg[p];
    std::set<int> leaves;
    for (int v = 0; v < n; ++v)
      if (deg[v] == 1) leaves.insert(v);
    for (const int p : pruefer) {
      const int leaf = *leaves.begin();
      leaves.erase(leaves.begin());
      edge_set.insert(canon(leaf, p));
      if (--deg[p] == 1) leaves.insert(p);
    }
    const int a = *leaves.begin();
    const int b = *std::next(leaves.begin());
    edge_set.insert(canon(a, b));
  }

  long added = 0;
  while (added < extra) {
    const int u = static_cast<int>(rng.index(static_cast<uint64_t>(n)));
    const int v = static_cast<int>(rng.index(static_cast<uint64_t>(n)));
    if (u == v) continue;
    if (edge_set.insert(canon(u, v)).second) ++added;
  }

  return Graph::from_edges(n, {edge_set.begin(), edge_set.end()});
}

}  // namespace gdraw
