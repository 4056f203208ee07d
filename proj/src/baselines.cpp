#include "gdraw/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gdraw/errors.hpp"
#include "gdraw/rng.hpp"
#include "json.hpp"

namespace gdraw {

namespace {
constexpr double kPowerTol = 1e-9;
}

Layout random_layout(int n, uint64_t seed) {
  Rng rng(seed);
  Layout x;
  x.pos.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double a = rng.uniform(-1, 1);
    const double b = rng.uniform(-1, 1);
    x.pos.push_back({a, b});
  }
  return x;
}

Layout pivot_mds(const Graph& g, const DistanceMatrix& d, int pivots, int iters, uint64_t seed) {
  const int n = g.node_count();
  const int p = std::min(pivots, n);
  if (p < 2) throw ArgumentError("pivot_mds needs at least 2 pivots");

  // maxmin pivot selection from a seeded start
  Rng rng(seed);
  std::vector<int> pivot_ids;
  pivot_ids.push_back(static_cast<int>(rng.index(static_cast<uint64_t>(n))));
  std::vector<int> min_dist(n);
  for (int v = 0; v < n; ++v) min_dist[v] = d.at(pivot_ids[0], v);
  while (static_cast<int>(pivot_ids.size()) < p) {
    int best = -1;
    for (int v = 0; v < n; ++v)
      if (best < 0 || min_dist[v] > min_dist[best]) best = v;
    pivot_ids.push_back(best);
    for (int v = 0; v < n; ++v) min_dist[v] = std::min(min_dist[v], d.at(best, v));
  }

  // double-centered squared pivot distances: C is n x p
  std::vector<double> c(static_cast<size_t>(n) * p);
  std::vector<double> col_mean(p, 0), row_mean(n, 0);
  double total = 0;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < p; ++k) {
      const double dd = static_cast<double>(d.at(i, pivot_ids[k]));
      const double sq = dd * dd;
      c[static_cast<size_t>(i) * p + k] = sq;
      col_mean[k] += sq;
      row_mean[i] += sq;
      total += sq;
    }
  }
  for (int k = 0; k < p; ++k) col_mean[k] /= n;
  for (int i = 0; i < n; ++i) row_mean[i] /= p;
  total /= static_cast<double>(n) * p;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < p; ++k)
      c[static_cast<size_t>(i) * p + k] =
          -0.5 * (c[static_cast<size_t>(i) * p + k] - col_mean[k] - row_mean[i] + total);

  // top-2 eigenpairs of B = C^T C (p x p) by power iteration with deflation
  std::vector<double> b(static_cast<size_t>(p) * p, 0);
  for (int a = 0; a < p; ++a)
    for (int e = 0; e < p; ++e) {
      double s = 0;
      for (int i = 0; i < n; ++i)
        s += c[static_cast<size_t>(i) * p + a] * c[static_cast<size_t>(i) * p + e];
      b[static_cast<size_t>(a) * p + e] = s;
    }

  std::vector<std::vector<double>> eigvecs;
  std::vector<double> eigvals;
  for (int comp = 0; comp < 2; ++comp) {
    std::vector<double> v(p);
    for (auto& val : v) val = rng.uniform(-1, 1);
    double lambda = 0;
    for (int it = 0; it < iters; ++it) {
      // deflate previously found components
      for (size_t prev = 0; prev < eigvecs.size(); ++prev) {
        double dot = 0;
        for (int a = 0; a < p; ++a) dot += v[a] * eigvecs[prev][a];
        for (int a = 0; a < p; ++a) v[a] -= dot * eigvecs[prev][a];
      }
      std::vector<double> w(p, 0);
      for (int a = 0; a < p; ++a) {
        double s = 0;
        for (int e = 0; e < p; ++e) s += b[static_cast<size_t>(a) * p + e] * v[e];
        w[a] = s;
      }
      double norm = 0;
      for (const double val : w) norm += val * val;
      norm = std::sqrt(norm);
      if (norm == 0) break;
      double shift = 0;
      for (int a = 0; a < p; ++a) shift += (w[a] / norm - v[a]) * (w[a] / norm - v[a]);
      for (int a = 0; a < p; ++a) v[a] = w[a] / norm;
      lambda = norm;
      if (shift < kPowerTol * kPowerTol) break;
    }
    eigvecs.push_back(v);
    eigvals.push_back(lambda);
  }

  // positions: X = C v / sqrt(sigma), sigma = singular value of C
  Layout x;
  x.pos.assign(n, {0, 0});
  for (int comp = 0; comp < 2; ++comp) {
    const double sigma = std::sqrt(std::max(eigvals[comp], 0.0));
    const double scale = sigma > 1e-12 ? 1.0 / std::sqrt(sigma) : 0.0;
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (int a = 0; a < p; ++a) s += c[static_cast<size_t>(i) * p + a] * eigvecs[comp][a];
      x.pos[i][comp] = s * scale;
    }
  }
  return x;
}

Layout stress_sgd(const Graph& g, const DistanceMatrix& d, const Layout& init, int epochs,
                  uint64_t seed) {
  if (epochs < 1) throw ArgumentError("stress_sgd needs epochs >= 1");
  const int n = g.node_count();
  init.validate(n);

  double max_d = 1;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) max_d = std::max(max_d, static_cast<double>(d.at(i, j)));
  const double eta0 = max_d * max_d;
  const double eta_min = 0.01;

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  Rng rng(seed);
  Layout x = init;
  for (int t = 0; t < epochs; ++t) {
    const double eta = eta0 * std::exp(-t * std::log(eta0 / eta_min) / epochs);
    rng.shuffle(pairs);
    for (const auto& [i, j] : pairs) {
      const double dij = d.at(i, j);
      const double mu = std::min(1.0, eta / (dij * dij));
      const double dx = x.pos[i][0] - x.pos[j][0];
      const double dy = x.pos[i][1] - x.pos[j][1];
      const double len = std::sqrt(dx * dx + dy * dy);
      if (len < 1e-12) continue;
      const double r = mu * (len - dij) / (2 * len);
      x.pos[i][0] -= r * dx;
      x.pos[i][1] -= r * dy;
      x.pos[j][0] += r * dx;
      x.pos[j][1] += r * dy;
    }
  }
  return x;
}

Layout fruchterman_reingold(const Graph& g, const Layout& init, int iters, uint64_t seed) {
  const int n = g.node_count();
  init.validate(n);
  Layout x = init;

  // perturb exactly coincident points so forces are defined
  Rng rng(seed);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (dist(x.pos[i], x.pos[j]) < 1e-12) {
        x.pos[j][0] += rng.uniform(-1e-6, 1e-6);
        x.pos[j][1] += rng.uniform(-1e-6, 1e-6);
      }

  const double area = static_cast<double>(n);
  const double k = std::sqrt(area / n);
  double temp = 0.1 * std::sqrt(area);
  const double cool = temp / (iters + 1);

  std::vector<Vec2> disp(n);
  for (int it = 0; it < iters; ++it) {
    for (auto& v : disp) v = {0, 0};
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double dx = x.pos[i][0] - x.pos[j][0];
        const double dy = x.pos[i][1] - x.pos[j][1];
        const double len = std::max(std::sqrt(dx * dx + dy * dy), 1e-9);
        const double f = k * k / len;  // repulsion
        disp[i][0] += dx / len * f;
        disp[i][1] += dy / len * f;
        disp[j][0] -= dx / len * f;
        disp[j][1] -= dy / len * f;
      }
    }
    for (const auto& [u, v] : g.edges()) {
      const double dx = x.pos[u][0] - x.pos[v][0];
      const double dy = x.pos[u][1] - x.pos[v][1];
      const double len = std::max(std::sqrt(dx * dx + dy * dy), 1e-9);
      const double f = len * len / k;  // attraction
      disp[u][0] -= dx / len * f;
      disp[u][1] -= dy / len * f;
      disp[v][0] += dx / len * f;
      disp[v][1] += dy / len * f;
    }
    for (int i = 0; i < n; ++i) {
      const double len = std::max(std::sqrt(disp[i][0] * disp[i][0] + disp[i][1] * disp[i][1]), 1e-12);
      const double step = std::min(len, temp);
      x.pos[i][0] += disp[i][0] / len * step;
      x.pos[i][1] += disp[i][1] / len * step;
    }
    temp = std::max(temp - cool, 1e-3);
  }
  return x;
}

NamedMethod make_method(const std::string& name) {
  if (name == "pmds")
    return {"pmds", [](const Graph& g, const DistanceMatrix& d, uint64_t seed) {
              return pivot_mds(g, d, 50, 200, seed);
            }};
  if (name == "stress_sgd")
    return {"stress_sgd", [](const Graph& g, const DistanceMatrix& d, uint64_t seed) {
              return stress_sgd(g, d, pivot_mds(g, d, 50, 200, seed), 30, seed);
            }};
  if (name == "fr")
    return {"fr", [](const Graph& g, const DistanceMatrix& d, uint64_t seed) {
              return fruchterman_reingold(g, pivot_mds(g, d, 50, 200, seed), 100, seed);
            }};
  if (name == "random")
    return {"random", [](const Graph& g, const DistanceMatrix&, uint64_t seed) {
              return random_layout(g.node_count(), seed);
            }};
  throw ArgumentError("unknown layout method: " + name);
}

GraphRecord make_graph_record(std::string id, Graph g, uint64_t seed) {
  DistanceMatrix d = shortest_paths(g);
  Layout init = pivot_mds(g, d, 50, 200, Rng::derive_seed(seed, "pmds-init"));
  return GraphRecord{std::move(id), std::move(g), std::move(d), std::move(init)};
}

CollectionEntry make_entry(const Layout& raw, const GraphRecord& rec, const CriterionSpec& spec,
                           const std::string& provenance) {
  const Layout canon = canonicalize(raw, rec.dist);
  const Layout canon_init = canonicalize(rec.init, rec.dist);
  const CriterionValue v = evaluate(spec, canon, rec.graph, rec.dist, &canon_init);
  return CollectionEntry{canon, v.value, stress(canon, rec.dist), provenance};
}

LayoutCollection build_collection(const std::vector<GraphRecord>& graphs,
                                  const CriterionSpec& spec,
                                  const std::vector<NamedMethod>& methods, uint64_t seed) {
  if (methods.empty()) throw ArgumentError("build_collection needs at least one method");
  LayoutCollection out;
  for (const auto& rec : graphs) {
    bool have = false;
    CollectionEntry best;
    std::string err;
    for (const auto& method : methods) {
      try {
        const uint64_t mseed = Rng::derive_seed(seed, method.name + ":" + rec.id);
        CollectionEntry cand = make_entry(method.run(rec.graph, rec.dist, mseed), rec, spec,
                                          method.name);
        if (!have || better_than(cand.value, cand.stress, best.value, best.stress)) {
          best = std::move(cand);
          have = true;
        }
      } catch (const Error& e) {
        err = err.empty() ? (method.name + ": " + e.what()) : err + "; " + method.name + ": " + e.what();
      }
    }
    if (have)
      out.entries.emplace(rec.id, std::move(best));
    else
      out.failures.emplace(rec.id, err);
  }
  return out;
}

std::map<std::string, int> LayoutCollection::composition() const {
  std::map<std::string, int> counts;
  for (const auto& [id, entry] : entries) ++counts[entry.provenance];
  return counts;
}

void save_collection(const LayoutCollection& c, const std::string& manifest_path) {
  namespace fs = std::filesystem;
  const fs::path manifest(manifest_path);
  const fs::path dir = manifest.parent_path().empty() ? "." : manifest.parent_path();
  fs::create_directories(dir);

  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, entry] : c.entries) {
    const std::string file = id + ".layout";
    save_layout(entry.layout, (dir / file).string());
    j[id] = {{"layout", file},
             {"method", entry.provenance},
             {"value", entry.value},
             {"stress", entry.stress}};
  }
  nlohmann::json root{{"version", 1}, {"graphs", j}};
  if (!c.failures.empty()) {
    nlohmann::json f = nlohmann::json::object();
    for (const auto& [id, msg] : c.failures) f[id] = msg;
    root["failures"] = f;
  }
  const std::string tmp = manifest_path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write manifest: " + manifest_path);
    out << root.dump(2) << '\n';
  }
  fs::rename(tmp, manifest_path);
}

LayoutCollection load_collection(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw ParseError("cannot open manifest: " + manifest_path);
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest JSON: ") + e.what());
  }
  const fs::path dir = fs::path(manifest_path).parent_path();
  LayoutCollection c;
  for (const auto& [id, entry] : root.at("graphs").items()) {
    CollectionEntry e;
    e.layout = load_layout((dir / entry.at("layout").get<std::string>()).string());
    e.provenance = entry.at("method").get<std::string>();
    e.value = entry.at("value").get<double>();
    e.stress = entry.at("stress").get<double>();
    c.entries.emplace(id, std::move(e));
  }
  if (root.contains("failures"))
    for (const auto& [id, msg] : root["failures"].items()) c.failures.emplace(id, msg.get<std::string>());
  return c;
}

}  // namespace gdraw
