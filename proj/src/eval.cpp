#include "gdraw/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "gdraw/errors.hpp"
#include "gdraw/rng.hpp"
#include "json.hpp"

namespace gdraw {

double spc(double lambda_f, double lambda_b) {
  if (lambda_f < 0 || lambda_b < 0) throw ArgumentError("spc arguments must be nonnegative");
  if (lambda_f == 0 && lambda_b == 0) return 0.0;
  return 100.0 * (lambda_f - lambda_b) / std::max(lambda_f, lambda_b);
}

double average_spc(const std::vector<double>& per_graph) {
  if (per_graph.empty()) throw EmptyTestSet("average_spc over an empty list");
  double sum = 0;
  for (const double v : per_graph) sum += v;
  return sum / per_graph.size();
}

const SpcCell& SpcReport::cell(const std::string& model, const std::string& benchmark,
                               const std::string& criterion) const {
  for (const auto& c : cells)
    if (c.model == model && c.benchmark == benchmark && c.criterion == criterion) return c;
  throw ArgumentError("no cell for (" + model + ", " + benchmark + ", " + criterion + ")");
}

std::string SpcReport::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  for (const auto& crit : criteria) {
    out << "criterion," << crit << '\n';
    out << "benchmark";
    for (const auto& m : models) out << ',' << m;
    out << '\n';
    for (const auto& b : benchmarks) {
      out << b;
      for (const auto& m : models) {
        const auto& c = cell(m, b, crit);
        out << ',' << c.average;
        if (c.flagged) out << " (flagged)";
      }
      out << '\n';
    }
    out << '\n';
  }
  out << "absolute means\nmethod,criterion,mean\n";
  for (const auto& [method, crit, mean] : absolute_means)
    out << method << ',' << crit << ',' << mean << '\n';
  return out.str();
}

std::string SpcReport::to_json_text() const {
  nlohmann::json cells_json = nlohmann::json::array();
  for (const auto& c : cells)
    cells_json.push_back({{"model", c.model},
                          {"benchmark", c.benchmark},
                          {"criterion", c.criterion},
                          {"average", c.average},
                          {"per_graph", c.per_graph},
                          {"failures", c.failures},
                          {"flagged", c.flagged}});
  nlohmann::json abs = nlohmann::json::array();
  for (const auto& [method, crit, mean] : absolute_means)
    abs.push_back({{"method", method}, {"criterion", crit}, {"mean", mean}});
  nlohmann::json j{{"models", models},         {"benchmarks", benchmarks},
                   {"criteria", criteria},     {"graphs", graph_ids},
                   {"n_t", graph_ids.size()},  {"cells", cells_json},
                   {"absolute_means", abs}};
  return j.dump(2);
}

SpcReport compare(const std::vector<NamedMethod>& models,
                  const std::vector<NamedMethod>& benchmarks,
                  const std::vector<GraphRecord>& test_graphs,
                  const std::vector<CriterionSpec>& criteria, uint64_t seed) {
  if (test_graphs.empty()) throw EmptyTestSet("compare needs test graphs");
  if (criteria.empty()) throw ArgumentError("compare needs at least one criterion");

  SpcReport report;
  for (const auto& m : models) report.models.push_back(m.name);
  for (const auto& b : benchmarks) report.benchmarks.push_back(b.name);
  for (const auto& c : criteria) report.criteria.push_back(c.label());
  for (const auto& rec : test_graphs) report.graph_ids.push_back(rec.id);

  // evaluate every method once per (graph, criterion); NaN marks failure
  struct MethodValues {
    std::string name;
    std::vector<std::vector<double>> values;  // [criterion][graph]
  };
  auto evaluate_method = [&](const NamedMethod& method) {
    MethodValues mv;
    mv.name = method.name;
    mv.values.assign(criteria.size(), std::vector<double>(test_graphs.size()));
    for (size_t gi = 0; gi < test_graphs.size(); ++gi) {
      const auto& rec = test_graphs[gi];
      try {
        const uint64_t mseed = Rng::derive_seed(seed, "eval:" + method.name + ":" + rec.id);
        const Layout canon = canonicalize(method.run(rec.graph, rec.dist, mseed), rec.dist);
        const Layout canon_init = canonicalize(rec.init, rec.dist);
        for (size_t ci = 0; ci < criteria.size(); ++ci)
          mv.values[ci][gi] = evaluate(criteria[ci], canon, rec.graph, rec.dist, &canon_init).value;
      } catch (const Error&) {
        for (size_t ci = 0; ci < criteria.size(); ++ci)
          mv.values[ci][gi] = std::numeric_limits<double>::quiet_NaN();
      }
    }
    return mv;
  };

  std::vector<MethodValues> model_vals, bench_vals;
  for (const auto& m : models) model_vals.push_back(evaluate_method(m));
  for (const auto& b : benchmarks) bench_vals.push_back(evaluate_method(b));

  for (size_t ci = 0; ci < criteria.size(); ++ci) {
    for (const auto& bench : bench_vals) {
      for (const auto& model : model_vals) {
        SpcCell cell;
        cell.model = model.name;
        cell.benchmark = bench.name;
        cell.criterion = report.criteria[ci];
        for (size_t gi = 0; gi < test_graphs.size(); ++gi) {
          const double f = model.values[ci][gi];
          const double b = bench.values[ci][gi];
          if (std::isnan(f) || std::isnan(b)) {
            ++cell.failures;
            continue;
          }
          cell.per_graph.push_back(spc(f, b));
        }
        cell.flagged = cell.failures > 0.05 * static_cast<double>(test_graphs.size());
        cell.average = cell.per_graph.empty() ? 0.0 : average_spc(cell.per_graph);
        report.cells.push_back(std::move(cell));
      }
    }
  }

  auto add_absolute = [&](const std::vector<MethodValues>& vals) {
    for (const auto& mv : vals) {
      for (size_t ci = 0; ci < criteria.size(); ++ci) {
        double sum = 0;
        int count = 0;
        for (const double v : mv.values[ci])
          if (!std::isnan(v)) {
            sum += v;
            ++count;
          }
        report.absolute_means.emplace_back(mv.name, report.criteria[ci],
                                           count ? sum / count : 0.0);
      }
    }
  };
  add_absolute(model_vals);
  add_absolute(bench_vals);
  return report;
}

}  // namespace gdraw
