#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gdraw/baselines.hpp"
#include "gdraw/criteria.hpp"

namespace gdraw {

// Symmetric percent change: 100 * (lambda_f - lambda_b) / max(lambda_f,
// lambda_b), in [-100, 100]; negative means the first argument is better.
// spc(0, 0) is defined as 0.
double spc(double lambda_f, double lambda_b);

double average_spc(const std::vector<double>& per_graph);

struct SpcCell {
  std::string model;
  std::string benchmark;
  std::string criterion;
  double average = 0;
  std::vector<double> per_graph;  // aligned with graph order; failures skipped
  int failures = 0;
  bool flagged = false;  // > 5% per-graph failures
};

struct SpcReport {
  std::vector<std::string> models;
  std::vector<std::string> benchmarks;
  std::vector<std::string> criteria;
  std::vector<std::string> graph_ids;
  std::vector<SpcCell> cells;
  // absolute mean criterion value per (method, criterion)
  std::vector<std::tuple<std::string, std::string, double>> absolute_means;

  const SpcCell& cell(const std::string& model, const std::string& benchmark,
                      const std::string& criterion) const;
  std::string to_csv() const;
  std::string to_json_text() const;
};

// Layouts are canonicalized before criterion evaluation so scale-sensitive
// criteria are comparable across methods.
SpcReport compare(const std::vector<NamedMethod>& models,
                  const std::vector<NamedMethod>& benchmarks,
                  const std::vector<GraphRecord>& test_graphs,
                  const std::vector<CriterionSpec>& criteria, uint64_t seed);

}  // namespace gdraw
