// gdraw: command-line front end for the graph-drawing pipeline.
//
// Exit codes: 0 success, 2 parse failure, 3 validation failure, 4 runtime
// failure. Failures emit one machine-readable JSON line on stderr.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gdraw/baselines.hpp"
#include "gdraw/criteria.hpp"
#include "gdraw/errors.hpp"
#include "gdraw/eval.hpp"
#include "gdraw/graph.hpp"
#include "gdraw/neural.hpp"
#include "gdraw/render.hpp"
#include "gdraw/rng.hpp"
#include "gdraw/trainer.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace gdraw;

namespace {

constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitRuntime = 4;

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << content;
  }
  fs::rename(tmp, path);
}

std::string graph_id_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "g%03d", index);
  return buf;
}

// Loads every *.graph edge-list file in a directory, sorted by file name.
std::vector<std::pair<std::string, Graph>> load_graph_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw ValidationError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".graph") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("no .graph files in " + dir);
  std::vector<std::pair<std::string, Graph>> out;
  for (const auto& p : files)
    out.emplace_back(p.stem().string(), load_graph(p.string(), GraphFormat::edge_list));
  return out;
}

std::vector<GraphRecord> load_records(const std::string& dir, uint64_t seed) {
  std::vector<GraphRecord> records;
  for (auto& [id, g] : load_graph_dir(dir))
    records.push_back(make_graph_record(id, std::move(g), Rng::derive_seed(seed, "init:" + id)));
  return records;
}

CriterionSpec load_criterion_arg(const std::string& arg) {
  if (arg.empty() || arg == "stress") return CriterionSpec::single(CriterionId::stress);
  if (arg == "combined") return CriterionSpec::combined();
  if (fs::is_regular_file(arg)) return CriterionSpec::load(arg);
  try {
    return CriterionSpec::single(criterion_from_name(arg));
  } catch (const ArgumentError&) {
    throw ValidationError("unknown criterion (not a built-in name or spec file): " + arg);
  }
}

// A model argument is a built-in method name or a checkpoint file; trained
// generators draw from a fresh PivotMDS initial layout, as in training.
NamedMethod make_model(const std::string& arg) {
  if (fs::is_regular_file(arg)) {
    const ModelState state = load_checkpoint(arg);
    const std::string name = fs::path(arg).stem().string();
    const GeneratorNet gen = state.gen;
    return NamedMethod{name, [gen](const Graph& g, const DistanceMatrix& d, uint64_t seed) {
                         const Layout init = pivot_mds(g, d, 50, 200, seed);
                         return generate_layout(gen, g, init);
                       }};
  }
  return make_method(arg);
}

int cmd_gen_data(int count, int n_min, int n_max, double extra_frac, uint64_t seed,
                 const std::string& out_dir) {
  if (count < 1) throw ValidationError("--count must be >= 1");
  if (n_min < 2 || n_max < n_min) throw ValidationError("need 2 <= n-min <= n-max");
  fs::create_directories(out_dir);
  for (int i = 0; i < count; ++i) {
    const std::string id = graph_id_name(i);
    Rng size_rng(Rng::derive_seed(seed, "size:" + id));
    const int n = n_min + static_cast<int>(size_rng.index(static_cast<uint64_t>(n_max - n_min + 1)));
    const Graph g = random_graph(n, extra_frac, Rng::derive_seed(seed, "graph:" + id));
    atomic_write((fs::path(out_dir) / (id + ".graph")).string(), format_edge_list(g));
  }
  std::cout << "wrote " << count << " graphs to " << out_dir << "\n";
  return 0;
}

int cmd_baseline(const std::string& method_name, const std::string& graphs_dir,
                 const std::string& out_dir, uint64_t seed) {
  const NamedMethod method = make_method(method_name);
  fs::create_directories(out_dir);
  int written = 0;
  for (const auto& [id, g] : load_graph_dir(graphs_dir)) {
    const DistanceMatrix d = shortest_paths(g);
    const Layout x = method.run(g, d, Rng::derive_seed(seed, method.name + ":" + id));
    atomic_write((fs::path(out_dir) / (id + ".layout")).string(), format_layout(x));
    ++written;
  }
  std::cout << "wrote " << written << " layouts to " << out_dir << "\n";
  return 0;
}

int cmd_collect(const std::string& graphs_dir, const std::vector<std::string>& layout_dirs,
                const std::string& criterion_arg, const std::string& out_manifest,
                uint64_t seed) {
  const CriterionSpec spec = load_criterion_arg(criterion_arg);
  const auto records = load_records(graphs_dir, seed);

  LayoutCollection collection;
  for (const auto& rec : records) {
    bool have = false;
    CollectionEntry best;
    std::string err;
    for (const auto& dir : layout_dirs) {
      const std::string method = fs::path(dir).filename().string();
      const fs::path file = fs::path(dir) / (rec.id + ".layout");
      try {
        if (!fs::is_regular_file(file)) throw ValidationError("missing layout: " + file.string());
        Layout x = load_layout(file.string());
        x.validate(rec.graph.node_count());
        CollectionEntry cand = make_entry(x, rec, spec, method);
        if (!have || better_than(cand.value, cand.stress, best.value, best.stress)) {
          best = std::move(cand);
          have = true;
        }
      } catch (const Error& e) {
        err = err.empty() ? (method + ": " + e.what()) : err + "; " + method + ": " + e.what();
      }
    }
    if (have)
      collection.entries.emplace(rec.id, std::move(best));
    else
      collection.failures.emplace(rec.id, err);
  }

  save_collection(collection, out_manifest);

  const auto comp = collection.composition();
  const double total = static_cast<double>(collection.entries.size());
  std::cout << "collection composition (" << collection.entries.size() << " graphs):\n";
  for (const auto& [method, wins] : comp) {
    char pct[32];
    std::snprintf(pct, sizeof(pct), "%.1f", total > 0 ? 100.0 * wins / total : 0.0);
    std::cout << "  " << method << ": " << wins << " (" << pct << "%)\n";
  }
  for (const auto& [id, msg] : collection.failures)
    std::cout << "  failed " << id << ": " << msg << "\n";
  return 0;
}

int cmd_train(const std::string& graphs_dir, const std::string& collection_path,
              const std::string& bootstrap_arg, const std::string& criterion_arg,
              const std::string& config_path, const std::string& out_dir, int64_t seed_arg,
              int epochs_arg) {
  TrainConfig cfg = config_path.empty() ? TrainConfig{} : TrainConfig::load(config_path);
  if (!criterion_arg.empty()) cfg.criterion = load_criterion_arg(criterion_arg);
  if (!bootstrap_arg.empty()) {
    if (bootstrap_arg == "self")
      cfg.bootstrap = Bootstrap::self;
    else if (bootstrap_arg == "collection")
      cfg.bootstrap = Bootstrap::collection;
    else
      throw ValidationError("--bootstrap must be self or collection");
  }
  if (seed_arg >= 0) cfg.seed = static_cast<uint64_t>(seed_arg);
  if (epochs_arg >= 0) cfg.epochs = epochs_arg;
  cfg.validate();

  LayoutCollection initial;
  const LayoutCollection* initial_ptr = nullptr;
  if (!collection_path.empty()) {
    initial = load_collection(collection_path);
    initial_ptr = &initial;
  } else if (cfg.bootstrap == Bootstrap::collection) {
    throw ValidationError("bootstrap=collection requires --collection");
  }

  const auto records = load_records(graphs_dir, cfg.seed);
  fs::create_directories(out_dir);
  const TrainResult result = train(cfg, records, initial_ptr, out_dir);

  atomic_write((fs::path(out_dir) / "history.csv").string(), history_csv(result.state.history));
  save_collection(result.collection, (fs::path(out_dir) / "collection" / "manifest.json").string());

  std::cout << "trained " << cfg.epochs << " epochs on " << records.size() << " graphs";
  if (!result.state.history.empty())
    std::cout << "; final mean collection value "
              << result.state.history.back().mean_collection_value;
  std::cout << "\ncheckpoint: " << (fs::path(out_dir) / "last.ckpt.json").string() << "\n";
  return 0;
}

int cmd_draw(const std::string& checkpoint_path, const std::string& graphs_dir,
             const std::string& out_dir, const std::string& init_dir, uint64_t seed) {
  const ModelState state = load_checkpoint(checkpoint_path);
  fs::create_directories(out_dir);
  int written = 0;
  for (const auto& [id, g] : load_graph_dir(graphs_dir)) {
    const DistanceMatrix d = shortest_paths(g);
    Layout init;
    if (init_dir.empty()) {
      init = pivot_mds(g, d, 50, 200,
                       Rng::derive_seed(Rng::derive_seed(seed, "init:" + id), "pmds-init"));
    } else {
      init = load_layout((fs::path(init_dir) / (id + ".layout")).string());
      init.validate(g.node_count());
    }
    Layout x = generate_layout(state.gen, g, init);
    try {
      x = canonicalize(x, d);
    } catch (const DegenerateLayout&) {
      // keep the raw output; canonical form is undefined for coincident points
    }
    atomic_write((fs::path(out_dir) / (id + ".layout")).string(), format_layout(x));
    ++written;
  }
  std::cout << "wrote " << written << " layouts to " << out_dir << "\n";
  return 0;
}

int cmd_eval(const std::vector<std::string>& model_args,
             const std::vector<std::string>& benchmark_args, const std::string& graphs_dir,
             const std::vector<std::string>& criteria_args, const std::string& out_dir,
             uint64_t seed) {
  std::vector<NamedMethod> models, benchmarks;
  for (const auto& a : model_args) models.push_back(make_model(a));
  for (const auto& a : benchmark_args) benchmarks.push_back(make_model(a));
  std::vector<CriterionSpec> criteria;
  for (const auto& a : criteria_args) criteria.push_back(load_criterion_arg(a));
  if (criteria.empty()) criteria.push_back(CriterionSpec::single(CriterionId::stress));

  const auto records = load_records(graphs_dir, seed);
  const SpcReport report = compare(models, benchmarks, records, criteria, seed);

  fs::create_directories(out_dir);
  atomic_write((fs::path(out_dir) / "report.csv").string(), report.to_csv());
  atomic_write((fs::path(out_dir) / "report.json").string(), report.to_json_text());
  std::cout << report.to_csv();
  return 0;
}

int cmd_render(const std::string& layout_path, const std::string& graph_path,
               const std::string& out_path, double width) {
  const Graph g = load_graph(graph_path, GraphFormat::edge_list);
  const Layout x = load_layout(layout_path);
  RenderOptions opts;
  opts.width_px = width;
  atomic_write(out_path, render_svg(x, g, opts));
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

void print_error(const char* kind, const std::string& message) {
  nlohmann::json j{{"error", kind}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph drawing via a self-challenging generative adversarial network"};
  app.require_subcommand(1);

  // gen-data
  int gd_count = 0, gd_nmin = 10, gd_nmax = 20;
  double gd_extra = 0.3;
  uint64_t gd_seed = 0;
  std::string gd_out;
  auto* gen_data = app.add_subcommand("gen-data", "generate a synthetic graph dataset");
  gen_data->add_option("--count", gd_count, "number of graphs")->required();
  gen_data->add_option("--n-min", gd_nmin, "minimum node count");
  gen_data->add_option("--n-max", gd_nmax, "maximum node count");
  gen_data->add_option("--extra-frac", gd_extra, "extra edges as a fraction of N");
  gen_data->add_option("--seed", gd_seed, "master seed");
  gen_data->add_option("--out", gd_out, "output directory")->required();

  // baseline
  std::string bl_method, bl_graphs, bl_out;
  uint64_t bl_seed = 0;
  auto* baseline = app.add_subcommand("baseline", "run a baseline layout method");
  baseline->add_option("--method", bl_method, "pmds, stress_sgd, fr, or random")->required();
  baseline->add_option("--graphs", bl_graphs, "graph directory")->required();
  baseline->add_option("--out", bl_out, "output layout directory")->required();
  baseline->add_option("--seed", bl_seed, "master seed");

  // collect
  std::string co_graphs, co_criterion, co_out;
  std::vector<std::string> co_layouts;
  uint64_t co_seed = 0;
  auto* collect = app.add_subcommand("collect", "pick the best layout per graph");
  collect->add_option("--graphs", co_graphs, "graph directory")->required();
  collect->add_option("--layouts", co_layouts, "layout directories (one per method)")
      ->required()
      ->expected(-1);
  collect->add_option("--criterion", co_criterion, "criterion name or spec file");
  collect->add_option("--out", co_out, "output manifest path")->required();
  collect->add_option("--seed", co_seed, "master seed");

  // train
  std::string tr_graphs, tr_collection, tr_bootstrap, tr_criterion, tr_config, tr_out;
  int64_t tr_seed = -1;
  int tr_epochs = -1;
  auto* train_cmd = app.add_subcommand("train", "adversarial training");
  train_cmd->add_option("--graphs", tr_graphs, "graph directory")->required();
  train_cmd->add_option("--collection", tr_collection, "initial collection manifest");
  train_cmd->add_option("--bootstrap", tr_bootstrap, "self or collection");
  train_cmd->add_option("--criterion", tr_criterion, "criterion name or spec file");
  train_cmd->add_option("--config", tr_config, "train config JSON");
  train_cmd->add_option("--out", tr_out, "checkpoint directory")->required();
  train_cmd->add_option("--seed", tr_seed, "master seed (overrides config)");
  train_cmd->add_option("--epochs", tr_epochs, "epoch count (overrides config)");

  // draw
  std::string dr_ckpt, dr_graphs, dr_out, dr_init;
  uint64_t dr_seed = 0;
  auto* draw = app.add_subcommand("draw", "generate layouts with a trained generator");
  draw->add_option("--checkpoint", dr_ckpt, "checkpoint file")->required();
  draw->add_option("--graphs", dr_graphs, "graph directory")->required();
  draw->add_option("--out", dr_out, "output layout directory")->required();
  draw->add_option("--init", dr_init, "initial layout directory (default: PivotMDS)");
  draw->add_option("--seed", dr_seed, "master seed");

  // eval
  std::vector<std::string> ev_models, ev_benchmarks, ev_criteria;
  std::string ev_graphs, ev_out;
  uint64_t ev_seed = 0;
  auto* eval_cmd = app.add_subcommand("eval", "compare methods with symmetric percent change");
  eval_cmd->add_option("--models", ev_models, "method names or checkpoint files")
      ->required()
      ->expected(-1);
  eval_cmd->add_option("--benchmarks", ev_benchmarks, "method names or checkpoint files")
      ->required()
      ->expected(-1);
  eval_cmd->add_option("--graphs", ev_graphs, "test graph directory")->required();
  eval_cmd->add_option("--criteria", ev_criteria, "criterion names or spec files")->expected(-1);
  eval_cmd->add_option("--out", ev_out, "report directory")->required();
  eval_cmd->add_option("--seed", ev_seed, "master seed");

  // render
  std::string rn_layout, rn_graph, rn_out;
  double rn_width = 600;
  auto* render = app.add_subcommand("render", "render a layout to SVG");
  render->add_option("--layout", rn_layout, "layout file")->required();
  render->add_option("--graph", rn_graph, "graph file (edge list)")->required();
  render->add_option("--out", rn_out, "output SVG path")->required();
  render->add_option("--width", rn_width, "viewport width in pixels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("parse", e.what());
    return kExitParse;
  }

  try {
    if (gen_data->parsed())
      return cmd_gen_data(gd_count, gd_nmin, gd_nmax, gd_extra, gd_seed, gd_out);
    if (baseline->parsed()) return cmd_baseline(bl_method, bl_graphs, bl_out, bl_seed);
    if (collect->parsed()) return cmd_collect(co_graphs, co_layouts, co_criterion, co_out, co_seed);
    if (train_cmd->parsed())
      return cmd_train(tr_graphs, tr_collection, tr_bootstrap, tr_criterion, tr_config, tr_out,
                       tr_seed, tr_epochs);
    if (draw->parsed()) return cmd_draw(dr_ckpt, dr_graphs, dr_out, dr_init, dr_seed);
    if (eval_cmd->parsed())
      return cmd_eval(ev_models, ev_benchmarks, ev_graphs, ev_criteria, ev_out, ev_seed);
    if (render->parsed()) return cmd_render(rn_layout, rn_graph, rn_out, rn_width);
    print_error("parse", "no subcommand given");
    return kExitParse;
  } catch (const ParseError& e) {
    print_error("parse", e.what());
    return kExitParse;
  } catch (const ValidationError& e) {
    print_error("validation", e.what());
    return kExitValidation;
  } catch (const ArgumentError& e) {
    print_error("validation", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    print_error("runtime", e.what());
    return kExitRuntime;
  }
}
