#include "gdraw/trainer.hpp"

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

double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

double rgan_d_loss(double score_r, double score_f) {
  // -log sigma(score_r - score_f) == softplus(score_f - score_r)
  return softplus(score_f - score_r);
}

double rgan_g_loss(double score_r, double score_f) { return rgan_d_loss(score_f, score_r); }

void TrainConfig::validate() const {
  if (epochs < 0) throw ValidationError("epochs must be >= 0");
  if (minibatch <= 0) throw ValidationError("minibatch must be positive");
  if (k < 0) throw ValidationError("k must be >= 0");
  if (lr0 <= 0) throw ValidationError("lr0 must be positive");
  if (lr_decay <= 0 || lr_decay > 1) throw ValidationError("lr_decay must be in (0, 1]");
  criterion.validate();
  arch.validate();
}

TrainConfig TrainConfig::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("train config JSON: ") + e.what());
  }
  TrainConfig cfg;
  if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
  if (j.contains("minibatch")) cfg.minibatch = j["minibatch"].get<int>();
  if (j.contains("k")) cfg.k = j["k"].get<int>();
  if (j.contains("lr0")) cfg.lr0 = j["lr0"].get<double>();
  if (j.contains("lr_decay")) cfg.lr_decay = j["lr_decay"].get<double>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
  if (j.contains("self_challenge")) cfg.self_challenge = j["self_challenge"].get<bool>();
  if (j.contains("checkpoint_every")) cfg.checkpoint_every = j["checkpoint_every"].get<int>();
  if (j.contains("bootstrap")) {
    const std::string b = j["bootstrap"].get<std::string>();
    if (b == "collection")
      cfg.bootstrap = Bootstrap::collection;
    else if (b == "self")
      cfg.bootstrap = Bootstrap::self;
    else
      throw ParseError("unknown bootstrap mode: " + b);
  }
  if (j.contains("criterion"))
    cfg.criterion = CriterionSpec::from_json_text(j["criterion"].dump());
  if (j.contains("arch")) {
    const auto& a = j["arch"];
    if (a.contains("gen_layers")) cfg.arch.gen_layers = a["gen_layers"].get<int>();
    if (a.contains("gen_dim")) cfg.arch.gen_dim = a["gen_dim"].get<int>();
    if (a.contains("dis_layers")) cfg.arch.dis_layers = a["dis_layers"].get<int>();
    if (a.contains("dis_dim")) cfg.arch.dis_dim = a["dis_dim"].get<int>();
    if (a.contains("leaky_slope")) cfg.arch.leaky_slope = a["leaky_slope"].get<double>();
  }
  cfg.validate();
  return cfg;
}

TrainConfig TrainConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open train config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string TrainConfig::to_json_text() const {
  nlohmann::json j{
      {"epochs", epochs},
      {"minibatch", minibatch},
      {"k", k},
      {"lr0", lr0},
      {"lr_decay", lr_decay},
      {"seed", seed},
      {"self_challenge", self_challenge},
      {"checkpoint_every", checkpoint_every},
      {"bootstrap", bootstrap == Bootstrap::collection ? "collection" : "self"},
      {"criterion", nlohmann::json::parse(criterion.to_json_text())},
      {"arch",
       {{"gen_layers", arch.gen_layers},
        {"gen_dim", arch.gen_dim},
        {"dis_layers", arch.dis_layers},
        {"dis_dim", arch.dis_dim},
        {"leaky_slope", arch.leaky_slope}}},
  };
  return j.dump(2);
}

ModelState init_model(const ArchConfig& arch, double lr0, uint64_t seed) {
  ModelState state;
  auto [gen, dis] = init_params(arch, seed);
  state.gen = std::move(gen);
  state.dis = std::move(dis);
  state.opt_gen = make_optimizer(state.gen.params);
  state.opt_dis = make_optimizer(state.dis.params);
  state.lr = lr0;
  return state;
}

namespace {

nlohmann::json params_to_json(const ParamSet& set) {
  nlohmann::json arrays = nlohmann::json::array();
  for (const auto& a : set.arrays)
    arrays.push_back({{"name", a.name}, {"rows", a.rows}, {"cols", a.cols}, {"data", a.data}});
  return arrays;
}

ParamSet params_from_json(const nlohmann::json& arrays) {
  ParamSet set;
  for (const auto& a : arrays) {
    ParamArray pa{a.at("name").get<std::string>(), a.at("rows").get<int>(),
                  a.at("cols").get<int>(), a.at("data").get<std::vector<double>>()};
    if (pa.data.size() != static_cast<size_t>(pa.rows) * pa.cols)
      throw ParseError("checkpoint array " + pa.name + " has inconsistent shape");
    set.arrays.push_back(std::move(pa));
  }
  return set;
}

nlohmann::json opt_to_json(const OptimizerState& s) {
  return {{"m", s.m}, {"v", s.v}, {"step", s.step}};
}

OptimizerState opt_from_json(const nlohmann::json& j) {
  OptimizerState s;
  s.m = j.at("m").get<std::vector<double>>();
  s.v = j.at("v").get<std::vector<double>>();
  s.step = j.at("step").get<long>();
  return s;
}

}  // namespace

void save_checkpoint(const ModelState& state, const std::string& path) {
  nlohmann::json j{
      {"version", 1},
      {"arch",
       {{"gen_layers", state.gen.cfg.gen_layers},
        {"gen_dim", state.gen.cfg.gen_dim},
        {"dis_layers", state.gen.cfg.dis_layers},
        {"dis_dim", state.gen.cfg.dis_dim},
        {"leaky_slope", state.gen.cfg.leaky_slope}}},
      {"epoch", state.epoch},
      {"lr", state.lr},
      {"gen", params_to_json(state.gen.params)},
      {"dis", params_to_json(state.dis.params)},
      {"opt_gen", opt_to_json(state.opt_gen)},
      {"opt_dis", opt_to_json(state.opt_dis)},
  };
  nlohmann::json history = nlohmann::json::array();
  for (const auto& h : state.history)
    history.push_back({{"epoch", h.epoch},
                       {"d_loss", h.d_loss},
                       {"g_loss", h.g_loss},
                       {"mean_collection_value", h.mean_collection_value},
                       {"mean_generated_value", h.mean_generated_value},
                       {"replacements", h.replacements},
                       {"lr", h.lr}});
  j["history"] = std::move(history);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint: " + path);
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

ModelState load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint JSON: ") + e.what());
  }
  if (j.at("version").get<int>() != 1) throw ParseError("unsupported checkpoint version");
  ModelState state;
  const auto& a = j.at("arch");
  ArchConfig cfg{a.at("gen_layers").get<int>(), a.at("gen_dim").get<int>(),
                 a.at("dis_layers").get<int>(), a.at("dis_dim").get<int>(),
                 a.at("leaky_slope").get<double>()};
  cfg.validate();
  state.gen = GeneratorNet{cfg, params_from_json(j.at("gen"))};
  state.dis = DiscriminatorNet{cfg, params_from_json(j.at("dis"))};
  state.opt_gen = opt_from_json(j.at("opt_gen"));
  state.opt_dis = opt_from_json(j.at("opt_dis"));
  state.epoch = j.at("epoch").get<int>();
  state.lr = j.at("lr").get<double>();
  if (j.contains("history"))
    for (const auto& h : j.at("history"))
      state.history.push_back(EpochStats{h.at("epoch").get<int>(),
                                         h.at("d_loss").get<double>(),
                                         h.at("g_loss").get<double>(),
                                         h.at("mean_collection_value").get<double>(),
                                         h.at("mean_generated_value").get<double>(),
                                         h.at("replacements").get<int>(),
                                         h.at("lr").get<double>()});
  if (state.opt_gen.m.size() != state.gen.params.total() ||
      state.opt_dis.m.size() != state.dis.params.total())
    throw ParseError("checkpoint optimizer state does not match parameters");
  return state;
}

std::string history_csv(const std::vector<EpochStats>& history) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,d_loss,g_loss,mean_collection_value,mean_generated_value,replacements,lr\n";
  for (const auto& h : history)
    out << h.epoch << ',' << h.d_loss << ',' << h.g_loss << ',' << h.mean_collection_value << ','
        << h.mean_generated_value << ',' << h.replacements << ',' << h.lr << '\n';
  return out.str();
}

namespace {

void accumulate(std::vector<std::vector<double>>& acc, const std::vector<std::vector<double>>& g,
                double scale) {
  if (acc.empty()) {
    acc.resize(g.size());
    for (size_t a = 0; a < g.size(); ++a) acc[a].assign(g[a].size(), 0.0);
  }
  for (size_t a = 0; a < g.size(); ++a)
    for (size_t i = 0; i < g[a].size(); ++i) acc[a][i] += g[a][i] * scale;
}

std::vector<std::vector<int>> make_minibatches(size_t n, int m, Rng& rng) {
  std::vector<int> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  rng.shuffle(order);
  std::vector<std::vector<int>> batches;
  for (size_t start = 0; start < n; start += m)
    batches.emplace_back(order.begin() + start,
                         order.begin() + std::min(start + m, n));
  return batches;
}

}  // namespace

std::pair<double, double> train_epoch(ModelState& state, const LayoutCollection& collection,
                                      const TrainConfig& cfg,
                                      const std::vector<GraphRecord>& dataset, Rng& rng) {
  const int k = cfg.k > 0 ? cfg.k
                          : static_cast<int>((dataset.size() + cfg.minibatch - 1) / cfg.minibatch);
  for (const auto& rec : dataset)
    if (!collection.entries.count(rec.id))
      throw ValidationError("collection has no entry for graph " + rec.id);

  double d_loss_sum = 0, g_loss_sum = 0;
  int d_batches = 0, g_batches = 0;

  // discriminator phase: generator frozen (inference-only fakes)
  {
    auto batches = make_minibatches(dataset.size(), cfg.minibatch, rng);
    for (int b = 0; b < k; ++b) {
      const auto& batch = batches[b % batches.size()];
      std::vector<std::vector<double>> acc;
      double batch_loss = 0;
      for (const int gi : batch) {
        const GraphRecord& rec = dataset[gi];
        const Layout fake = generate_layout(state.gen, rec.graph, rec.init);
        Tape tape;
        BoundParams bound;
        const Tensor score_r = discriminator_forward(
            state.dis, rec.graph, rec.dist, collection.entries.at(rec.id).layout, tape, &bound);
        const Tensor score_f =
            discriminator_forward(state.dis, rec.graph, rec.dist, fake, tape);
        const Tensor loss = tape.softplus(tape.sub(score_f, score_r));
        const double lv = tape.scalar(loss);
        if (!std::isfinite(lv)) throw NonFiniteLoss("discriminator minibatch");
        batch_loss += lv;
        tape.backward(loss);
        accumulate(acc, collect_grads(tape, bound), 1.0 / batch.size());
      }
      adamw_step(state.dis.params, acc, state.opt_dis, state.lr);
      d_loss_sum += batch_loss / batch.size();
      ++d_batches;
    }
  }

  // generator phase: discriminator frozen (its gradients are discarded)
  {
    auto batches = make_minibatches(dataset.size(), cfg.minibatch, rng);
    for (int b = 0; b < k; ++b) {
      const auto& batch = batches[b % batches.size()];
      std::vector<std::vector<double>> acc;
      double batch_loss = 0;
      for (const int gi : batch) {
        const GraphRecord& rec = dataset[gi];
        Tape tape;
        BoundParams gen_bound;
        const Tensor fake = generator_forward(state.gen, rec.graph, rec.init, tape, &gen_bound);
        const Tensor score_f = discriminator_forward(state.dis, rec.graph, rec.dist, fake, tape);
        const Tensor score_r = discriminator_forward(
            state.dis, rec.graph, rec.dist, collection.entries.at(rec.id).layout, tape);
        const Tensor loss = tape.softplus(tape.sub(score_r, score_f));
        const double lv = tape.scalar(loss);
        if (!std::isfinite(lv)) throw NonFiniteLoss("generator minibatch");
        batch_loss += lv;
        tape.backward(loss);
        accumulate(acc, collect_grads(tape, gen_bound), 1.0 / batch.size());
      }
      adamw_step(state.gen.params, acc, state.opt_gen, state.lr);
      g_loss_sum += batch_loss / batch.size();
      ++g_batches;
    }
  }

  state.lr *= cfg.lr_decay;
  return {d_batches ? d_loss_sum / d_batches : 0.0, g_batches ? g_loss_sum / g_batches : 0.0};
}

ChallengeResult self_challenge_update(LayoutCollection& collection, const ModelState& state,
                                      const std::vector<GraphRecord>& dataset,
                                      const CriterionSpec& spec) {
  ChallengeResult result;
  double value_sum = 0;
  int evaluated = 0;
  for (const auto& rec : dataset) {
    try {
      const Layout fake = generate_layout(state.gen, rec.graph, rec.init);
      CollectionEntry cand =
          make_entry(fake, rec, spec, "generator@epoch" + std::to_string(state.epoch));
      value_sum += cand.value;
      ++evaluated;
      auto it = collection.entries.find(rec.id);
      if (it == collection.entries.end()) {
        collection.entries.emplace(rec.id, std::move(cand));
        ++result.replacements;
      } else if (better_than(cand.value, cand.stress, it->second.value, it->second.stress)) {
        it->second = std::move(cand);
        ++result.replacements;
      }
    } catch (const Error&) {
      ++result.failures;
    }
  }
  result.mean_generated_value = evaluated ? value_sum / evaluated : 0.0;
  return result;
}

TrainResult train(const TrainConfig& cfg, const std::vector<GraphRecord>& dataset,
                  const LayoutCollection* initial_collection, const std::string& checkpoint_dir) {
  cfg.validate();
  if (dataset.empty()) throw ArgumentError("train needs a nonempty dataset");
  if (cfg.bootstrap == Bootstrap::collection && initial_collection == nullptr)
    throw ArgumentError("bootstrap=collection requires an initial collection");

  TrainResult result;
  result.state = init_model(cfg.arch, cfg.lr0, cfg.seed);

  if (cfg.bootstrap == Bootstrap::collection) {
    result.collection = *initial_collection;
    for (const auto& rec : dataset)
      if (!result.collection.entries.count(rec.id))
        throw ValidationError("initial collection misses graph " + rec.id);
  } else {
    // the generator seeds its own collection with its untrained outputs
    self_challenge_update(result.collection, result.state, dataset, cfg.criterion);
    if (result.collection.entries.size() != dataset.size())
      throw Error("self bootstrap failed to produce layouts for every graph");
  }

  const bool checkpoints = !checkpoint_dir.empty();
  if (checkpoints) std::filesystem::create_directories(checkpoint_dir);
  auto checkpoint_path = [&](const std::string& name) {
    return (std::filesystem::path(checkpoint_dir) / name).string();
  };
  if (checkpoints) save_checkpoint(result.state, checkpoint_path("last.ckpt.json"));

  Rng rng(Rng::derive_seed(cfg.seed, "train"));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double lr_before = result.state.lr;
    ModelState before = result.state;
    double d_loss = 0, g_loss = 0;
    try {
      std::tie(d_loss, g_loss) = train_epoch(result.state, result.collection, cfg, dataset, rng);
    } catch (const NonFiniteLoss&) {
      result.state = std::move(before);  // keep pre-epoch parameters
      if (checkpoints) save_checkpoint(result.state, checkpoint_path("last.ckpt.json"));
      throw;
    }
    result.state.epoch = epoch;

    ChallengeResult challenge;
    if (cfg.self_challenge) {
      challenge = self_challenge_update(result.collection, result.state, dataset, cfg.criterion);
    } else {
      // still track generated quality without touching the collection
      LayoutCollection scratch = result.collection;
      challenge = self_challenge_update(scratch, result.state, dataset, cfg.criterion);
      challenge.replacements = 0;
    }

    double mean_collection = 0;
    for (const auto& rec : dataset) mean_collection += result.collection.entries.at(rec.id).value;
    mean_collection /= dataset.size();

    result.state.history.push_back(EpochStats{epoch, d_loss, g_loss, mean_collection,
                                              challenge.mean_generated_value,
                                              challenge.replacements, lr_before});

    if (checkpoints) {
      save_checkpoint(result.state, checkpoint_path("last.ckpt.json"));
      if (cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0)
        save_checkpoint(result.state,
                        checkpoint_path("epoch" + std::to_string(epoch) + ".ckpt.json"));
    }
  }
  return result;
}

}  // namespace gdraw
