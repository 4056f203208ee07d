#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gdraw/baselines.hpp"
#include "gdraw/criteria.hpp"
#include "gdraw/neural.hpp"
#include "gdraw/rng.hpp"

namespace gdraw {

// Relativistic adversarial losses, -log sigma(delta), via stable softplus.
double rgan_d_loss(double score_r, double score_f);
double rgan_g_loss(double score_r, double score_f);

enum class Bootstrap { collection, self };

struct TrainConfig {
  int epochs = 200;
  int minibatch = 16;
  int k = 0;  // minibatches per phase; 0 means one pass: ceil(dataset / minibatch)
  double lr0 = 0.001;
  double lr_decay = 0.997;
  uint64_t seed = 0;
  CriterionSpec criterion = CriterionSpec::single(CriterionId::stress);
  Bootstrap bootstrap = Bootstrap::collection;
  bool self_challenge = true;
  int checkpoint_every = 0;  // epochs between checkpoints; 0 = final only
  ArchConfig arch;

  void validate() const;
  static TrainConfig from_json_text(const std::string& text);
  static TrainConfig load(const std::string& path);
  std::string to_json_text() const;
};

struct EpochStats {
  int epoch = 0;
  double d_loss = 0;
  double g_loss = 0;
  double mean_collection_value = 0;
  double mean_generated_value = 0;
  int replacements = 0;
  double lr = 0;
};

struct ModelState {
  GeneratorNet gen;
  DiscriminatorNet dis;
  OptimizerState opt_gen, opt_dis;
  int epoch = 0;
  double lr = 0.001;
  std::vector<EpochStats> history;
};

ModelState init_model(const ArchConfig& arch, double lr0, uint64_t seed);

void save_checkpoint(const ModelState& state, const std::string& path);
ModelState load_checkpoint(const std::string& path);

std::string history_csv(const std::vector<EpochStats>& history);

// One adversarial epoch: k discriminator minibatches (generator frozen),
// then k generator minibatches (discriminator frozen), then one lr decay.
// Returns the mean loss of each phase.
std::pair<double, double> train_epoch(ModelState& state, const LayoutCollection& collection,
                                      const TrainConfig& cfg,
                                      const std::vector<GraphRecord>& dataset, Rng& rng);

struct ChallengeResult {
  int replacements = 0;
  double mean_generated_value = 0;
  int failures = 0;
};

// Generates a layout for every graph and replaces the stored example iff
// strictly better (stress tiebreak). Stored examples survive per-graph
// generation failures.
ChallengeResult self_challenge_update(LayoutCollection& collection, const ModelState& state,
                                      const std::vector<GraphRecord>& dataset,
                                      const CriterionSpec& spec);

struct TrainResult {
  ModelState state;
  LayoutCollection collection;
};

// Full training loop. initial_collection may be null when
// cfg.bootstrap == Bootstrap::self; checkpoint_dir may be empty to skip
// checkpoint files.
TrainResult train(const TrainConfig& cfg, const std::vector<GraphRecord>& dataset,
                  const LayoutCollection* initial_collection,
                  const std::string& checkpoint_dir = "");

}  // namespace gdraw
