#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gdraw/autodiff.hpp"
#include "gdraw/geometry.hpp"
#include "gdraw/graph.hpp"

namespace gdraw {

struct ArchConfig {
  // desk-scale defaults; paper_defaults() holds the full-scale configuration
  int gen_layers = 6;
  int gen_dim = 8;
  int dis_layers = 3;
  int dis_dim = 16;
  double leaky_slope = 0.01;

  static ArchConfig paper_defaults() { return {31, 8, 9, 16, 0.01}; }
  void validate() const;
};

struct ParamArray {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::vector<double> data;
};

struct ParamSet {
  std::vector<ParamArray> arrays;

  size_t total() const;
  const ParamArray& find(const std::string& name) const;
};

// Tape leaves for every parameter array, in array order.
struct BoundParams {
  std::vector<Tensor> nodes;
};

BoundParams bind_params(Tape& tape, const ParamSet& params);
std::vector<std::vector<double>> collect_grads(const Tape& tape, const BoundParams& bound);

struct GeneratorNet {
  ArchConfig cfg;
  ParamSet params;
};

struct DiscriminatorNet {
  ArchConfig cfg;
  ParamSet params;
};

// Xavier-uniform weights, zero biases, unit norm scale; deterministic per seed.
std::pair<GeneratorNet, DiscriminatorNet> init_params(const ArchConfig& cfg, uint64_t seed);

// One GNN layer: edge-conditioned convolution (per-edge filter network
// producing an F x F' message matrix, scatter-mean aggregation, self
// transform), dense layer, per-graph feature normalization with learned
// scale/shift, leaky relu.
struct GnnLayerTensors {
  Tensor filter_w, filter_b;  // 1 x (F*F'), per-edge filter net
  Tensor root_w;              // F x F'
  Tensor dense_w, dense_b;    // F' x F', 1 x F'
  Tensor norm_scale, norm_shift;
};

Tensor gnn_layer_forward(Tape& tape, const GnnLayerTensors& layer, Tensor node_feats,
                         Tensor edge_feats, const std::vector<int>& src,
                         const std::vector<int>& dst, int node_count, int out_dim,
                         double leaky_slope);

// Node features start as the init positions; edge features are the init
// Euclidean edge lengths. Output is an N x 2 position tensor.
Tensor generator_forward(const GeneratorNet& net, const Graph& g, const Layout& init, Tape& tape,
                         BoundParams* bound_out = nullptr);

// Canonicalization front (translation differentiable; rotation matrix and
// scale factor detached), GNN stack, global mean pooling, scalar score head.
Tensor discriminator_forward(const DiscriminatorNet& net, const Graph& g,
                             const DistanceMatrix& d, Tensor x, Tape& tape,
                             BoundParams* bound_out = nullptr);
Tensor discriminator_forward(const DiscriminatorNet& net, const Graph& g,
                             const DistanceMatrix& d, const Layout& x, Tape& tape,
                             BoundParams* bound_out = nullptr);

// Inference-only generation (fresh tape, value extracted).
Layout generate_layout(const GeneratorNet& net, const Graph& g, const Layout& init);

struct OptimizerState {
  std::vector<double> m, v;  // flattened over all parameter arrays
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double decay_mult = 0.99;  // decoupled multiplicative weight decay per step
};

OptimizerState make_optimizer(const ParamSet& params);

// Decoupled decay (params *= decay_mult) followed by a bias-corrected Adam
// update. Throws NonFiniteGradient before touching anything if any gradient
// is not finite.
void adamw_step(ParamSet& params, const std::vector<std::vector<double>>& grads,
                OptimizerState& state, double lr);

}  // namespace gdraw
