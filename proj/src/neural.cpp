#include "gdraw/neural.hpp"

#include <cmath>

#include "gdraw/errors.hpp"
#include "gdraw/rng.hpp"

namespace gdraw {

void ArchConfig::validate() const {
  if (gen_layers <= 0 || gen_dim <= 0 || dis_layers <= 0 || dis_dim <= 0)
    throw ValidationError("architecture sizes must be positive");
  if (leaky_slope <= 0 || leaky_slope >= 1)
    throw ValidationError("leaky_slope must be in (0, 1)");
}

size_t ParamSet::total() const {
  size_t n = 0;
  for (const auto& a : arrays) n += a.data.size();
  return n;
}

const ParamArray& ParamSet::find(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return a;
  throw ArgumentError("no parameter array named " + name);
}

BoundParams bind_params(Tape& tape, const ParamSet& params) {
  BoundParams bound;
  bound.nodes.reserve(params.arrays.size());
  for (const auto& a : params.arrays) bound.nodes.push_back(tape.input(a.rows, a.cols, a.data));
  return bound;
}

std::vector<std::vector<double>> collect_grads(const Tape& tape, const BoundParams& bound) {
  std::vector<std::vector<double>> grads;
  grads.reserve(bound.nodes.size());
  for (const Tensor t : bound.nodes) grads.push_back(tape.grad(t));
  return grads;
}

namespace {

ParamArray xavier(Rng& rng, std::string name, int rows, int cols) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  ParamArray a{std::move(name), rows, cols, {}};
  a.data.resize(static_cast<size_t>(rows) * cols);
  for (auto& v : a.data) v = rng.uniform(-limit, limit);
  return a;
}

ParamArray filled(std::string name, int rows, int cols, double value) {
  return ParamArray{std::move(name), rows, cols,
                    std::vector<double>(static_cast<size_t>(rows) * cols, value)};
}

void append_gnn_layer(ParamSet& set, Rng& rng, const std::string& prefix, int in_dim,
                      int out_dim) {
  set.arrays.push_back(xavier(rng, prefix + ".filter_w", 1, in_dim * out_dim));
  set.arrays.push_back(filled(prefix + ".filter_b", 1, in_dim * out_dim, 0));
  set.arrays.push_back(xavier(rng, prefix + ".root_w", in_dim, out_dim));
  set.arrays.push_back(xavier(rng, prefix + ".dense_w", out_dim, out_dim));
  set.arrays.push_back(filled(prefix + ".dense_b", 1, out_dim, 0));
  set.arrays.push_back(filled(prefix + ".norm_scale", 1, out_dim, 1));
  set.arrays.push_back(filled(prefix + ".norm_shift", 1, out_dim, 0));
}

// arrays-per-layer count; layers are stored contiguously, head arrays last
constexpr int kLayerArrays = 7;

GnnLayerTensors layer_tensors(const BoundParams& bound, int layer) {
  const int base = layer * kLayerArrays;
  return GnnLayerTensors{bound.nodes[base],     bound.nodes[base + 1], bound.nodes[base + 2],
                         bound.nodes[base + 3], bound.nodes[base + 4], bound.nodes[base + 5],
                         bound.nodes[base + 6]};
}

// directed edge arrays (both directions of every undirected edge)
void directed_edges(const Graph& g, std::vector<int>& src, std::vector<int>& dst) {
  src.clear();
  dst.clear();
  src.reserve(2 * g.edge_count());
  dst.reserve(2 * g.edge_count());
  for (const auto& [u, v] : g.edges()) {
    src.push_back(u);
    dst.push_back(v);
    src.push_back(v);
    dst.push_back(u);
  }
}

Tensor edge_lengths_on_tape(Tape& tape, Tensor positions, const std::vector<int>& src,
                            const std::vector<int>& dst) {
  const Tensor a = tape.gather_rows(positions, src);
  const Tensor b = tape.gather_rows(positions, dst);
  return tape.l2_norm_rows(tape.sub(a, b));
}

}  // namespace

std::pair<GeneratorNet, DiscriminatorNet> init_params(const ArchConfig& cfg, uint64_t seed) {
  cfg.validate();
  GeneratorNet gen{cfg, {}};
  DiscriminatorNet dis{cfg, {}};

  Rng grng(Rng::derive_seed(seed, "gen-params"));
  for (int l = 0; l < cfg.gen_layers; ++l)
    append_gnn_layer(gen.params, grng, "g.l" + std::to_string(l), l == 0 ? 2 : cfg.gen_dim,
                     cfg.gen_dim);
  gen.params.arrays.push_back(xavier(grng, "g.proj_w", cfg.gen_dim, 2));
  gen.params.arrays.push_back(filled("g.proj_b", 1, 2, 0));

  Rng drng(Rng::derive_seed(seed, "dis-params"));
  for (int l = 0; l < cfg.dis_layers; ++l)
    append_gnn_layer(dis.params, drng, "d.l" + std::to_string(l), l == 0 ? 2 : cfg.dis_dim,
                     cfg.dis_dim);
  dis.params.arrays.push_back(xavier(drng, "d.head_w", cfg.dis_dim, 1));
  dis.params.arrays.push_back(filled("d.head_b", 1, 1, 0));

  return {std::move(gen), std::move(dis)};
}

Tensor gnn_layer_forward(Tape& tape, const GnnLayerTensors& layer, Tensor node_feats,
                         Tensor edge_feats, const std::vector<int>& src,
                         const std::vector<int>& dst, int node_count, int out_dim,
                         double leaky_slope) {
  // per-edge filter network: edge scalar -> F x F' message matrix
  const Tensor edge_w = tape.add_rowvec(tape.matmul(edge_feats, layer.filter_w), layer.filter_b);
  const Tensor msgs = tape.edge_messages(node_feats, edge_w, src, out_dim);
  const Tensor agg = tape.scatter_mean(msgs, dst, node_count);
  const Tensor conv = tape.add(agg, tape.matmul(node_feats, layer.root_w));
  const Tensor dense = tape.add_rowvec(tape.matmul(conv, layer.dense_w), layer.dense_b);
  const Tensor norm = tape.add_rowvec(
      tape.mul_rowvec(tape.feature_norm(dense), layer.norm_scale), layer.norm_shift);
  return tape.leaky_relu(norm, leaky_slope);
}

Tensor generator_forward(const GeneratorNet& net, const Graph& g, const Layout& init, Tape& tape,
                         BoundParams* bound_out) {
  const int n = g.node_count();
  init.validate(n);

  BoundParams bound = bind_params(tape, net.params);
  std::vector<int> src, dst;
  directed_edges(g, src, dst);

  std::vector<double> init_flat;
  init_flat.reserve(static_cast<size_t>(n) * 2);
  for (const auto& p : init.pos) {
    init_flat.push_back(p[0]);
    init_flat.push_back(p[1]);
  }
  const Tensor positions = tape.input(n, 2, init_flat);
  const Tensor edge_feats = edge_lengths_on_tape(tape, positions, src, dst);

  Tensor h = positions;
  for (int l = 0; l < net.cfg.gen_layers; ++l)
    h = gnn_layer_forward(tape, layer_tensors(bound, l), h, edge_feats, src, dst, n,
                          net.cfg.gen_dim, net.cfg.leaky_slope);

  const size_t head = net.params.arrays.size() - 2;
  const Tensor out =
      tape.add_rowvec(tape.matmul(h, bound.nodes[head]), bound.nodes[head + 1]);
  if (bound_out) *bound_out = std::move(bound);
  return out;
}

Tensor discriminator_forward(const DiscriminatorNet& net, const Graph& g,
                             const DistanceMatrix& d, Tensor x, Tape& tape,
                             BoundParams* bound_out) {
  const int n = g.node_count();
  if (x.rows != n || x.cols != 2) throw ShapeMismatch("discriminator input must be N x 2");

  BoundParams bound = bind_params(tape, net.params);

  // canonicalization front: centering stays on the tape; the rotation
  // matrix and scale factor are computed from forward values and applied
  // as constants
  const Tensor centered = tape.add_rowvec(x, tape.scalar_mul(tape.mean_rows(x), -1.0));
  Layout centered_vals;
  centered_vals.pos.resize(n);
  const auto& cv = tape.value(centered);
  for (int i = 0; i < n; ++i) centered_vals.pos[i] = {cv[2 * i], cv[2 * i + 1]};
  const auto rot = pca_rotation_matrix(centered_vals);
  const double rot_flat[4] = {rot[0][0], rot[0][1], rot[1][0], rot[1][1]};
  const Tensor rotated = tape.matmul(centered, tape.input(2, 2, rot_flat));
  const double s = optimal_scale_factor(pca_rotate(centered_vals), d);
  const Tensor canonical = tape.scalar_mul(rotated, s);

  std::vector<int> src, dst;
  directed_edges(g, src, dst);
  const Tensor edge_feats = edge_lengths_on_tape(tape, canonical, src, dst);

  Tensor h = canonical;
  for (int l = 0; l < net.cfg.dis_layers; ++l)
    h = gnn_layer_forward(tape, layer_tensors(bound, l), h, edge_feats, src, dst, n,
                          net.cfg.dis_dim, net.cfg.leaky_slope);

  const size_t head = net.params.arrays.size() - 2;
  const Tensor score = tape.add_rowvec(tape.matmul(tape.mean_rows(h), bound.nodes[head]),
                                       bound.nodes[head + 1]);
  if (bound_out) *bound_out = std::move(bound);
  return score;
}

Tensor discriminator_forward(const DiscriminatorNet& net, const Graph& g,
                             const DistanceMatrix& d, const Layout& x, Tape& tape,
                             BoundParams* bound_out) {
  x.validate(g.node_count());
  std::vector<double> flat;
  flat.reserve(x.pos.size() * 2);
  for (const auto& p : x.pos) {
    flat.push_back(p[0]);
    flat.push_back(p[1]);
  }
  const Tensor xt = tape.input(g.node_count(), 2, flat);
  return discriminator_forward(net, g, d, xt, tape, bound_out);
}

Layout generate_layout(const GeneratorNet& net, const Graph& g, const Layout& init) {
  Tape tape;
  const Tensor out = generator_forward(net, g, init, tape);
  const auto& v = tape.value(out);
  Layout x;
  x.pos.resize(g.node_count());
  for (int i = 0; i < g.node_count(); ++i) x.pos[i] = {v[2 * i], v[2 * i + 1]};
  return x;
}

OptimizerState make_optimizer(const ParamSet& params) {
  OptimizerState s;
  s.m.assign(params.total(), 0.0);
  s.v.assign(params.total(), 0.0);
  return s;
}

void adamw_step(ParamSet& params, const std::vector<std::vector<double>>& grads,
                OptimizerState& state, double lr) {
  if (grads.size() != params.arrays.size())
    throw ShapeMismatch("adamw_step: gradient count does not match parameter arrays");
  size_t total = 0;
  for (size_t a = 0; a < grads.size(); ++a) {
    if (grads[a].size() != params.arrays[a].data.size())
      throw ShapeMismatch("adamw_step: gradient shape mismatch in " + params.arrays[a].name);
    for (const double g : grads[a])
      if (!std::isfinite(g))
        throw NonFiniteGradient("in parameter array " + params.arrays[a].name);
    total += grads[a].size();
  }
  if (total != state.m.size()) throw ShapeMismatch("adamw_step: optimizer state size mismatch");

  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  size_t k = 0;
  for (size_t a = 0; a < grads.size(); ++a) {
    auto& data = params.arrays[a].data;
    for (size_t i = 0; i < data.size(); ++i, ++k) {
      data[i] *= state.decay_mult;
      const double g = grads[a][i];
      state.m[k] = state.beta1 * state.m[k] + (1 - state.beta1) * g;
      state.v[k] = state.beta2 * state.v[k] + (1 - state.beta2) * g * g;
      const double mhat = state.m[k] / bc1;
      const double vhat = state.v[k] / bc2;
      data[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace gdraw
