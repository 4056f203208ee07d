#pragma once

#include <functional>
#include <vector>

namespace gdraw {

// Handle into a Tape node. Plain value type; only meaningful together with
// the tape that created it.
struct Tensor {
  int id = -1;
  int rows = 0;
  int cols = 0;

  int count() const { return rows * cols; }
};

// Reverse-mode tape over dense row-major matrices. Nodes are appended in
// topological order; backward() walks them in strict reverse order.
class Tape {
 public:
  // Leaves
  Tensor input(int rows, int cols, const double* data);
  Tensor input(int rows, int cols, const std::vector<double>& data);
  Tensor constant_scalar(double v);

  // Elementwise / shape-preserving
  Tensor add(Tensor a, Tensor b);
  Tensor sub(Tensor a, Tensor b);
  Tensor scalar_mul(Tensor a, double s);
  Tensor elementwise_mul(Tensor a, Tensor b);
  Tensor leaky_relu(Tensor a, double slope);
  Tensor sigmoid(Tensor a);
  Tensor log(Tensor a);
  Tensor softplus(Tensor a);

  // Structural
  Tensor matmul(Tensor a, Tensor b);
  Tensor row_concat(Tensor a, Tensor b);
  Tensor mean_rows(Tensor a);                     // (r x c) -> (1 x c)
  Tensor sum(Tensor a);                           // -> (1 x 1)
  Tensor gather_rows(Tensor a, std::vector<int> index);
  Tensor scatter_mean(Tensor a, std::vector<int> index, int size);
  Tensor l2_norm_rows(Tensor a);                  // (r x c) -> (r x 1)
  Tensor add_rowvec(Tensor a, Tensor row);        // broadcast (1 x c) over rows
  Tensor mul_rowvec(Tensor a, Tensor row);

  // Per-column standardization to mean 0 / variance 1 over rows; columns
  // with variance below var_floor are centered only.
  Tensor feature_norm(Tensor a, double var_floor = 1e-12);

  // Batched per-row linear maps: out[e] = x[src[e]] (1 x F) * w[e] (F x fp).
  // w rows hold the F*fp matrix entries row-major.
  Tensor edge_messages(Tensor x, Tensor w, std::vector<int> src, int fp);

  const std::vector<double>& value(Tensor t) const { return nodes_[t.id].value; }
  const std::vector<double>& grad(Tensor t) const { return nodes_[t.id].grad; }
  double scalar(Tensor t) const;

  // Zeroes all gradients, seeds the scalar loss with 1 and sweeps the tape
  // in reverse append order.
  void backward(Tensor loss);

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    int rows, cols;
    std::vector<double> value;
    std::vector<double> grad;
    std::function<void()> back;  // empty for leaves
  };

  Tensor emplace(int rows, int cols);
  Node& node(Tensor t) { return nodes_[t.id]; }

  std::vector<Node> nodes_;
};

// Central-difference check of d f(x) / dx. Returns the max relative error
// over all elements, with denominator max(|analytic|, |numeric|, 1e-8).
double grad_check(const std::function<Tensor(Tape&, Tensor)>& f, int rows, int cols,
                  const std::vector<double>& x0, double eps);

}  // namespace gdraw
