#include "gdraw/autodiff.hpp"

#include <cmath>
#include <string>

#include "gdraw/errors.hpp"

namespace gdraw {

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw ShapeMismatch(std::string(op) + ": " + std::to_string(a.rows) + "x" +
                        std::to_string(a.cols) + " vs " + std::to_string(b.rows) + "x" +
                        std::to_string(b.cols));
}

}  // namespace

Tensor Tape::emplace(int rows, int cols) {
  Node n;
  n.rows = rows;
  n.cols = cols;
  n.value.assign(static_cast<size_t>(rows) * cols, 0.0);
  nodes_.push_back(std::move(n));
  return Tensor{static_cast<int>(nodes_.size()) - 1, rows, cols};
}

Tensor Tape::input(int rows, int cols, const double* data) {
  Tensor t = emplace(rows, cols);
  std::copy(data, data + t.count(), node(t).value.begin());
  return t;
}

Tensor Tape::input(int rows, int cols, const std::vector<double>& data) {
  if (static_cast<int>(data.size()) != rows * cols)
    throw ShapeMismatch("input: data length does not match shape");
  return input(rows, cols, data.data());
}

Tensor Tape::constant_scalar(double v) { return input(1, 1, &v); }

double Tape::scalar(Tensor t) const {
  if (t.rows != 1 || t.cols != 1) throw ShapeMismatch("scalar: tensor is not 1x1");
  return nodes_[t.id].value[0];
}

Tensor Tape::add(Tensor a, Tensor b) {
  check_same_shape(a, b, "add");
  Tensor out = emplace(a.rows, a.cols);
  auto& o = node(out);
  const auto& va = node(a).value;
  const auto& vb = node(b).value;
  for (int i = 0; i < out.count(); ++i) o.value[i] = va[i] + vb[i];
  o.back = [this, a, b, out] {
    const auto& g = node(out).grad;
    auto& ga = node(a).grad;
    auto& gb = node(b).grad;
    for (int i = 0; i < out.count(); ++i) {
      ga[i] += g[i];
      gb[i] += g[i];
    }
  };
  return out;
}

Tensor Tape::sub(Tensor a, Tensor b) {
  check_same_shape(a, b, "sub");
  Tensor out = emplace(a.rows, a.cols);
  auto& o = node(out);
  const auto& va = node(a).value;
  const auto& vb = node(b).value;
  for (int i = 0; i < out.count(); ++i) o.value[i] = va[i] - vb[i];
  o.back = [this, a, b, out] {
    const auto& g = node(out).grad;
    auto& ga = node(a).grad;
    auto& gb = node(b).grad;
    for (int i = 0; i < out.count(); ++i) {
      ga[i] += g[i];
      gb[i] -= g[i];
    }
  };
  return out;
}

Tensor Tape::scalar_mul(Tensor a, double s) {
  Tensor out = emplace(a.rows, a.cols);
  auto& o = node(out);
  const auto& va = node(a).value;
  for (int i = 0; i < out.count(); ++i) o.value[i] = va[i] * s;
  o.back = [this, a, out, s] {
    const auto& g = node(out).grad;
    auto& ga = node(a).grad;
    for (int i = 0; i < out.count(); ++i) ga[i] += g[i] * s;
  };
  return out;
}

Tensor Tape::elementwise_mul(Tensor a, Tensor b) {
  check_same_shape(a, b, "elementwise_mul");
  Tensor out = emplace(a.rows, a.cols);
  auto& o = node(out);
  const auto& va = node(a).value;
  const auto& vb = node(b).value;
  for (int i = 0; i < out.count(); ++i) o.value[i] = va[i] * vb[i];
  o.back = [this, a, b, out] {
    const auto& g = node(out).grad;
    const auto& va = node(a).value;
    const auto& vb = node(b).value;
    auto& ga = node(a).grad;
    auto& gb = node(b).grad;
    for (int i = 0; i < out.count(); ++i) {
      ga[i] += g[i] * vb[i];
      gb[i] += g[i] * va[i];
    }
  };
  return out;
}

Tensor Tape::leaky_relu(Tensor a, double slope) {
  if (slope <= 0 || slope >= 1) throw ArgumentError("leaky_relu slope must be in (0, 1)");
  Tensor out = emplace(a.rows, a.cols);
  auto& o = node(out);
  const auto& va = node(a).value;
  for (int i = 0; i < out.count(); ++i) o.value[i] = va[i] >= 0 ? va[i] : slope * va[i];
  o.back = [this, a, out, slope] {
    const auto& g = node(out).grad;
    const auto& va = node(a).value;
    auto& ga = node(a).grad;
    // derivative at exactly 0 uses the positive-side slope 1
    for (int i = 0; i < out.count(); ++i) ga[i] += g[i] * (va[i] >= 0 ? 1.0 : slope);
  };
  return out;
}

Tensor Tape::sigmoid(Tensor a) {
  Tensor out = emplace(a.rows, a.cols);
  auto& o = node(out);
  const auto& va = node(a).value;
  for (int i = 0; i < out.count(); ++i)
    o.value[i] = va[i] >= 0 ? 1.0 / (1.0 + std::exp(-va[i]))
                            : std::exp(va[i]) / (1.0 + std::exp(va[i]));
  o.back = [this, a, out] {
    const auto& g = node(out).grad;
    const auto& vo = node(out).value;
    auto& ga = node(a).grad;
    for (int i = 0; i < out.count(); ++i) ga[i] += g[i] * vo[i] * (1.0 - vo[i]);
  };
  return out;
}

Tensor Tape::log(Tensor a) {
  Tensor out = emplace(a.rows, a.cols);
  auto& o = node(out);
  const auto& va = node(a).value;
  for (int i = 0; i < out.count(); ++i) {
    if (va[i] <= 0) throw DomainError("log of non-positive value");
    o.value[i] = std::log(va[i]);
  }
  o.back = [this, a, out] {
    const auto& g = node(out).grad;
    const auto& va = node(a).value;
    auto& ga = node(a).grad;
    for (int i = 0; i < out.count(); ++i) ga[i] += g[i] / va[i];
  };
  return out;
}

Tensor Tape::softplus(Tensor a) {
  Tensor out = emplace(a.rows, a.cols);
  auto& o = node(out);
  const auto& va = node(a).value;
  for (int i = 0; i < out.count(); ++i)
    o.value[i] = va[i] > 0 ? va[i] + std::log1p(std::exp(-va[i])) : std::log1p(std::exp(va[i]));
  o.back = [this, a, out] {
    const auto& g = node(out).grad;
    const auto& va = node(a).value;
    auto& ga = node(a).grad;
    for (int i = 0; i < out.count(); ++i) {
      const double s = va[i] >= 0 ? 1.0 / (1.0 + std::exp(-va[i]))
                                  : std::exp(va[i]) / (1.0 + std::exp(va[i]));
      ga[i] += g[i] * s;
    }
  };
  return out;
}

Tensor Tape::matmul(Tensor a, Tensor b) {
  if (a.cols != b.rows)
    throw ShapeMismatch("matmul: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                        " * " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
  Tensor out = emplace(a.rows, b.cols);
  auto& o = node(out);
  const auto& va = node(a).value;
  const auto& vb = node(b).value;
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      const double aik = va[static_cast<size_t>(i) * a.cols + k];
      for (int j = 0; j < b.cols; ++j)
        o.value[static_cast<size_t>(i) * b.cols + j] += aik * vb[static_cast<size_t>(k) * b.cols + j];
    }
  o.back = [this, a, b, out] {
    const auto& g = node(out).grad;
    const auto& va = node(a).value;
    const auto& vb = node(b).value;
    auto& ga = node(a).grad;
    auto& gb = node(b).grad;
    // dA += dC * B^T
    for (int i = 0; i < a.rows; ++i)
      for (int k = 0; k < a.cols; ++k) {
        double s = 0;
        for (int j = 0; j < b.cols; ++j)
          s += g[static_cast<size_t>(i) * b.cols + j] * vb[static_cast<size_t>(k) * b.cols + j];
        ga[static_cast<size_t>(i) * a.cols + k] += s;
      }
    // dB += A^T * dC
    for (int k = 0; k < a.cols; ++k)
      for (int j = 0; j < b.cols; ++j) {
        double s = 0;
        for (int i = 0; i < a.rows; ++i)
          s += va[static_cast<size_t>(i) * a.cols + k] * g[static_cast<size_t>(i) * b.cols + j];
        gb[static_cast<size_t>(k) * b.cols + j] += s;
      }
  };
  return out;
}

Tensor Tape::row_concat(Tensor a, Tensor b) {
  if (a.cols != b.cols) throw ShapeMismatch("row_concat: column counts differ");
  Tensor out = emplace(a.rows + b.rows, a.cols);
  auto& o = node(out);
  const auto& va = node(a).value;
  const auto& vb = node(b).value;
  std::copy(va.begin(), va.end(), o.value.begin());
  std::copy(vb.begin(), vb.end(), o.value.begin() + va.size());
  o.back = [this, a, b, out] {
    const auto& g = node(out).grad;
    auto& ga = node(a).grad;
    auto& gb = node(b).grad;
    for (int i = 0; i < a.count(); ++i) ga[i] += g[i];
    for (int i = 0; i < b.count(); ++i) gb[i] += g[a.count() + i];
  };
  return out;
}

Tensor Tape::mean_rows(Tensor a) {
  Tensor out = emplace(1, a.cols);
  auto& o = node(out);
  const auto& va = node(a).value;
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) o.value[j] += va[static_cast<size_t>(i) * a.cols + j];
  for (int j = 0; j < a.cols; ++j) o.value[j] /= a.rows;
  o.back = [this, a, out] {
    const auto& g = node(out).grad;
    auto& ga = node(a).grad;
    for (int i = 0; i < a.rows; ++i)
      for (int j = 0; j < a.cols; ++j) ga[static_cast<size_t>(i) * a.cols + j] += g[j] / a.rows;
  };
  return out;
}

Tensor Tape::sum(Tensor a) {
  Tensor out = emplace(1, 1);
  auto& o = node(out);
  const auto& va = node(a).value;
  for (const double v : va) o.value[0] += v;
  o.back = [this, a, out] {
    const double g = node(out).grad[0];
    auto& ga = node(a).grad;
    for (int i = 0; i < a.count(); ++i) ga[i] += g;
  };
  return out;
}

Tensor Tape::gather_rows(Tensor a, std::vector<int> index) {
  for (const int i : index)
    if (i < 0 || i >= a.rows) throw ShapeMismatch("gather_rows: index out of range");
  Tensor out = emplace(static_cast<int>(index.size()), a.cols);
  auto& o = node(out);
  const auto& va = node(a).value;
  for (size_t k = 0; k < index.size(); ++k)
    std::copy(va.begin() + static_cast<size_t>(index[k]) * a.cols,
              va.begin() + static_cast<size_t>(index[k] + 1) * a.cols,
              o.value.begin() + k * a.cols);
  o.back = [this, a, out, index = std::move(index)] {
    const auto& g = node(out).grad;
    auto& ga = node(a).grad;
    for (size_t k = 0; k < index.size(); ++k)
      for (int j = 0; j < a.cols; ++j)
        ga[static_cast<size_t>(index[k]) * a.cols + j] += g[k * a.cols + j];
  };
  return out;
}

Tensor Tape::scatter_mean(Tensor a, std::vector<int> index, int size) {
  if (static_cast<int>(index.size()) != a.rows)
    throw ShapeMismatch("scatter_mean: index length must equal row count");
  for (const int t : index)
    if (t < 0 || t >= size) throw ShapeMismatch("scatter_mean: target out of range");
  std::vector<int> counts(size, 0);
  for (const int t : index) ++counts[t];

  Tensor out = emplace(size, a.cols);
  auto& o = node(out);
  const auto& va = node(a).value;
  for (int e = 0; e < a.rows; ++e)
    for (int j = 0; j < a.cols; ++j)
      o.value[static_cast<size_t>(index[e]) * a.cols + j] += va[static_cast<size_t>(e) * a.cols + j];
  for (int t = 0; t < size; ++t)
    if (counts[t] > 0)
      for (int j = 0; j < a.cols; ++j) o.value[static_cast<size_t>(t) * a.cols + j] /= counts[t];
  o.back = [this, a, out, index = std::move(index), counts = std::move(counts)] {
    const auto& g = node(out).grad;
    auto& ga = node(a).grad;
    for (int e = 0; e < a.rows; ++e)
      for (int j = 0; j < a.cols; ++j)
        ga[static_cast<size_t>(e) * a.cols + j] +=
            g[static_cast<size_t>(index[e]) * a.cols + j] / counts[index[e]];
  };
  return out;
}

Tensor Tape::l2_norm_rows(Tensor a) {
  Tensor out = emplace(a.rows, 1);
  auto& o = node(out);
  const auto& va = node(a).value;
  for (int i = 0; i < a.rows; ++i) {
    double s = 0;
    for (int j = 0; j < a.cols; ++j) {
      const double v = va[static_cast<size_t>(i) * a.cols + j];
      s += v * v;
    }
    o.value[i] = std::sqrt(s);
  }
  o.back = [this, a, out] {
    const auto& g = node(out).grad;
    const auto& va = node(a).value;
    const auto& vo = node(out).value;
    auto& ga = node(a).grad;
    for (int i = 0; i < a.rows; ++i) {
      if (vo[i] <= 0) continue;  // zero row: subgradient 0
      for (int j = 0; j < a.cols; ++j)
        ga[static_cast<size_t>(i) * a.cols + j] +=
            g[i] * va[static_cast<size_t>(i) * a.cols + j] / vo[i];
    }
  };
  return out;
}

Tensor Tape::add_rowvec(Tensor a, Tensor row) {
  if (row.rows != 1 || row.cols != a.cols) throw ShapeMismatch("add_rowvec: row must be 1 x cols");
  Tensor out = emplace(a.rows, a.cols);
  auto& o = node(out);
  const auto& va = node(a).value;
  const auto& vr = node(row).value;
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j)
      o.value[static_cast<size_t>(i) * a.cols + j] = va[static_cast<size_t>(i) * a.cols + j] + vr[j];
  o.back = [this, a, row, out] {
    const auto& g = node(out).grad;
    auto& ga = node(a).grad;
    auto& gr = node(row).grad;
    for (int i = 0; i < a.rows; ++i)
      for (int j = 0; j < a.cols; ++j) {
        ga[static_cast<size_t>(i) * a.cols + j] += g[static_cast<size_t>(i) * a.cols + j];
        gr[j] += g[static_cast<size_t>(i) * a.cols + j];
      }
  };
  return out;
}

Tensor Tape::mul_rowvec(Tensor a, Tensor row) {
  if (row.rows != 1 || row.cols != a.cols) throw ShapeMismatch("mul_rowvec: row must be 1 x cols");
  Tensor out = emplace(a.rows, a.cols);
  auto& o = node(out);
  const auto& va = node(a).value;
  const auto& vr = node(row).value;
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j)
      o.value[static_cast<size_t>(i) * a.cols + j] = va[static_cast<size_t>(i) * a.cols + j] * vr[j];
  o.back = [this, a, row, out] {
    const auto& g = node(out).grad;
    const auto& va = node(a).value;
    const auto& vr = node(row).value;
    auto& ga = node(a).grad;
    auto& gr = node(row).grad;
    for (int i = 0; i < a.rows; ++i)
      for (int j = 0; j < a.cols; ++j) {
        const size_t idx = static_cast<size_t>(i) * a.cols + j;
        ga[idx] += g[idx] * vr[j];
        gr[j] += g[idx] * va[idx];
      }
  };
  return out;
}

Tensor Tape::feature_norm(Tensor a, double var_floor) {
  const int m = a.rows, c = a.cols;
  Tensor out = emplace(m, c);
  auto& o = node(out);
  const auto& va = node(a).value;
  std::vector<double> mean(c, 0), stddev(c, 0);
  std::vector<char> active(c, 0);
  for (int j = 0; j < c; ++j) {
    double mu = 0;
    for (int i = 0; i < m; ++i) mu += va[static_cast<size_t>(i) * c + j];
    mu /= m;
    double var = 0;
    for (int i = 0; i < m; ++i) {
      const double dv = va[static_cast<size_t>(i) * c + j] - mu;
      var += dv * dv;
    }
    var /= m;
    mean[j] = mu;
    if (var >= var_floor) {
      active[j] = 1;
      stddev[j] = std::sqrt(var);
      for (int i = 0; i < m; ++i)
        o.value[static_cast<size_t>(i) * c + j] = (va[static_cast<size_t>(i) * c + j] - mu) / stddev[j];
    } else {
      stddev[j] = 1.0;
      for (int i = 0; i < m; ++i)
        o.value[static_cast<size_t>(i) * c + j] = va[static_cast<size_t>(i) * c + j] - mu;
    }
  }
  o.back = [this, a, out, stddev = std::move(stddev), active = std::move(active)] {
    const int m = a.rows, c = a.cols;
    const auto& g = node(out).grad;
    const auto& y = node(out).value;
    auto& ga = node(a).grad;
    for (int j = 0; j < c; ++j) {
      double gsum = 0, gysum = 0;
      for (int i = 0; i < m; ++i) {
        gsum += g[static_cast<size_t>(i) * c + j];
        gysum += g[static_cast<size_t>(i) * c + j] * y[static_cast<size_t>(i) * c + j];
      }
      for (int i = 0; i < m; ++i) {
        const size_t idx = static_cast<size_t>(i) * c + j;
        if (active[j])
          ga[idx] += (g[idx] - gsum / m - y[idx] * gysum / m) / stddev[j];
        else
          ga[idx] += g[idx] - gsum / m;
      }
    }
  };
  return out;
}

Tensor Tape::edge_messages(Tensor x, Tensor w, std::vector<int> src, int fp) {
  const int f = x.cols;
  if (w.cols != f * fp) throw ShapeMismatch("edge_messages: weight cols must be F*fp");
  if (static_cast<int>(src.size()) != w.rows)
    throw ShapeMismatch("edge_messages: src length must equal weight rows");
  for (const int s : src)
    if (s < 0 || s >= x.rows) throw ShapeMismatch("edge_messages: source index out of range");

  const int m = w.rows;
  Tensor out = emplace(m, fp);
  auto& o = node(out);
  const auto& vx = node(x).value;
  const auto& vw = node(w).value;
  for (int e = 0; e < m; ++e)
    for (int k = 0; k < f; ++k) {
      const double xv = vx[static_cast<size_t>(src[e]) * f + k];
      for (int q = 0; q < fp; ++q)
        o.value[static_cast<size_t>(e) * fp + q] += xv * vw[static_cast<size_t>(e) * f * fp + k * fp + q];
    }
  o.back = [this, x, w, out, src = std::move(src), fp, f] {
    const int m = w.rows;
    const auto& g = node(out).grad;
    const auto& vx = node(x).value;
    const auto& vw = node(w).value;
    auto& gx = node(x).grad;
    auto& gw = node(w).grad;
    for (int e = 0; e < m; ++e)
      for (int k = 0; k < f; ++k) {
        const double xv = vx[static_cast<size_t>(src[e]) * f + k];
        double s = 0;
        for (int q = 0; q < fp; ++q) {
          const double ge = g[static_cast<size_t>(e) * fp + q];
          s += ge * vw[static_cast<size_t>(e) * f * fp + k * fp + q];
          gw[static_cast<size_t>(e) * f * fp + k * fp + q] += xv * ge;
        }
        gx[static_cast<size_t>(src[e]) * f + k] += s;
      }
  };
  return out;
}

void Tape::backward(Tensor loss) {
  if (loss.rows != 1 || loss.cols != 1) throw NonScalarLoss("backward requires a 1x1 loss node");
  for (auto& n : nodes_) n.grad.assign(n.value.size(), 0.0);
  nodes_[loss.id].grad[0] = 1.0;
  for (int i = loss.id; i >= 0; --i)
    if (nodes_[i].back) nodes_[i].back();
}

double grad_check(const std::function<Tensor(Tape&, Tensor)>& f, int rows, int cols,
                  const std::vector<double>& x0, double eps) {
  if (eps <= 0) throw ArgumentError("grad_check eps must be > 0");
  Tape tape;
  const Tensor x = tape.input(rows, cols, x0);
  const Tensor loss = f(tape, x);
  tape.backward(loss);
  const std::vector<double> analytic = tape.grad(x);

  auto eval = [&](const std::vector<double>& v) {
    Tape t;
    const Tensor xt = t.input(rows, cols, v);
    return t.scalar(f(t, xt));
  };

  double max_err = 0;
  std::vector<double> v = x0;
  for (size_t i = 0; i < v.size(); ++i) {
    const double orig = v[i];
    v[i] = orig + eps;
    const double hi = eval(v);
    v[i] = orig - eps;
    const double lo = eval(v);
    v[i] = orig;
    const double numeric = (hi - lo) / (2 * eps);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    max_err = std::max(max_err, std::abs(analytic[i] - numeric) / denom);
  }
  return max_err;
}

}  // namespace gdraw
