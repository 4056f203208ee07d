#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "gdraw/autodiff.hpp"
#include "gdraw/errors.hpp"
#include "gdraw/rng.hpp"

using namespace gdraw;

namespace {

std::vector<double> random_vec(int count, Rng& rng, double lo = -2, double hi = 2) {
  std::vector<double> v(count);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

// keeps values away from leaky_relu kinks
std::vector<double> random_vec_away_from_zero(int count, Rng& rng) {
  std::vector<double> v = random_vec(count, rng);
  for (auto& x : v)
    if (std::abs(x) < 1e-3) x += x >= 0 ? 0.1 : -0.1;
  return v;
}

}  // namespace

TEST_CASE("forward values: basic ops") {
  Tape tape;
  const Tensor x = tape.input(1, 3, std::vector<double>{-2, 0, 3});
  CHECK(tape.value(tape.leaky_relu(x, 0.01))[0] == doctest::Approx(-0.02));
  CHECK(tape.value(tape.leaky_relu(x, 0.01))[2] == doctest::Approx(3));
  CHECK(tape.value(tape.sigmoid(tape.input(1, 1, std::vector<double>{0.0})))[0] ==
        doctest::Approx(0.5));
  CHECK(tape.scalar(tape.sum(x)) == doctest::Approx(1));
  CHECK_THROWS_AS(tape.log(x), DomainError);
}

TEST_CASE("matmul matches naive loop") {
  Rng rng(41);
  const auto a = random_vec(6, rng);
  const auto b = random_vec(3, rng);
  Tape tape;
  const Tensor at = tape.input(2, 3, a);
  const Tensor bt = tape.input(3, 1, b);
  const Tensor c = tape.matmul(at, bt);
  REQUIRE(c.rows == 2);
  REQUIRE(c.cols == 1);
  for (int i = 0; i < 2; ++i) {
    double expect = 0;
    for (int k = 0; k < 3; ++k) expect += a[i * 3 + k] * b[k];
    CHECK(tape.value(c)[i] == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK_THROWS_AS(tape.matmul(bt, bt), ShapeMismatch);
}

TEST_CASE("scatter_mean star aggregation") {
  Tape tape;
  // three edges all targeting node 0; identical features average to themselves
  const Tensor feats = tape.input(3, 2, std::vector<double>{1, 2, 1, 2, 1, 2});
  const Tensor agg = tape.scatter_mean(feats, {0, 0, 0}, 2);
  CHECK(tape.value(agg)[0] == doctest::Approx(1));
  CHECK(tape.value(agg)[1] == doctest::Approx(2));
  CHECK(tape.value(agg)[2] == 0);  // no incoming rows
}

TEST_CASE("backward: sum gives all-ones gradient") {
  Tape tape;
  const Tensor x = tape.input(2, 3, std::vector<double>{1, 2, 3, 4, 5, 6});
  tape.backward(tape.sum(x));
  for (const double g : tape.grad(x)) CHECK(g == doctest::Approx(1));
}

TEST_CASE("backward: sigmoid at zero") {
  // loss = sigmoid(w * x) with w = 0 -> dL/dw = 0.25 * x
  Tape tape;
  const Tensor w = tape.input(1, 1, std::vector<double>{0.0});
  const Tensor x = tape.input(1, 1, std::vector<double>{3.0});
  tape.backward(tape.sigmoid(tape.elementwise_mul(w, x)));
  CHECK(tape.grad(w)[0] == doctest::Approx(0.75));
}

TEST_CASE("backward rejects non-scalar loss") {
  Tape tape;
  const Tensor x = tape.input(2, 2, std::vector<double>{1, 2, 3, 4});
  CHECK_THROWS_AS(tape.backward(x), NonScalarLoss);
}

TEST_CASE("gradient accumulation through a diamond") {
  // loss = sum(x*x + x*x) -> d/dx = 4x
  Tape tape;
  const Tensor x = tape.input(1, 2, std::vector<double>{1.5, -2.0});
  const Tensor sq = tape.elementwise_mul(x, x);
  tape.backward(tape.sum(tape.add(sq, sq)));
  CHECK(tape.grad(x)[0] == doctest::Approx(6.0));
  CHECK(tape.grad(x)[1] == doctest::Approx(-8.0));
}

TEST_CASE("backward determinism") {
  Rng rng(42);
  const auto x0 = random_vec(8, rng);
  auto run = [&] {
    Tape tape;
    const Tensor x = tape.input(2, 4, x0);
    const Tensor h = tape.leaky_relu(tape.feature_norm(x), 0.1);
    tape.backward(tape.sum(tape.elementwise_mul(h, h)));
    return tape.grad(x);
  };
  CHECK(run() == run());
}

TEST_CASE("grad_check: quadratic is near-exact") {
  Rng rng(43);
  const auto x0 = random_vec(6, rng);
  const double err = grad_check(
      [](Tape& t, Tensor x) { return t.sum(t.elementwise_mul(x, x)); }, 2, 3, x0, 1e-5);
  CHECK(err < 1e-8);
}

TEST_CASE("grad_check on every op") {
  Rng rng(44);
  const double eps = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    const auto x0 = random_vec_away_from_zero(12, rng);
    const auto y0 = random_vec_away_from_zero(12, rng);
    // aux inputs must be fixed up front: grad_check re-invokes the function
    // for every finite-difference probe
    const auto m0 = random_vec(8, rng);
    const auto rc0 = random_vec(8, rng);
    const auto av0 = random_vec(4, rng);
    const auto mv0 = random_vec(4, rng);
    const auto ef0 = random_vec(32, rng);

    auto check = [&](const std::function<Tensor(Tape&, Tensor)>& f, int rows, int cols,
                     const std::vector<double>& x) {
      const double err = grad_check(f, rows, cols, x, eps);
      CHECK(err < 1e-4);
    };

    check([&](Tape& t, Tensor x) { return t.sum(t.add(x, t.input(3, 4, y0))); }, 3, 4, x0);
    check([&](Tape& t, Tensor x) { return t.sum(t.sub(t.input(3, 4, y0), x)); }, 3, 4, x0);
    check([&](Tape& t, Tensor x) { return t.sum(t.scalar_mul(x, -1.7)); }, 3, 4, x0);
    check([&](Tape& t, Tensor x) { return t.sum(t.elementwise_mul(x, t.input(3, 4, y0))); }, 3, 4,
          x0);
    check([&](Tape& t, Tensor x) { return t.sum(t.leaky_relu(x, 0.01)); }, 3, 4, x0);
    check([&](Tape& t, Tensor x) { return t.sum(t.sigmoid(x)); }, 3, 4, x0);
    check([&](Tape& t, Tensor x) { return t.sum(t.softplus(x)); }, 3, 4, x0);
    check([&](Tape& t, Tensor x) { return t.sum(t.matmul(x, t.input(4, 2, m0))); },
          3, 4, x0);
    check([&](Tape& t, Tensor x) { return t.sum(t.row_concat(x, t.input(2, 4, rc0))); },
          3, 4, x0);
    check([&](Tape& t, Tensor x) { return t.sum(t.mean_rows(x)); }, 3, 4, x0);
    check([&](Tape& t, Tensor x) { return t.sum(t.gather_rows(x, {2, 0, 0, 1})); }, 3, 4, x0);
    check([&](Tape& t, Tensor x) { return t.sum(t.scatter_mean(x, {1, 0, 1}, 2)); }, 3, 4, x0);
    check([&](Tape& t, Tensor x) { return t.sum(t.l2_norm_rows(x)); }, 3, 4, x0);
    check([&](Tape& t, Tensor x) {
      return t.sum(t.add_rowvec(x, t.input(1, 4, av0)));
    }, 3, 4, x0);
    check([&](Tape& t, Tensor x) {
      return t.sum(t.mul_rowvec(x, t.input(1, 4, mv0)));
    }, 3, 4, x0);
    check([&](Tape& t, Tensor x) {
      const Tensor y = t.feature_norm(x);
      return t.sum(t.elementwise_mul(y, t.input(3, 4, y0)));
    }, 3, 4, x0);
    check([&](Tape& t, Tensor x) {
      return t.sum(t.edge_messages(x, t.input(4, 8, ef0), {0, 2, 1, 0}, 2));
    }, 3, 4, x0);
    // log needs positive inputs
    const auto pos = random_vec(12, rng, 0.5, 3.0);
    check([&](Tape& t, Tensor x) { return t.sum(t.log(x)); }, 3, 4, pos);
  }
}

TEST_CASE("grad_check on random composite tapes") {
  Rng rng(45);
  int accepted = 0;
  while (accepted < 20) {
    const auto x0 = random_vec_away_from_zero(8, rng);
    const auto w0 = random_vec(8, rng);

    // reject draws whose hidden activations sit near the leaky_relu kink or
    // give feature_norm a near-degenerate column: finite differences are
    // unreliable there even though the analytic gradient is fine
    bool well_conditioned = true;
    double h[2][2];
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double s = 0;
        for (int k = 0; k < 4; ++k) s += x0[i * 4 + k] * w0[k * 2 + j];
        h[i][j] = s;
        if (std::abs(s) < 0.05) well_conditioned = false;
      }
    for (int j = 0; j < 2 && well_conditioned; ++j) {
      auto act = [](double v) { return v > 0 ? v : 0.1 * v; };
      if (std::abs(act(h[0][j]) - act(h[1][j])) < 0.05) well_conditioned = false;
    }
    if (!well_conditioned) continue;
    ++accepted;
    const double err = grad_check(
        [&](Tape& t, Tensor x) {
          const Tensor w = t.input(4, 2, w0);
          const Tensor h = t.leaky_relu(t.matmul(x, w), 0.1);
          const Tensor n = t.feature_norm(h);
          const Tensor s = t.sigmoid(t.mean_rows(n));
          return t.sum(t.softplus(s));
        },
        2, 4, x0, 1e-5);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("feature_norm standardizes columns") {
  Rng rng(46);
  Tape tape;
  const Tensor x = tape.input(10, 3, random_vec(30, rng));
  const auto& v = tape.value(tape.feature_norm(x));
  for (int j = 0; j < 3; ++j) {
    double mean = 0, var = 0;
    for (int i = 0; i < 10; ++i) mean += v[i * 3 + j];
    mean /= 10;
    for (int i = 0; i < 10; ++i) var += (v[i * 3 + j] - mean) * (v[i * 3 + j] - mean);
    var /= 10;
    CHECK(std::abs(mean) < 1e-6);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-6));
  }
  // constant column: centered only, no division blowup
  Tape t2;
  const Tensor c = t2.input(4, 1, std::vector<double>{5, 5, 5, 5});
  for (const double y : t2.value(t2.feature_norm(c))) CHECK(y == doctest::Approx(0));
}

TEST_CASE("shape mismatches throw") {
  Tape tape;
  const Tensor a = tape.input(2, 3, std::vector<double>(6, 1.0));
  const Tensor b = tape.input(3, 2, std::vector<double>(6, 1.0));
  CHECK_THROWS_AS(tape.add(a, b), ShapeMismatch);
  CHECK_THROWS_AS(tape.row_concat(a, b), ShapeMismatch);
  CHECK_THROWS_AS(tape.scatter_mean(a, {0}, 2), ShapeMismatch);
  CHECK_THROWS_AS(tape.gather_rows(a, {5}), ShapeMismatch);
  CHECK_THROWS_AS(tape.add_rowvec(a, b), ShapeMismatch);
}
