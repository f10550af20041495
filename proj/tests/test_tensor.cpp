#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "orgmol/tensor/adam.hpp"
#include "orgmol/tensor/tape.hpp"
#include "orgmol/tensor/tensor.hpp"

using orgmol::Adam;
using orgmol::AdamConfig;
using orgmol::ShapeMismatch;
using orgmol::Tape;
using orgmol::Tensor;

namespace {

Tensor random_tensor(std::vector<int> shape, std::mt19937& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Tensor t(std::move(shape));
  for (double& v : t.data) v = dist(rng);
  return t;
}

// Central finite differences on every entry of every input tensor.
// `f` rebuilds the graph from its leaf ids and returns the scalar loss node.
void check_gradients(
    std::vector<Tensor> inputs,
    const std::function<Tape::NodeId(Tape&, std::vector<Tape::NodeId>)>& f,
    double h = 1e-5, double tol = 1e-5) {
  Tape tape;
  std::vector<Tape::NodeId> ids;
  for (const Tensor& in : inputs) ids.push_back(tape.leaf(in, true));
  tape.backward(f(tape, ids));

  for (size_t k = 0; k < inputs.size(); ++k) {
    const Tensor& analytic = tape.grad(ids[k]);
    REQUIRE(analytic.size() == inputs[k].size());
    for (size_t i = 0; i < inputs[k].size(); ++i) {
      auto eval = [&](double delta) {
        std::vector<Tensor> shifted = inputs;
        shifted[k].data[i] += delta;
        Tape t2;
        std::vector<Tape::NodeId> ids2;
        for (const Tensor& in : shifted) ids2.push_back(t2.leaf(in, true));
        return t2.value(f(t2, ids2)).data[0];
      };
      double numeric = (eval(h) - eval(-h)) / (2.0 * h);
      double denom = std::max({std::abs(numeric), std::abs(analytic.data[i]), 1.0});
      REQUIRE(std::abs(numeric - analytic.data[i]) / denom < tol);
    }
  }
}

}  // namespace

TEST_CASE("tensor basics") {
  Tensor t({2, 3});
  REQUIRE(t.size() == 6);
  REQUIRE(t.rows() == 2);
  REQUIRE(t.cols() == 3);
  t.at(1, 2) = 4.5;
  REQUIRE(t.data[5] == 4.5);
  REQUIRE(t.all_finite());
  t.at(0, 0) = std::numeric_limits<double>::infinity();
  REQUIRE_FALSE(t.all_finite());
  REQUIRE_THROWS_AS(Tensor({2, 2}, std::vector<double>{1.0}), ShapeMismatch);
}

TEST_CASE("gemm matches a hand computation") {
  Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor b({3, 2}, {7, 8, 9, 10, 11, 12});
  Tensor out({2, 2});
  orgmol::gemm(a, false, b, false, out);
  REQUIRE(out.at(0, 0) == 58.0);
  REQUIRE(out.at(0, 1) == 64.0);
  REQUIRE(out.at(1, 0) == 139.0);
  REQUIRE(out.at(1, 1) == 154.0);

  Tensor outT({3, 3});
  orgmol::gemm(a, true, b, true, outT);
  Tensor expect({3, 3});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int p = 0; p < 2; ++p) expect.at(i, j) += a.at(p, i) * b.at(j, p);
  for (size_t i = 0; i < 9; ++i)
    REQUIRE(outT.data[i] == Catch::Approx(expect.data[i]));
}

TEST_CASE("analytic gradients of simple ops") {
  SECTION("sum of squares") {
    Tape tape;
    auto x = tape.leaf(Tensor({1, 2}, {1.0, 2.0}), true);
    auto loss = tape.sum(tape.mul(x, x));
    tape.backward(loss);
    REQUIRE(tape.grad(x).data == std::vector<double>{2.0, 4.0});
  }
  SECTION("relu gate") {
    Tape tape;
    auto x = tape.leaf(Tensor({1, 3}, {-1.0, 0.0, 2.0}), true);
    auto loss = tape.sum(tape.relu(x));
    tape.backward(loss);
    REQUIRE(tape.grad(x).data == std::vector<double>{0.0, 0.0, 1.0});
  }
  SECTION("mean") {
    Tape tape;
    auto x = tape.leaf(Tensor({2, 2}, {1.0, 2.0, 3.0, 4.0}), true);
    auto loss = tape.mean(x);
    tape.backward(loss);
    for (double g : tape.grad(x).data) REQUIRE(g == Catch::Approx(0.25));
  }
  SECTION("fan-out accumulates") {
    Tape tape;
    auto x = tape.leaf(Tensor({1, 1}, {3.0}), true);
    auto loss = tape.sum(tape.add(x, x));
    tape.backward(loss);
    REQUIRE(tape.grad(x).data[0] == 2.0);
  }
}

TEST_CASE("softmax rows") {
  Tape tape;
  auto x = tape.leaf(Tensor({1, 4}, {2.0, 0.0, 0.0, 0.0}), true);
  auto y = tape.softmax_rows(x);
  const Tensor& out = tape.value(y);
  REQUIRE(out.at(0, 0) == Catch::Approx(0.71123459).epsilon(1e-6));
  REQUIRE(out.at(0, 1) == Catch::Approx(0.09625514).epsilon(1e-6));
  REQUIRE(out.at(0, 2) == Catch::Approx(0.09625514).epsilon(1e-6));
  REQUIRE(out.at(0, 3) == Catch::Approx(0.09625514).epsilon(1e-6));
  double total = 0.0;
  for (double v : out.data) total += v;
  REQUIRE(total == Catch::Approx(1.0));
}

TEST_CASE("finite differences over composite graphs") {
  std::mt19937 rng(7);

  SECTION("three layer mlp") {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<Tensor> inputs = {
          random_tensor({3, 4}, rng),  random_tensor({4, 5}, rng),
          random_tensor({1, 5}, rng),  random_tensor({5, 5}, rng),
          random_tensor({1, 5}, rng),  random_tensor({5, 2}, rng),
      };
      check_gradients(inputs, [](Tape& t, std::vector<Tape::NodeId> id) {
        auto h1 = t.relu(t.add(t.matmul(id[0], id[1]), id[2]));
        auto h2 = t.relu(t.add(t.matmul(h1, id[3]), id[4]));
        auto out = t.softmax_rows(t.matmul(h2, id[5]));
        return t.mean(t.mul(out, out));
      });
    }
  }

  SECTION("transpose, concat, reshape, scale") {
    std::vector<Tensor> inputs = {random_tensor({2, 3}, rng),
                                  random_tensor({2, 3}, rng)};
    check_gradients(inputs, [](Tape& t, std::vector<Tape::NodeId> id) {
      auto cat = t.concat({id[0], id[1]}, 1);
      auto tr = t.transpose(cat);
      auto flat = t.reshape(tr, {1, 12});
      return t.sum(t.mul(t.scale(flat, 0.5), flat));
    });
  }

  SECTION("row concat and broadcast add") {
    std::vector<Tensor> inputs = {random_tensor({2, 3}, rng),
                                  random_tensor({3, 3}, rng),
                                  random_tensor({1, 3}, rng)};
    check_gradients(inputs, [](Tape& t, std::vector<Tape::NodeId> id) {
      auto cat = t.concat({id[0], id[1]}, 0);
      auto shifted = t.add(cat, id[2]);
      return t.sum(t.mul(shifted, shifted));
    });
  }

  SECTION("embedding gather") {
    std::vector<Tensor> inputs = {random_tensor({4, 3}, rng)};
    check_gradients(inputs, [](Tape& t, std::vector<Tape::NodeId> id) {
      auto rows = t.gather_rows(id[0], {2, 0, 2, 3});
      return t.sum(t.mul(rows, rows));
    });
  }
}

TEST_CASE("tape shape errors") {
  Tape tape;
  auto a = tape.leaf(Tensor({2, 3}), true);
  auto b = tape.leaf(Tensor({2, 2}), true);
  REQUIRE_THROWS_AS(tape.matmul(a, b), ShapeMismatch);
  REQUIRE_THROWS_AS(tape.mul(a, b), ShapeMismatch);
  REQUIRE_THROWS_AS(tape.reshape(a, {5, 5}), ShapeMismatch);
  REQUIRE_THROWS_AS(tape.backward(a), ShapeMismatch);
}

TEST_CASE("adam optimizer") {
  SECTION("zero gradient leaves parameter unchanged without decay") {
    AdamConfig cfg;
    cfg.weight_decay = 0.0;
    Adam opt(cfg);
    Tensor p({1, 2}, {1.0, -2.0});
    Tensor g({1, 2});
    opt.step("w", p, g);
    REQUIRE(p.data[0] == 1.0);
    REQUIRE(p.data[1] == -2.0);
  }

  SECTION("constant gradient steps by roughly lr") {
    AdamConfig cfg;
    cfg.lr = 1e-3;
    cfg.weight_decay = 0.0;
    Adam opt(cfg);
    Tensor p({1, 1}, {0.5});
    Tensor g({1, 1}, {0.3});
    double before = p.data[0];
    opt.step("w", p, g);
    REQUIRE(before - p.data[0] == Catch::Approx(cfg.lr).epsilon(1e-4));
  }

  SECTION("weight decay is decoupled") {
    AdamConfig cfg;
    cfg.lr = 1e-2;
    cfg.weight_decay = 0.1;
    Adam opt(cfg);
    Tensor p({1, 1}, {1.0});
    Tensor g({1, 1});
    opt.step("w", p, g);
    REQUIRE(p.data[0] == Catch::Approx(1.0 - cfg.lr * cfg.weight_decay));
  }

  SECTION("lr decays per epoch") {
    Adam opt;
    double lr0 = opt.current_lr();
    opt.end_epoch();
    REQUIRE(opt.current_lr() == Catch::Approx(lr0 * 0.999));
  }

  SECTION("ema tracks the parameter") {
    AdamConfig cfg;
    cfg.weight_decay = 0.0;
    Adam opt(cfg);
    Tensor p({1, 1}, {1.0});
    Tensor g({1, 1}, {1.0});
    opt.step("w", p, g);
    // bias-corrected: after one update the shadow equals the parameter
    REQUIRE(opt.ema("w").data[0] == Catch::Approx(p.data[0]));
    double p1 = p.data[0];
    opt.step("w", p, g);
    double expect = (0.999 * 0.001 * p1 + 0.001 * p.data[0]) /
                    (1.0 - 0.999 * 0.999);
    REQUIRE(opt.ema("w").data[0] == Catch::Approx(expect));
  }

  SECTION("shape mismatch rejected") {
    Adam opt;
    Tensor p({1, 2});
    Tensor g({2, 1});
    REQUIRE_THROWS_AS(opt.step("w", p, g), ShapeMismatch);
  }
}
