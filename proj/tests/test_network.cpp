// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "arelu/network.hpp"
#include "arelu/tasks.hpp"
#include "oracles.hpp"

using namespace arelu;

namespace {

// Straight-line reimplementation of the layer recursion with plain loops,
// used as an independent oracle for the Eigen-based forward pass.
std::vector<double> forward_plain(const TinyNetwork& net,
                                  const std::vector<double>& x) {
  std::vector<double> h = x;
  for (int k = 0; k < net.depth(); ++k) {
    const int rows = net.widths[k + 1];
    const int cols = net.widths[k];
    const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    std::vector<double> z(rows, 0.0);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        z[i] += net.weights[k](i, j) * h[j];
      }
      z[i] *= scale;
    }
    if (k + 1 < net.depth() && net.activation == Activation::relu) {
      for (auto& v : z) v = std::max(v, 0.0);
    }
    h = std::move(z);
  }
  return h;
}

double net_loss(const TinyNetwork& net, const Eigen::VectorXd& x, int y,
                const TransformConfig& head) {
  const Eigen::MatrixXd z = forward(net, x);
  return matched_loss(
             std::vector<double>(z.data(), z.data() + z.rows()), y, head)
      .value;
}

}  // namespace

TEST_CASE("forward basics") {
  TinyNetwork net = make_network({4, 6, 3}, Activation::relu, 1);
  CHECK(net.parameter_count() == 4 * 6 + 6 * 3);

  // Zero input stays zero through 1/sqrt(n)-scaled linear maps and relu.
  const Eigen::MatrixXd z = forward(net, Eigen::MatrixXd::Zero(4, 2));
  CHECK(z.norm() == 0.0);

  // Identity-like single layer: W = sqrt(n) I cancels the scaling.
  TinyNetwork id = make_network({3, 3}, Activation::identity, 2);
  id.weights[0] = std::sqrt(3.0) * Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd x(3);
  x << 1.0, -2.0, 0.5;
  CHECK((forward(id, x) - x).norm() < 1e-12);

  CHECK_THROWS_AS(forward(net, Eigen::MatrixXd::Zero(5, 1)), ShapeError);
}

TEST_CASE("forward matches a straight-line recomputation") {
  std::mt19937_64 rng(3);
  const TinyNetwork net = make_network({5, 7, 4, 3}, Activation::relu, 17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto xv = oracles::random_logits(rng, 5, 1.0);
    const Eigen::VectorXd x =
        Eigen::Map<const Eigen::VectorXd>(xv.data(), 5);
    const Eigen::MatrixXd z = forward(net, x);
    const auto plain = forward_plain(net, xv);
    for (int i = 0; i < 3; ++i) {
      CHECK(z(i, 0) == doctest::Approx(plain[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("backward matches finite differences for every loss head") {
  std::mt19937_64 rng(5);
  const std::vector<TransformConfig> heads = {
      {.kind = TransformKind::softmax},
      {.alpha = 2.0, .kind = TransformKind::sparsemax},
      {.alpha = 1.5, .kind = TransformKind::entmax15_sorted},
      {.alpha = 1.5, .tau = 0.2, .kind = TransformKind::arelu}};
  for (const auto& head : heads) {
    TinyNetwork net = make_network({4, 8, 5}, Activation::relu, 23);
    const auto xv = oracles::random_logits(rng, 4, 1.0);
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(xv.data(), 4);
    const int y = 2;

    const ForwardTrace trace = forward_trace(net, x);
    std::vector<double> z(trace.logits().data(), trace.logits().data() + 5);
    const LossResult lr = matched_loss(z, y, head);
    const Eigen::MatrixXd seed =
        Eigen::Map<const Eigen::VectorXd>(lr.gradient.data(), 5);
    const auto grads = backward(net, trace, seed);

    for (std::size_t k = 0; k < net.weights.size(); ++k) {
      for (Eigen::Index i = 0; i < net.weights[k].size(); ++i) {
        const double orig = net.weights[k].data()[i];
        const double h = 1e-5;
        net.weights[k].data()[i] = orig + h;
        const double up = net_loss(net, x, y, head);
        net.weights[k].data()[i] = orig - h;
        const double down = net_loss(net, x, y, head);
        net.weights[k].data()[i] = orig;
        const double fd = (up - down) / (2.0 * h);
        CHECK(oracles::close_rel(fd, grads[k].data()[i], 1e-4));
      }
    }
  }
}

TEST_CASE("linear net cross-entropy gradient equals the outer product") {
  std::mt19937_64 rng(7);
  TinyNetwork net = make_network({6, 4}, Activation::identity, 29);
  const auto xv = oracles::random_logits(rng, 6, 1.0);
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(xv.data(), 6);

  const ForwardTrace trace = forward_trace(net, x);
  std::vector<double> z(trace.logits().data(), trace.logits().data() + 4);
  const LossResult lr = cross_entropy(z, 1);
  const Eigen::VectorXd g =
      Eigen::Map<const Eigen::VectorXd>(lr.gradient.data(), 4);
  const auto grads = backward(net, trace, g);

  const Eigen::MatrixXd expected = (g * x.transpose()) / std::sqrt(6.0);
  CHECK((grads[0] - expected).norm() < 1e-12);
}

TEST_CASE("gradients vanish at an exact loss minimum") {
  // One-layer identity net driven so that arelu::arelu(z) = e_0 exactly.
  const TransformConfig head{.alpha = 1.5, .tau = 0.5,
                             .kind = TransformKind::arelu};
  TinyNetwork net = make_network({3, 3}, Activation::identity, 31);
  net.weights[0] = std::sqrt(3.0) * Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd x(3);
  x << (1.0 + head.tau) / 0.5, 0.0, -1.0;

  const ForwardTrace trace = forward_trace(net, x);
  std::vector<double> z(trace.logits().data(), trace.logits().data() + 3);
  const LossResult lr = matched_loss(z, 0, head);
  CHECK(lr.value == 0.0);
  const auto grads = backward(
      net, trace, Eigen::Map<const Eigen::VectorXd>(lr.gradient.data(), 3));
  for (const auto& g : grads) CHECK(g.norm() == 0.0);
}

TEST_CASE("optimizer steps") {
  TinyNetwork net = make_network({2, 2}, Activation::relu, 37);
  const Eigen::MatrixXd w0 = net.weights[0];

  // Zero gradient leaves parameters unchanged (SGD and adam alike).
  std::vector<Eigen::MatrixXd> zero{Eigen::MatrixXd::Zero(2, 2)};
  Optimizer sgd({.kind = OptimizerKind::sgd, .lr = 1.0});
  optimizer_step(net, zero, sgd);
  CHECK((net.weights[0] - w0).norm() == 0.0);

  Optimizer adam0({.kind = OptimizerKind::adam, .lr = 0.1});
  optimizer_step(net, zero, adam0);
  CHECK((net.weights[0] - w0).norm() == 0.0);

  // SGD with lr = 1 subtracts the gradient exactly.
  std::vector<Eigen::MatrixXd> g{Eigen::MatrixXd::Ones(2, 2)};
  optimizer_step(net, g, sgd);
  CHECK((net.weights[0] - (w0 - Eigen::MatrixXd::Ones(2, 2))).norm() == 0.0);

  CHECK_THROWS_AS(Optimizer({.kind = OptimizerKind::sgd, .lr = 0.0}),
                  ConfigError);
  CHECK_THROWS_AS(Optimizer({.kind = OptimizerKind::sgd, .lr = -0.1}),
                  ConfigError);
  std::vector<Eigen::MatrixXd> bad{Eigen::MatrixXd::Zero(3, 2)};
  CHECK_THROWS_AS(optimizer_step(net, bad, sgd), ShapeError);
}

TEST_CASE("two adam steps match the hand-unrolled recursion") {
  const double lr = 0.05, b1 = 0.9, b2 = 0.998, eps = 1e-8;
  TinyNetwork net = make_network({1, 1}, Activation::identity, 41);
  const double w0 = net.weights[0](0, 0);
  const double g = 0.7;

  Optimizer adam({.kind = OptimizerKind::adam, .lr = lr, .beta1 = b1,
                  .beta2 = b2, .eps = eps});
  std::vector<Eigen::MatrixXd> grad{Eigen::MatrixXd::Constant(1, 1, g)};
  optimizer_step(net, grad, adam);
  optimizer_step(net, grad, adam);

  // Hand unroll: constant gradient, two steps.
  double m = 0.0, v = 0.0, w = w0;
  for (int t = 1; t <= 2; ++t) {
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mhat = m / (1 - std::pow(b1, t));
    const double vhat = v / (1 - std::pow(b2, t));
    w -= lr * mhat / (std::sqrt(vhat) + eps);
  }
  CHECK(net.weights[0](0, 0) == doctest::Approx(w).epsilon(1e-14));
}

TEST_CASE("training on the separable cluster task reaches high accuracy") {
  const Dataset data = make_cluster_dataset(
      {.classes = 10, .per_class = 20, .dim = 16, .separation = 6.0,
       .noise = 1.0, .seed = 5});
  TinyNetwork net = make_network({16, 64, 10}, Activation::relu, 5);
  const TrainConfig cfg{
      .head = {.alpha = 1.5, .tau = 0.1, .kind = TransformKind::arelu},
      .opt = {.kind = OptimizerKind::adam, .lr = 0.02, .steps = 200},
      .batch_size = 0,
      .log_every = 50,
      .seed = 5};
  const TrainResult res = train(net, data, cfg);
  CHECK(res.final_accuracy >= 0.95);

  // The matched loss drives arelu outputs toward one-hot vectors.
  const Eigen::MatrixXd logits = forward(net, data.x);
  double mean_max = 0.0;
  for (int b = 0; b < data.n(); ++b) {
    std::vector<double> z(logits.col(b).data(),
                          logits.col(b).data() + logits.rows());
    const auto w = arelu::arelu(z, cfg.head);
    mean_max += *std::max_element(w.values.begin(), w.values.end());
  }
  mean_max /= data.n();
  CHECK(mean_max >= 0.9);
}

TEST_CASE("zero steps leave the network and log untouched") {
  const Dataset data = make_cluster_dataset({.classes = 3, .per_class = 5,
                                             .dim = 4, .seed = 7});
  TinyNetwork net = make_network({4, 8, 3}, Activation::relu, 7);
  const Eigen::MatrixXd w0 = net.weights[0];
  const TrainConfig cfg{.head = {.kind = TransformKind::softmax},
                        .opt = {.kind = OptimizerKind::sgd, .lr = 0.1,
                                .steps = 0},
                        .seed = 7};
  const TrainResult res = train(net, data, cfg);
  CHECK(res.log.empty());
  CHECK((net.weights[0] - w0).norm() == 0.0);
}

TEST_CASE("identical seeds give bit-identical training logs") {
  const Dataset data = make_cluster_dataset({.classes = 5, .per_class = 10,
                                             .dim = 8, .seed = 11});
  const TrainConfig cfg{
      .head = {.alpha = 1.5, .kind = TransformKind::entmax15_sorted},
      .opt = {.kind = OptimizerKind::adam, .lr = 0.01, .steps = 40},
      .batch_size = 16,
      .log_every = 10,
      .seed = 11};
  TinyNetwork a = make_network({8, 16, 5}, Activation::relu, 11);
  TinyNetwork b = make_network({8, 16, 5}, Activation::relu, 11);
  const TrainResult ra = train(a, data, cfg);
  const TrainResult rb = train(b, data, cfg);
  REQUIRE(ra.log.size() == rb.log.size());
  for (std::size_t i = 0; i < ra.log.size(); ++i) {
    CHECK(ra.log[i].step == rb.log[i].step);
    CHECK(ra.log[i].loss == rb.log[i].loss);            // bitwise
    CHECK(ra.log[i].accuracy == rb.log[i].accuracy);    // bitwise
    CHECK(ra.log[i].sparsity_mean == rb.log[i].sparsity_mean);
  }
  for (std::size_t k = 0; k < a.weights.size(); ++k) {
    CHECK((a.weights[k] - b.weights[k]).norm() == 0.0);
  }
}

TEST_CASE("ntk parameterization keeps initial output scale width-stable") {
  std::mt19937_64 rng(13);
  const auto xv = oracles::random_logits(rng, 8, 1.0);
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(xv.data(), 8);
  double prev_var = -1.0;
  for (const int width : {128, 256, 512, 1024}) {
    const TinyNetwork net = make_network({8, width, 32},
                                         Activation::relu, 13);
    const Eigen::MatrixXd z = forward(net, x);
    const double mean = z.mean();
    const double var =
        (z.array() - mean).square().sum() / static_cast<double>(z.size());
    CHECK(std::abs(mean) < 0.5);
    if (prev_var > 0.0) {
      CHECK(var / prev_var > 0.4);
      CHECK(var / prev_var < 2.5);
    }
    prev_var = var;
  }
}

TEST_CASE("checkpoint round-trip is bit exact") {
  const TinyNetwork net = make_network({6, 12, 4}, Activation::relu, 99);
  const auto path =
      std::filesystem::temp_directory_path() / "arelu_test_net.bin";
  save_network(net, path);
  const TinyNetwork back = load_network(path);
  CHECK(back.widths == net.widths);
  CHECK(back.activation == net.activation);
  CHECK(back.seed == net.seed);
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    CHECK((back.weights[k] - net.weights[k]).norm() == 0.0);
  }
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_network("/nonexistent/net.bin"), InputError);
}
