// SPDX-License-Identifier: Apache-2.0
#pragma once

// Minimal trainable feedforward model with NTK parameterization: every
// layer computes z^(k) = (1/sqrt(n_{k-1})) W^(k-1) h^(k-1) with standard
// normal init, so widening a layer leaves the initial output scale alone.
// Reverse-mode gradients are exact; the top-layer seed is the closed-form
// loss gradient sigma(z) - e_y from losses.hpp.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <vector>

#include "arelu/losses.hpp"
#include "arelu/transforms.hpp"

namespace arelu {

enum class Activation { relu, identity };

struct TinyNetwork {
  std::vector<int> widths;               // n_0 .. n_L; output dim d = n_L
  std::vector<Eigen::MatrixXd> weights;  // weights[k]: widths[k+1] x widths[k]
  Activation activation = Activation::relu;
  std::uint64_t seed = 0;

  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }
  int depth() const { return static_cast<int>(weights.size()); }
  std::size_t parameter_count() const;
};

TinyNetwork make_network(const std::vector<int>& widths, Activation activation,
                         std::uint64_t seed);

// Activations kept around for the backward pass. h[0] is the input batch,
// z[k] the (k+1)-th pre-activation; z.back() holds the logits.
struct ForwardTrace {
  std::vector<Eigen::MatrixXd> h;
  std::vector<Eigen::MatrixXd> z;
  const Eigen::MatrixXd& logits() const { return z.back(); }
};

// Columns of x are inputs; returns d x batch logits.
Eigen::MatrixXd forward(const TinyNetwork& net, const Eigen::MatrixXd& x);
ForwardTrace forward_trace(const TinyNetwork& net, const Eigen::MatrixXd& x);

// Reverse mode seeded with grad_logits (d x batch): returns d(sum_b
// <grad_b, z_b>)/dW for every weight matrix. Pass grad columns divided by
// the batch size for a mean-reduced loss.
std::vector<Eigen::MatrixXd> backward(const TinyNetwork& net,
                                      const ForwardTrace& trace,
                                      const Eigen::MatrixXd& grad_logits);

// d x P Jacobian of the logits w.r.t. the flattened parameters, one row
// per output coordinate.
Eigen::MatrixXd output_jacobian(const TinyNetwork& net,
                                const Eigen::VectorXd& x);

// Parameter flattening used by output_jacobian and the dynamics check:
// weight matrices in layer order, each in column-major layout.
Eigen::VectorXd flatten(const std::vector<Eigen::MatrixXd>& mats);

enum class OptimizerKind { sgd, adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::sgd;
  double lr = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.998;
  double eps = 1e-8;
  int steps = 100;
};

// SGD is stateless; adam keeps per-parameter first/second moments with
// bias correction.
class Optimizer {
 public:
  explicit Optimizer(const OptimizerConfig& cfg);

  void step(const std::vector<Eigen::MatrixXd*>& params,
            const std::vector<Eigen::MatrixXd>& grads);
  int steps_taken() const { return t_; }
  const OptimizerConfig& config() const { return cfg_; }

 private:
  OptimizerConfig cfg_;
  int t_ = 0;
  std::vector<Eigen::MatrixXd> m_;
  std::vector<Eigen::MatrixXd> v_;
};

// Convenience wrapper updating every weight matrix of a network in place.
void optimizer_step(TinyNetwork& net,
                    const std::vector<Eigen::MatrixXd>& grads, Optimizer& opt);

struct Dataset {
  Eigen::MatrixXd x;   // n_0 x N, one column per example
  std::vector<int> y;  // N labels in [0, d)

  int n() const { return static_cast<int>(y.size()); }
};

struct TrainConfig {
  TransformConfig head;  // output transform and its matched loss
  OptimizerConfig opt;
  int batch_size = 0;  // 0 = full batch
  int log_every = 10;
  std::uint64_t seed = 1;  // minibatch shuffling
};

struct TrainRecord {
  int step = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  double sparsity_mean = 0.0;
  double wall_ms = 0.0;
};

struct TrainResult {
  std::vector<TrainRecord> log;
  double final_loss = 0.0;
  double final_accuracy = 0.0;
  double final_sparsity = 0.0;
};

struct EvalMetrics {
  double loss = 0.0;
  double accuracy = 0.0;
  double sparsity_mean = 0.0;
};

// Mean matched loss, argmax accuracy, and mean exact-zero output fraction
// over the whole dataset.
EvalMetrics evaluate(const TinyNetwork& net, const Dataset& data,
                     const TransformConfig& head);

// Deterministic given seeds; metrics are recorded every log_every steps
// (plus steps 0 and the final step). Zero optimizer steps leave both the
// log and the network untouched.
TrainResult train(TinyNetwork& net, const Dataset& data,
                  const TrainConfig& cfg);

// Flat binary checkpoint with a dimensions header (format "ARNET", v1).
void save_network(const TinyNetwork& net, const std::filesystem::path& path);
TinyNetwork load_network(const std::filesystem::path& path);

}  // namespace arelu
