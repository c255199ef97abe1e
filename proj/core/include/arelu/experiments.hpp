// SPDX-License-Identifier: Apache-2.0
#pragma once

// Desk-scale analyses: the empirical tangent kernel and the one-step
// logit-dynamics check, zero-fraction sparsity statistics, the
// empty-sequence preference rate under beam decoding, and the constant
// threshold sweep.

#include <Eigen/Dense>

#include <vector>

#include "arelu/network.hpp"
#include "arelu/sequence.hpp"
#include "arelu/tasks.hpp"
#include "arelu/transforms.hpp"

namespace arelu {

// K(x, x') = J_z(theta) J_{z'}(theta)^T together with the stacked
// parameter Jacobians it was built from. K(x, x) is a Gram matrix, hence
// symmetric positive semidefinite.
struct KernelMatrix {
  Eigen::MatrixXd k;       // d x d
  Eigen::MatrixXd jac_x;   // d x P
  Eigen::MatrixXd jac_xp;  // d x P
};

KernelMatrix empirical_ntk(const TinyNetwork& net, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& xp);

struct DynamicsProbe {
  int index = 0;
  double cosine = 0.0;
  double rel_err = 0.0;
  double predicted_norm = 0.0;
  double observed_norm = 0.0;
};

struct DynamicsReport {
  std::vector<DynamicsProbe> probes;
  double mean_cosine = 0.0;
  double mean_rel_err = 0.0;
};

// Takes `steps` SGD steps on the mean matched loss and, at every step,
// compares the observed logit change of each probe input against the
// tangent-kernel prediction
//   dz = -lr * E_{(x',y')}[K(x,x') (sigma(z') - e_{y'})],
// with the expectation taken exactly over the training sample. The
// kernel-vector products are evaluated in factored form,
// J_x * mean(J_{x'}^T g'), which is the same quantity without
// materializing per-pair kernels. Probes are the first n_probes training
// inputs; per-probe stats are averaged over steps.
DynamicsReport dynamics_check(const TinyNetwork& net, const Dataset& data,
                              const TransformConfig& head, double lr,
                              int steps = 1, int n_probes = 8);

struct SparsityStats {
  std::vector<double> zero_fraction;  // one entry per evaluated vector
  std::vector<std::int64_t> histogram;
  int buckets = 0;  // bucket i covers [i/buckets, (i+1)/buckets)
  double mean = 0.0;
  double median = 0.0;
};

// Zero means exactly 0.0 after the transform; softmax never produces one.
SparsityStats sparsity_histogram(const std::vector<std::vector<double>>& logits,
                                 const TransformConfig& cfg, int buckets = 10);

struct EmptySeqReport {
  int preferred = 0;  // dev examples where the empty string wins
  int total = 0;
  double rate_percent = 0.0;
};

// Fraction of dev sources whose normalized empty-sequence score strictly
// beats the beam hypothesis found under the same transform.
EmptySeqReport empty_sequence_rate(const SequenceModel& model,
                                   const std::vector<std::vector<int>>& dev,
                                   const TransformConfig& cfg,
                                   int beam_width = 5);

struct TauSweepEntry {
  double tau = 0.0;
  TrainResult result;
};

// Trains one arelu-headed network per tau with identical data, init, and
// shuffling seeds, so the curves differ only through the threshold.
std::vector<TauSweepEntry> tau_sweep(const std::vector<double>& taus,
                                     const ClusterTaskConfig& task,
                                     const std::vector<int>& widths,
                                     const TrainConfig& base);

// Logits of a trained classifier over a dataset, one row per example;
// shared input for sparsity histograms across transforms.
std::vector<std::vector<double>> collect_logits(const TinyNetwork& net,
                                                const Dataset& data);

}  // namespace arelu
