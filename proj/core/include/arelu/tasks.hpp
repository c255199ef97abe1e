// SPDX-License-Identifier: Apache-2.0
#pragma once

// Desk-scale toy tasks: a separable Gaussian-cluster classification
// problem for loss/dynamics experiments and a token-copy translation task
// with EOS-terminated targets for the decoding experiments.

#include <cstdint>
#include <vector>

#include "arelu/network.hpp"

namespace arelu {

struct ClusterTaskConfig {
  int classes = 10;
  int per_class = 50;
  int dim = 16;
  double separation = 6.0;  // distance of class means from the origin
  double noise = 1.0;       // isotropic stddev around each mean
  std::uint64_t seed = 1;
};

Dataset make_cluster_dataset(const ClusterTaskConfig& cfg);

// Token ids: 0 = BOS, 1 = EOS, content tokens start at 2.
struct CopyTaskConfig {
  int content_vocab = 50;
  int min_len = 3;
  int max_len = 12;
  int n_train = 200;
  int n_dev = 100;
  std::uint64_t seed = 1;
};

struct CopyTask {
  std::vector<std::vector<int>> train;  // source sequences (content tokens)
  std::vector<std::vector<int>> dev;
  int vocab = 0;  // content_vocab + 2 specials
  int bos = 0;
  int eos = 1;
};

// The gold target for every source is the source itself followed by EOS.
CopyTask make_copy_task(const CopyTaskConfig& cfg);

}  // namespace arelu
