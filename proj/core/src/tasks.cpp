// SPDX-License-Identifier: Apache-2.0
#include "arelu/tasks.hpp"

#include <random>

namespace arelu {

Dataset make_cluster_dataset(const ClusterTaskConfig& cfg) {
  if (cfg.classes < 2 || cfg.per_class < 1 || cfg.dim < 1) {
    throw ConfigError("cluster task needs classes >= 2, per_class >= 1, dim >= 1");
  }
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Class means: random directions scaled to the requested separation.
  Eigen::MatrixXd means(cfg.dim, cfg.classes);
  for (int c = 0; c < cfg.classes; ++c) {
    Eigen::VectorXd dir(cfg.dim);
    for (int i = 0; i < cfg.dim; ++i) dir[i] = normal(rng);
    means.col(c) = cfg.separation * dir.normalized();
  }

  const int n = cfg.classes * cfg.per_class;
  Dataset data;
  data.x.resize(cfg.dim, n);
  data.y.resize(n);
  for (int c = 0; c < cfg.classes; ++c) {
    for (int j = 0; j < cfg.per_class; ++j) {
      const int idx = c * cfg.per_class + j;
      for (int i = 0; i < cfg.dim; ++i) {
        data.x(i, idx) = means(i, c) + cfg.noise * normal(rng);
      }
      data.y[idx] = c;
    }
  }
  return data;
}

CopyTask make_copy_task(const CopyTaskConfig& cfg) {
  if (cfg.content_vocab < 2 || cfg.min_len < 1 || cfg.max_len < cfg.min_len) {
    throw ConfigError("copy task needs content_vocab >= 2 and 1 <= min_len <= max_len");
  }
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> len_dist(cfg.min_len, cfg.max_len);
  std::uniform_int_distribution<int> tok_dist(2, cfg.content_vocab + 1);

  const auto sample = [&](int count) {
    std::vector<std::vector<int>> out(count);
    for (auto& seq : out) {
      seq.resize(len_dist(rng));
      for (auto& t : seq) t = tok_dist(rng);
    }
    return out;
  };

  CopyTask task;
  task.vocab = cfg.content_vocab + 2;
  task.train = sample(cfg.n_train);
  task.dev = sample(cfg.n_dev);
  return task;
}

}  // namespace arelu
