// SPDX-License-Identifier: Apache-2.0
#pragma once

// Tiny autoregressive sequence model for the decoding experiments: the
// decoder input at step t is the embedding of the previous target token
// concatenated with the embedding of the source token aligned to t (EOS
// once the source is exhausted), pushed through one hidden layer with
// NTK-style 1/sqrt(n) scaling. Step t therefore depends only on target
// tokens < t plus the source.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "arelu/network.hpp"
#include "arelu/transforms.hpp"

namespace arelu {

struct SequenceModelConfig {
  int vocab = 0;  // total vocabulary including specials
  int bos = 0;
  int eos = 1;
  int emb_dim = 32;
  int hidden = 64;
  std::uint64_t seed = 1;
};

struct SequenceModel {
  SequenceModelConfig cfg;
  Eigen::MatrixXd embed;  // emb_dim x vocab
  Eigen::MatrixXd w_in;   // hidden x 2*emb_dim
  Eigen::MatrixXd w_out;  // vocab x hidden
};

SequenceModel make_sequence_model(const SequenceModelConfig& cfg);

// Logits over the vocabulary for decode step t given the previous target
// token (BOS at t = 0).
Eigen::VectorXd step_logits(const SequenceModel& model,
                            std::span<const int> src, int t, int prev);

struct SeqTrainConfig {
  TransformConfig head;
  OptimizerConfig opt;
  int batch_size = 32;  // examples per step; all their positions train
  int log_every = 50;
  std::uint64_t seed = 1;
};

// Teacher-forced training on the copy objective: target(src) = src + EOS.
// Loss/accuracy/sparsity in the log are per-position means over all
// training sequences.
TrainResult train_sequence(SequenceModel& model,
                           const std::vector<std::vector<int>>& sources,
                           const SeqTrainConfig& cfg);

EvalMetrics evaluate_sequence(const SequenceModel& model,
                              const std::vector<std::vector<int>>& sources,
                              const TransformConfig& head);

// Sequence scores are log products of per-step selected weights. logp_norm
// renormalizes each step's weights to sum to 1 (the entmax family and
// softmax already do; for arelu this turns weights into probabilities).
// logp_raw uses the weights as produced. A step whose selected weight is
// zero contributes -inf.
struct SequenceScore {
  double logp_norm = 0.0;
  double logp_raw = 0.0;
};

// tgt must be EOS-terminated. The empty sequence is {eos}, whose score is
// the (normalized) weight of EOS at the first step.
SequenceScore score_sequence(const SequenceModel& model,
                             std::span<const int> src,
                             std::span<const int> tgt,
                             const TransformConfig& cfg);

struct DecodeResult {
  std::vector<int> tokens;  // EOS-terminated unless max_len was hit
  double logp_norm = 0.0;
  double logp_raw = 0.0;
};

// Beam search over per-step transform weights; width 1 is greedy. Only
// support tokens (weight > 0) extend a hypothesis; if a step's weights are
// all zero the hypothesis continues through the raw-logit argmax and its
// score drops to -inf. max_len <= 0 means src.size() + 5.
DecodeResult decode(const SequenceModel& model, std::span<const int> src,
                    const TransformConfig& cfg, int beam_width,
                    int max_len = 0);

// Flat binary checkpoint with a dimensions header (format "ARSEQ", v1).
void save_sequence_model(const SequenceModel& model,
                         const std::filesystem::path& path);
SequenceModel load_sequence_model(const std::filesystem::path& path);

}  // namespace arelu
