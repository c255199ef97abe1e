// SPDX-License-Identifier: Apache-2.0
#include "arelu/sequence.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

namespace arelu {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr char kSeqMagic[5] = {'A', 'R', 'S', 'E', 'Q'};
constexpr std::uint32_t kSeqVersion = 1;

int aligned_token(const SequenceModel& model, std::span<const int> src,
                  int t) {
  return t < static_cast<int>(src.size()) ? src[static_cast<std::size_t>(t)]
                                          : model.cfg.eos;
}

void check_token(const SequenceModel& model, int tok) {
  if (tok < 0 || tok >= model.cfg.vocab) {
    throw IndexError("token " + std::to_string(tok) +
                     " outside vocabulary of size " +
                     std::to_string(model.cfg.vocab));
  }
}

// Teacher-forced feature/target layout for a set of sequences: one column
// per decode position, plus the token ids needed to scatter embedding
// gradients back.
struct PositionBatch {
  Eigen::MatrixXd x;  // 2*emb x M
  std::vector<int> target;
  std::vector<int> prev;
  std::vector<int> aligned;
};

PositionBatch gather_positions(const SequenceModel& model,
                               const std::vector<std::vector<int>>& sources,
                               const std::vector<int>& which) {
  const int emb = model.cfg.emb_dim;
  int m = 0;
  for (const int idx : which) {
    m += static_cast<int>(sources[static_cast<std::size_t>(idx)].size()) + 1;
  }
  PositionBatch batch;
  batch.x.resize(2 * emb, m);
  batch.target.resize(static_cast<std::size_t>(m));
  batch.prev.resize(static_cast<std::size_t>(m));
  batch.aligned.resize(static_cast<std::size_t>(m));
  int col = 0;
  for (const int idx : which) {
    const auto& src = sources[static_cast<std::size_t>(idx)];
    const int len = static_cast<int>(src.size());
    for (int t = 0; t <= len; ++t) {
      const int prev = t == 0 ? model.cfg.bos
                              : src[static_cast<std::size_t>(t - 1)];
      const int aligned = aligned_token(model, src, t);
      batch.x.col(col).head(emb) = model.embed.col(prev);
      batch.x.col(col).tail(emb) = model.embed.col(aligned);
      batch.target[static_cast<std::size_t>(col)] =
          t < len ? src[static_cast<std::size_t>(t)] : model.cfg.eos;
      batch.prev[static_cast<std::size_t>(col)] = prev;
      batch.aligned[static_cast<std::size_t>(col)] = aligned;
      ++col;
    }
  }
  return batch;
}

struct SeqForward {
  Eigen::MatrixXd pre;     // hidden x M, pre-activation
  Eigen::MatrixXd h;       // hidden x M
  Eigen::MatrixXd logits;  // vocab x M
};

SeqForward seq_forward(const SequenceModel& model, const Eigen::MatrixXd& x) {
  SeqForward f;
  const double in_scale =
      1.0 / std::sqrt(static_cast<double>(2 * model.cfg.emb_dim));
  const double out_scale =
      1.0 / std::sqrt(static_cast<double>(model.cfg.hidden));
  f.pre.noalias() = in_scale * (model.w_in * x);
  f.h = f.pre.cwiseMax(0.0);
  f.logits.noalias() = out_scale * (model.w_out * f.h);
  return f;
}

// Per-step transform weights plus their sum; sum == 0 flags a fully
// clamped arelu output.
struct StepWeights {
  WeightVector w;
  double sum = 0.0;
};

StepWeights step_weights(const SequenceModel& model, std::span<const int> src,
                         int t, int prev, const TransformConfig& cfg) {
  const Eigen::VectorXd logits = step_logits(model, src, t, prev);
  StepWeights sw;
  sw.w = apply_transform(
      std::span<const double>(logits.data(),
                              static_cast<std::size_t>(logits.size())),
      cfg);
  sw.sum = sw.w.sum();
  return sw;
}

}  // namespace

SequenceModel make_sequence_model(const SequenceModelConfig& cfg) {
  if (cfg.vocab < 3) throw ConfigError("sequence model needs vocab >= 3");
  if (cfg.bos == cfg.eos || cfg.bos >= cfg.vocab || cfg.eos >= cfg.vocab) {
    throw ConfigError("bos/eos must be distinct tokens inside the vocabulary");
  }
  SequenceModel model;
  model.cfg = cfg;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto fill = [&](Eigen::MatrixXd& m, int rows, int cols) {
    m.resize(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  };
  fill(model.embed, cfg.emb_dim, cfg.vocab);
  fill(model.w_in, cfg.hidden, 2 * cfg.emb_dim);
  fill(model.w_out, cfg.vocab, cfg.hidden);
  return model;
}

Eigen::VectorXd step_logits(const SequenceModel& model,
                            std::span<const int> src, int t, int prev) {
  check_token(model, prev);
  for (const int tok : src) check_token(model, tok);
  if (t < 0) throw IndexError("negative decode step");
  const int emb = model.cfg.emb_dim;
  Eigen::VectorXd x(2 * emb);
  x.head(emb) = model.embed.col(prev);
  x.tail(emb) = model.embed.col(aligned_token(model, src, t));
  return seq_forward(model, x).logits.col(0);
}

TrainResult train_sequence(SequenceModel& model,
                           const std::vector<std::vector<int>>& sources,
                           const SeqTrainConfig& cfg) {
  if (sources.empty()) throw InputError("train_sequence: empty dataset");
  TrainResult result;
  const int steps = cfg.opt.steps;
  if (steps == 0) return result;

  Optimizer opt(cfg.opt);
  std::mt19937_64 rng(cfg.seed);
  const int n = static_cast<int>(sources.size());
  const int batch = (cfg.batch_size <= 0 || cfg.batch_size >= n)
                        ? n
                        : cfg.batch_size;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  int cursor = n;

  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed_ms = [&t0] {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  };
  const auto log_metrics = [&](int step) {
    const EvalMetrics m = evaluate_sequence(model, sources, cfg.head);
    result.log.push_back(
        {step, m.loss, m.accuracy, m.sparsity_mean, elapsed_ms()});
  };

  const double in_scale =
      1.0 / std::sqrt(static_cast<double>(2 * model.cfg.emb_dim));
  const double out_scale =
      1.0 / std::sqrt(static_cast<double>(model.cfg.hidden));

  log_metrics(0);
  std::vector<int> which(static_cast<std::size_t>(batch));
  for (int step = 1; step <= steps; ++step) {
    if (batch == n) {
      which = order;
    } else {
      for (int j = 0; j < batch; ++j) {
        if (cursor >= n) {
          std::shuffle(order.begin(), order.end(), rng);
          cursor = 0;
        }
        which[static_cast<std::size_t>(j)] = order[static_cast<std::size_t>(cursor++)];
      }
    }
    const PositionBatch pb = gather_positions(model, sources, which);
    const SeqForward f = seq_forward(model, pb.x);
    const int m = static_cast<int>(pb.target.size());

    Eigen::MatrixXd grad_logits(model.cfg.vocab, m);
    for (int c = 0; c < m; ++c) {
      std::vector<double> z(f.logits.col(c).data(),
                            f.logits.col(c).data() + model.cfg.vocab);
      LossResult lr =
          matched_loss(z, pb.target[static_cast<std::size_t>(c)], cfg.head);
      grad_logits.col(c) =
          Eigen::Map<const Eigen::VectorXd>(lr.gradient.data(),
                                            model.cfg.vocab) /
          static_cast<double>(m);
    }

    Eigen::MatrixXd d_wout = out_scale * (grad_logits * f.h.transpose());
    Eigen::MatrixXd gh = out_scale * (model.w_out.transpose() * grad_logits);
    gh = ((f.pre.array() > 0.0).cast<double>() * gh.array()).matrix();
    Eigen::MatrixXd d_win = in_scale * (gh * pb.x.transpose());
    const Eigen::MatrixXd gx = in_scale * (model.w_in.transpose() * gh);

    Eigen::MatrixXd d_embed =
        Eigen::MatrixXd::Zero(model.cfg.emb_dim, model.cfg.vocab);
    const int emb = model.cfg.emb_dim;
    for (int c = 0; c < m; ++c) {
      d_embed.col(pb.prev[static_cast<std::size_t>(c)]) += gx.col(c).head(emb);
      d_embed.col(pb.aligned[static_cast<std::size_t>(c)]) +=
          gx.col(c).tail(emb);
    }

    opt.step({&model.embed, &model.w_in, &model.w_out},
             {std::move(d_embed), std::move(d_win), std::move(d_wout)});
    if (step % cfg.log_every == 0 || step == steps) log_metrics(step);
  }
  result.final_loss = result.log.back().loss;
  result.final_accuracy = result.log.back().accuracy;
  result.final_sparsity = result.log.back().sparsity_mean;
  return result;
}

EvalMetrics evaluate_sequence(const SequenceModel& model,
                              const std::vector<std::vector<int>>& sources,
                              const TransformConfig& head) {
  std::vector<int> all(sources.size());
  std::iota(all.begin(), all.end(), 0);
  const PositionBatch pb = gather_positions(model, sources, all);
  const SeqForward f = seq_forward(model, pb.x);
  const int m = static_cast<int>(pb.target.size());
  EvalMetrics metrics;
  for (int c = 0; c < m; ++c) {
    std::vector<double> z(f.logits.col(c).data(),
                          f.logits.col(c).data() + model.cfg.vocab);
    metrics.loss +=
        matched_loss(z, pb.target[static_cast<std::size_t>(c)], head).value;
    metrics.sparsity_mean += apply_transform(z, head).zero_fraction();
    Eigen::Index am = 0;
    f.logits.col(c).maxCoeff(&am);
    if (static_cast<int>(am) == pb.target[static_cast<std::size_t>(c)]) {
      metrics.accuracy += 1.0;
    }
  }
  metrics.loss /= m;
  metrics.accuracy /= m;
  metrics.sparsity_mean /= m;
  return metrics;
}

SequenceScore score_sequence(const SequenceModel& model,
                             std::span<const int> src,
                             std::span<const int> tgt,
                             const TransformConfig& cfg) {
  if (tgt.empty()) throw InputError("score_sequence: target must end in EOS");
  SequenceScore score;
  for (std::size_t t = 0; t < tgt.size(); ++t) {
    const int prev = t == 0 ? model.cfg.bos : tgt[t - 1];
    const StepWeights sw =
        step_weights(model, src, static_cast<int>(t), prev, cfg);
    check_token(model, tgt[t]);
    const double w = sw.w.values[static_cast<std::size_t>(tgt[t])];
    if (w <= 0.0 || sw.sum <= 0.0) {
      score.logp_norm = kNegInf;
      score.logp_raw = kNegInf;
      return score;
    }
    score.logp_norm += std::log(w / sw.sum);
    score.logp_raw += std::log(w);
  }
  return score;
}

DecodeResult decode(const SequenceModel& model, std::span<const int> src,
                    const TransformConfig& cfg, int beam_width, int max_len) {
  if (beam_width < 1) throw ConfigError("beam width must be >= 1");
  if (max_len <= 0) max_len = static_cast<int>(src.size()) + 5;

  struct Beam {
    std::vector<int> tokens;
    double lp_norm = 0.0;
    double lp_raw = 0.0;
  };
  std::vector<Beam> live{Beam{}};
  std::vector<Beam> finished;

  for (int t = 0; t < max_len && !live.empty(); ++t) {
    std::vector<Beam> candidates;
    for (const Beam& beam : live) {
      const int prev = beam.tokens.empty() ? model.cfg.bos
                                           : beam.tokens.back();
      const StepWeights sw = step_weights(model, src, t, prev, cfg);
      if (sw.sum <= 0.0) {
        // Fully clamped output: continue through the raw-logit argmax
        // with step probability zero.
        const Eigen::VectorXd logits = step_logits(model, src, t, prev);
        Eigen::Index am = 0;
        logits.maxCoeff(&am);
        Beam next = beam;
        next.tokens.push_back(static_cast<int>(am));
        next.lp_norm = kNegInf;
        next.lp_raw = kNegInf;
        candidates.push_back(std::move(next));
        continue;
      }
      for (int i = 0; i < static_cast<int>(sw.w.values.size()); ++i) {
        const double w = sw.w.values[static_cast<std::size_t>(i)];
        if (w <= 0.0) continue;
        Beam next = beam;
        next.tokens.push_back(i);
        next.lp_norm += std::log(w / sw.sum);
        next.lp_raw += std::log(w);
        candidates.push_back(std::move(next));
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Beam& a, const Beam& b) {
                       return a.lp_norm > b.lp_norm;
                     });
    if (candidates.size() > static_cast<std::size_t>(beam_width)) {
      candidates.resize(static_cast<std::size_t>(beam_width));
    }
    live.clear();
    for (Beam& c : candidates) {
      if (c.tokens.back() == model.cfg.eos) {
        finished.push_back(std::move(c));
      } else {
        live.push_back(std::move(c));
      }
    }
  }
  for (Beam& b : live) finished.push_back(std::move(b));

  const Beam* best = &finished.front();
  for (const Beam& b : finished) {
    if (b.lp_norm > best->lp_norm) best = &b;
  }
  return {best->tokens, best->lp_norm, best->lp_raw};
}

void save_sequence_model(const SequenceModel& model,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out.write(kSeqMagic, sizeof(kSeqMagic));
  const auto put_u32 = [&out](std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  };
  put_u32(kSeqVersion);
  put_u32(static_cast<std::uint32_t>(model.cfg.vocab));
  put_u32(static_cast<std::uint32_t>(model.cfg.bos));
  put_u32(static_cast<std::uint32_t>(model.cfg.eos));
  put_u32(static_cast<std::uint32_t>(model.cfg.emb_dim));
  put_u32(static_cast<std::uint32_t>(model.cfg.hidden));
  out.write(reinterpret_cast<const char*>(&model.cfg.seed),
            sizeof(model.cfg.seed));
  for (const Eigen::MatrixXd* m : {&model.embed, &model.w_in, &model.w_out}) {
    out.write(reinterpret_cast<const char*>(m->data()),
              static_cast<std::streamsize>(sizeof(double) * m->size()));
  }
  if (!out) throw InputError("short write to " + path.string());
}

SequenceModel load_sequence_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  char magic[sizeof(kSeqMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kSeqMagic, sizeof(magic)) != 0) {
    throw InputError(path.string() + " is not a sequence model checkpoint");
  }
  const auto get_u32 = [&in, &path] {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw InputError("truncated checkpoint " + path.string());
    return v;
  };
  if (get_u32() != kSeqVersion) {
    throw InputError("unsupported checkpoint version in " + path.string());
  }
  SequenceModelConfig cfg;
  cfg.vocab = static_cast<int>(get_u32());
  cfg.bos = static_cast<int>(get_u32());
  cfg.eos = static_cast<int>(get_u32());
  cfg.emb_dim = static_cast<int>(get_u32());
  cfg.hidden = static_cast<int>(get_u32());
  in.read(reinterpret_cast<char*>(&cfg.seed), sizeof(cfg.seed));
  SequenceModel model;
  model.cfg = cfg;
  model.embed.resize(cfg.emb_dim, cfg.vocab);
  model.w_in.resize(cfg.hidden, 2 * cfg.emb_dim);
  model.w_out.resize(cfg.vocab, cfg.hidden);
  for (Eigen::MatrixXd* m : {&model.embed, &model.w_in, &model.w_out}) {
    in.read(reinterpret_cast<char*>(m->data()),
            static_cast<std::streamsize>(sizeof(double) * m->size()));
  }
  if (!in) throw InputError("truncated checkpoint " + path.string());
  return model;
}

}  // namespace arelu
