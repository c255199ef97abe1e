// SPDX-License-Identifier: Apache-2.0
#include "arelu/experiments.hpp"

#include <algorithm>
#include <cmath>

namespace arelu {

KernelMatrix empirical_ntk(const TinyNetwork& net, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& xp) {
  KernelMatrix km;
  km.jac_x = output_jacobian(net, x);
  km.jac_xp = output_jacobian(net, xp);
  km.k.noalias() = km.jac_x * km.jac_xp.transpose();
  return km;
}

DynamicsReport dynamics_check(const TinyNetwork& net0, const Dataset& data,
                              const TransformConfig& head, double lr,
                              int steps, int n_probes) {
  if (!(lr > 0.0)) throw ConfigError("dynamics_check needs lr > 0");
  if (data.n() == 0) throw InputError("dynamics_check: empty dataset");
  TinyNetwork net = net0;
  const int d = net.output_dim();
  const int n = data.n();
  n_probes = std::min(n_probes, n);

  DynamicsReport report;
  report.probes.resize(static_cast<std::size_t>(n_probes));
  for (int p = 0; p < n_probes; ++p) report.probes[p].index = p;

  for (int step = 0; step < steps; ++step) {
    const ForwardTrace trace = forward_trace(net, data.x);
    Eigen::MatrixXd grad_logits(d, n);
    for (int b = 0; b < n; ++b) {
      std::vector<double> z(trace.logits().col(b).data(),
                            trace.logits().col(b).data() + d);
      const LossResult lr_b = matched_loss(z, data.y[b], head);
      grad_logits.col(b) =
          Eigen::Map<const Eigen::VectorXd>(lr_b.gradient.data(), d) /
          static_cast<double>(n);
    }
    const std::vector<Eigen::MatrixXd> grads =
        backward(net, trace, grad_logits);
    const Eigen::VectorXd delta_theta = -lr * flatten(grads);

    std::vector<Eigen::VectorXd> predicted(
        static_cast<std::size_t>(n_probes));
    for (int p = 0; p < n_probes; ++p) {
      predicted[p].noalias() =
          output_jacobian(net, data.x.col(p)) * delta_theta;
    }

    const Eigen::MatrixXd before = trace.logits().leftCols(n_probes);
    Optimizer sgd(OptimizerConfig{.kind = OptimizerKind::sgd, .lr = lr});
    optimizer_step(net, grads, sgd);
    const Eigen::MatrixXd after = forward(net, data.x.leftCols(n_probes));

    for (int p = 0; p < n_probes; ++p) {
      const Eigen::VectorXd observed = after.col(p) - before.col(p);
      const double pn = predicted[p].norm();
      const double on = observed.norm();
      const double denom = pn * on;
      const double cosine =
          denom > 0.0 ? predicted[p].dot(observed) / denom
                      : (pn == on ? 1.0 : 0.0);
      const double rel =
          on > 0.0 ? (predicted[p] - observed).norm() / on : pn;
      auto& probe = report.probes[static_cast<std::size_t>(p)];
      probe.cosine += cosine;
      probe.rel_err += rel;
      probe.predicted_norm += pn;
      probe.observed_norm += on;
    }
  }
  for (auto& probe : report.probes) {
    probe.cosine /= steps;
    probe.rel_err /= steps;
    probe.predicted_norm /= steps;
    probe.observed_norm /= steps;
    report.mean_cosine += probe.cosine;
    report.mean_rel_err += probe.rel_err;
  }
  report.mean_cosine /= static_cast<double>(report.probes.size());
  report.mean_rel_err /= static_cast<double>(report.probes.size());
  return report;
}

SparsityStats sparsity_histogram(const std::vector<std::vector<double>>& logits,
                                 const TransformConfig& cfg, int buckets) {
  if (logits.empty()) throw InputError("sparsity_histogram: empty input");
  if (buckets < 1) throw ConfigError("sparsity_histogram: buckets >= 1");
  SparsityStats stats;
  stats.buckets = buckets;
  stats.histogram.assign(static_cast<std::size_t>(buckets), 0);
  stats.zero_fraction.reserve(logits.size());
  for (const auto& row : logits) {
    const double frac = apply_transform(row, cfg).zero_fraction();
    stats.zero_fraction.push_back(frac);
    int bucket = static_cast<int>(frac * buckets);
    if (bucket >= buckets) bucket = buckets - 1;
    ++stats.histogram[static_cast<std::size_t>(bucket)];
    stats.mean += frac;
  }
  stats.mean /= static_cast<double>(logits.size());
  std::vector<double> sorted = stats.zero_fraction;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  stats.median = sorted.size() % 2 == 1
                     ? sorted[mid]
                     : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return stats;
}

EmptySeqReport empty_sequence_rate(const SequenceModel& model,
                                   const std::vector<std::vector<int>>& dev,
                                   const TransformConfig& cfg,
                                   int beam_width) {
  if (dev.empty()) throw InputError("empty_sequence_rate: empty dev set");
  EmptySeqReport report;
  report.total = static_cast<int>(dev.size());
  const std::vector<int> empty_target{model.cfg.eos};
  for (const auto& src : dev) {
    const DecodeResult hyp = decode(model, src, cfg, beam_width);
    const SequenceScore empty = score_sequence(model, src, empty_target, cfg);
    if (empty.logp_norm > hyp.logp_norm) ++report.preferred;
  }
  report.rate_percent =
      100.0 * static_cast<double>(report.preferred) / report.total;
  return report;
}

std::vector<TauSweepEntry> tau_sweep(const std::vector<double>& taus,
                                     const ClusterTaskConfig& task,
                                     const std::vector<int>& widths,
                                     const TrainConfig& base) {
  if (taus.empty()) throw InputError("tau_sweep: no tau values");
  for (const double tau : taus) {
    if (!std::isfinite(tau)) throw InputError("tau_sweep: tau must be finite");
  }
  const Dataset data = make_cluster_dataset(task);
  std::vector<TauSweepEntry> entries;
  entries.reserve(taus.size());
  for (const double tau : taus) {
    TinyNetwork net = make_network(widths, Activation::relu, base.seed);
    TrainConfig cfg = base;
    cfg.head.kind = TransformKind::arelu;
    cfg.head.tau = tau;
    entries.push_back({tau, train(net, data, cfg)});
  }
  return entries;
}

std::vector<std::vector<double>> collect_logits(const TinyNetwork& net,
                                                const Dataset& data) {
  const Eigen::MatrixXd logits = forward(net, data.x);
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(data.n()));
  for (int b = 0; b < data.n(); ++b) {
    rows[static_cast<std::size_t>(b)].assign(
        logits.col(b).data(), logits.col(b).data() + logits.rows());
  }
  return rows;
}

}  // namespace arelu
