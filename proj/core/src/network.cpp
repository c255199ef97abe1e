// SPDX-License-Identifier: Apache-2.0
#include "arelu/network.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

namespace arelu {

namespace {

constexpr char kNetMagic[5] = {'A', 'R', 'N', 'E', 'T'};
constexpr std::uint32_t kNetVersion = 1;

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation act) {
  if (act == Activation::identity) return z;
  return z.cwiseMax(0.0);
}

void check_input(const TinyNetwork& net, const Eigen::MatrixXd& x) {
  if (x.rows() != net.input_dim()) {
    throw ShapeError("input has " + std::to_string(x.rows()) +
                     " rows, network expects " +
                     std::to_string(net.input_dim()));
  }
}

int argmax_col(const Eigen::MatrixXd& m, int col) {
  Eigen::Index idx = 0;
  m.col(col).maxCoeff(&idx);
  return static_cast<int>(idx);
}

}  // namespace

std::size_t TinyNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
  return n;
}

TinyNetwork make_network(const std::vector<int>& widths, Activation activation,
                         std::uint64_t seed) {
  if (widths.size() < 2) {
    throw ConfigError("a network needs at least input and output widths");
  }
  for (const int w : widths) {
    if (w < 1) throw ConfigError("layer widths must be positive");
  }
  TinyNetwork net;
  net.widths = widths;
  net.activation = activation;
  net.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  net.weights.reserve(widths.size() - 1);
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    Eigen::MatrixXd w(widths[k + 1], widths[k]);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = normal(rng);
    net.weights.push_back(std::move(w));
  }
  return net;
}

Eigen::MatrixXd forward(const TinyNetwork& net, const Eigen::MatrixXd& x) {
  check_input(net, x);
  Eigen::MatrixXd h = x;
  const int depth = net.depth();
  for (int k = 0; k < depth; ++k) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(net.widths[k]));
    Eigen::MatrixXd z = scale * (net.weights[k] * h);
    if (k + 1 < depth) {
      h = activate(z, net.activation);
    } else {
      h = std::move(z);
    }
  }
  return h;
}

ForwardTrace forward_trace(const TinyNetwork& net, const Eigen::MatrixXd& x) {
  check_input(net, x);
  ForwardTrace trace;
  const int depth = net.depth();
  trace.h.reserve(depth);
  trace.z.reserve(depth);
  trace.h.push_back(x);
  for (int k = 0; k < depth; ++k) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(net.widths[k]));
    trace.z.push_back(scale * (net.weights[k] * trace.h.back()));
    if (k + 1 < depth) {
      trace.h.push_back(activate(trace.z.back(), net.activation));
    }
  }
  return trace;
}

std::vector<Eigen::MatrixXd> backward(const TinyNetwork& net,
                                      const ForwardTrace& trace,
                                      const Eigen::MatrixXd& grad_logits) {
  const int depth = net.depth();
  if (grad_logits.rows() != net.output_dim() ||
      grad_logits.cols() != trace.logits().cols()) {
    throw ShapeError("grad_logits shape does not match the forward trace");
  }
  std::vector<Eigen::MatrixXd> grads(depth);
  Eigen::MatrixXd g = grad_logits;
  for (int k = depth - 1; k >= 0; --k) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(net.widths[k]));
    grads[k].noalias() = scale * (g * trace.h[k].transpose());
    if (k > 0) {
      Eigen::MatrixXd gh = scale * (net.weights[k].transpose() * g);
      if (net.activation == Activation::relu) {
        g = ((trace.z[k - 1].array() > 0.0).cast<double>() * gh.array())
                .matrix();
      } else {
        g = std::move(gh);
      }
    }
  }
  return grads;
}

Eigen::VectorXd flatten(const std::vector<Eigen::MatrixXd>& mats) {
  Eigen::Index total = 0;
  for (const auto& m : mats) total += m.size();
  Eigen::VectorXd flat(total);
  Eigen::Index off = 0;
  for (const auto& m : mats) {
    flat.segment(off, m.size()) =
        Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    off += m.size();
  }
  return flat;
}

Eigen::MatrixXd output_jacobian(const TinyNetwork& net,
                                const Eigen::VectorXd& x) {
  const ForwardTrace trace = forward_trace(net, x);
  const int d = net.output_dim();
  Eigen::MatrixXd jac(d, static_cast<Eigen::Index>(net.parameter_count()));
  Eigen::MatrixXd seed = Eigen::MatrixXd::Zero(d, 1);
  for (int i = 0; i < d; ++i) {
    seed(i, 0) = 1.0;
    jac.row(i) = flatten(backward(net, trace, seed)).transpose();
    seed(i, 0) = 0.0;
  }
  return jac;
}

Optimizer::Optimizer(const OptimizerConfig& cfg) : cfg_(cfg) {
  if (!(cfg.lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (cfg.kind == OptimizerKind::adam) {
    if (!(cfg.beta1 > 0.0 && cfg.beta1 < 1.0) ||
        !(cfg.beta2 > 0.0 && cfg.beta2 < 1.0)) {
      throw ConfigError("adam betas must lie in (0, 1)");
    }
    if (!(cfg.eps > 0.0)) throw ConfigError("adam eps must be positive");
  }
}

void Optimizer::step(const std::vector<Eigen::MatrixXd*>& params,
                     const std::vector<Eigen::MatrixXd>& grads) {
  if (params.size() != grads.size()) {
    throw ShapeError("parameter/gradient count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->rows() != grads[i].rows() ||
        params[i]->cols() != grads[i].cols()) {
      throw ShapeError("gradient shape mismatch at parameter " +
                       std::to_string(i));
    }
  }
  ++t_;
  if (cfg_.kind == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      *params[i] -= cfg_.lr * grads[i];
    }
    return;
  }
  if (m_.empty()) {
    for (const auto* p : params) {
      m_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
      v_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    }
  }
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grads[i];
    v_[i] = cfg_.beta2 * v_[i] +
            (1.0 - cfg_.beta2) * grads[i].cwiseProduct(grads[i]);
    params[i]->array() -= cfg_.lr * (m_[i].array() / bc1) /
                          ((v_[i].array() / bc2).sqrt() + cfg_.eps);
  }
}

void optimizer_step(TinyNetwork& net,
                    const std::vector<Eigen::MatrixXd>& grads,
                    Optimizer& opt) {
  std::vector<Eigen::MatrixXd*> params;
  params.reserve(net.weights.size());
  for (auto& w : net.weights) params.push_back(&w);
  opt.step(params, grads);
}

EvalMetrics evaluate(const TinyNetwork& net, const Dataset& data,
                     const TransformConfig& head) {
  const Eigen::MatrixXd logits = forward(net, data.x);
  const int n = data.n();
  EvalMetrics m;
  for (int b = 0; b < n; ++b) {
    std::vector<double> z(logits.col(b).data(),
                          logits.col(b).data() + logits.rows());
    m.loss += matched_loss(z, data.y[b], head).value;
    m.sparsity_mean += apply_transform(z, head).zero_fraction();
    if (argmax_col(logits, b) == data.y[b]) m.accuracy += 1.0;
  }
  m.loss /= n;
  m.accuracy /= n;
  m.sparsity_mean /= n;
  return m;
}

TrainResult train(TinyNetwork& net, const Dataset& data,
                  const TrainConfig& cfg) {
  if (data.n() == 0) throw InputError("train: empty dataset");
  if (data.x.cols() != data.n()) {
    throw ShapeError("dataset x/y size mismatch");
  }
  TrainResult result;
  const int steps = cfg.opt.steps;
  if (steps == 0) return result;

  Optimizer opt(cfg.opt);
  std::mt19937_64 rng(cfg.seed);
  const int n = data.n();
  const int batch = (cfg.batch_size <= 0 || cfg.batch_size >= n)
                        ? n
                        : cfg.batch_size;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  int cursor = n;  // force an initial shuffle for minibatch mode

  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed_ms = [&t0] {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  };
  const auto log_metrics = [&](int step) {
    const EvalMetrics m = evaluate(net, data, cfg.head);
    result.log.push_back(
        {step, m.loss, m.accuracy, m.sparsity_mean, elapsed_ms()});
  };

  log_metrics(0);
  Eigen::MatrixXd xb(data.x.rows(), batch);
  std::vector<int> yb(batch);
  for (int step = 1; step <= steps; ++step) {
    if (batch == n) {
      xb = data.x;
      yb = data.y;
    } else {
      for (int j = 0; j < batch; ++j) {
        if (cursor >= n) {
          std::shuffle(order.begin(), order.end(), rng);
          cursor = 0;
        }
        const int idx = order[cursor++];
        xb.col(j) = data.x.col(idx);
        yb[j] = data.y[idx];
      }
    }
    const ForwardTrace trace = forward_trace(net, xb);
    Eigen::MatrixXd grad_logits(net.output_dim(), batch);
    for (int b = 0; b < batch; ++b) {
      std::vector<double> z(trace.logits().col(b).data(),
                            trace.logits().col(b).data() +
                                net.output_dim());
      LossResult lr = matched_loss(z, yb[b], cfg.head);
      grad_logits.col(b) = Eigen::Map<const Eigen::VectorXd>(
                               lr.gradient.data(), net.output_dim()) /
                           static_cast<double>(batch);
    }
    optimizer_step(net, backward(net, trace, grad_logits), opt);
    if (step % cfg.log_every == 0 || step == steps) log_metrics(step);
  }
  result.final_loss = result.log.back().loss;
  result.final_accuracy = result.log.back().accuracy;
  result.final_sparsity = result.log.back().sparsity_mean;
  return result;
}

void save_network(const TinyNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out.write(kNetMagic, sizeof(kNetMagic));
  const auto put_u32 = [&out](std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  };
  put_u32(kNetVersion);
  put_u32(static_cast<std::uint32_t>(net.widths.size()));
  for (const int w : net.widths) put_u32(static_cast<std::uint32_t>(w));
  put_u32(net.activation == Activation::relu ? 0u : 1u);
  out.write(reinterpret_cast<const char*>(&net.seed), sizeof(net.seed));
  for (const auto& w : net.weights) {
    out.write(reinterpret_cast<const char*>(w.data()),
              static_cast<std::streamsize>(sizeof(double) * w.size()));
  }
  if (!out) throw InputError("short write to " + path.string());
}

TinyNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  char magic[sizeof(kNetMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kNetMagic, sizeof(magic)) != 0) {
    throw InputError(path.string() + " is not a network checkpoint");
  }
  const auto get_u32 = [&in, &path] {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw InputError("truncated checkpoint " + path.string());
    return v;
  };
  if (get_u32() != kNetVersion) {
    throw InputError("unsupported checkpoint version in " + path.string());
  }
  const std::uint32_t n_widths = get_u32();
  if (n_widths < 2 || n_widths > 64) {
    throw InputError("corrupt width header in " + path.string());
  }
  std::vector<int> widths(n_widths);
  for (auto& w : widths) w = static_cast<int>(get_u32());
  const std::uint32_t act = get_u32();
  TinyNetwork net;
  net.widths = widths;
  net.activation = act == 0 ? Activation::relu : Activation::identity;
  in.read(reinterpret_cast<char*>(&net.seed), sizeof(net.seed));
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    Eigen::MatrixXd w(widths[k + 1], widths[k]);
    in.read(reinterpret_cast<char*>(w.data()),
            static_cast<std::streamsize>(sizeof(double) * w.size()));
    net.weights.push_back(std::move(w));
  }
  if (!in) throw InputError("truncated checkpoint " + path.string());
  return net;
}

}  // namespace arelu
