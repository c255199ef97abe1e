// SPDX-License-Identifier: Apache-2.0
#include "arelu/losses.hpp"

#include <algorithm>
#include <cmath>

#include "arelu/kernels.hpp"

namespace arelu {

namespace {

void check_label(int y, std::size_t d) {
  if (y < 0 || static_cast<std::size_t>(y) >= d) {
    throw IndexError("label " + std::to_string(y) + " out of range [0, " +
                     std::to_string(d) + ")");
  }
}

double pow_alpha(double p, double alpha) {
  if (p == 0.0 || p == 1.0) return p;
  if (alpha == 1.5) return p * std::sqrt(p);
  if (alpha == 2.0) return p * p;
  return std::pow(p, alpha);
}

// Entropy written as (1 - sum p^alpha)/(alpha(alpha-1)). On the simplex
// this equals tsallis_entropy; off it the two differ by a multiple of
// (1 - sum p), and only this form keeps the clamped chain rule
// telescoping so the loss gradient stays exactly p - e_y with a zero
// minimum at one-hot outputs.
double entropy_loss_form(std::span<const double> p, double alpha) {
  double mass = 1.0;
  for (const double v : p) mass -= pow_alpha(v, alpha);
  return mass / (alpha * (alpha - 1.0));
}

}  // namespace

double tsallis_entropy(std::span<const double> p, double alpha) {
  if (alpha == 1.0) {
    throw ConfigError("tsallis_entropy is undefined at alpha = 1");
  }
  double acc = 0.0;
  for (const double v : p) {
    if (v < 0.0) throw InputError("tsallis_entropy requires p >= 0");
    acc += v - pow_alpha(v, alpha);
  }
  return acc / (alpha * (alpha - 1.0));
}

LossResult arelu_loss(std::span<const double> z, int y,
                      const TransformConfig& cfg) {
  check_label(y, z.size());
  WeightVector p = arelu(z, cfg);
  const double shift = cfg.tau / (cfg.alpha - 1.0);
  LossResult res;
  res.gradient = std::move(p.values);
  double value = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    value += res.gradient[i] * (z[i] - shift);
  }
  value -= z[static_cast<std::size_t>(y)] - shift;
  value += entropy_loss_form(res.gradient, cfg.alpha);
  res.gradient[static_cast<std::size_t>(y)] -= 1.0;
  res.value = value;
  return res;
}

LossResult entmax_loss(std::span<const double> z, int y, double alpha) {
  check_label(y, z.size());
  // The sorted solver is exact for alpha = 1.5 and cheaper than bisection.
  ThresholdResult t = alpha == 1.5 ? entmax15_sorted(z)
                                   : entmax_bisect(z, alpha);
  LossResult res;
  res.gradient = std::move(t.weights.values);
  double value = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    value += res.gradient[i] * z[i];
  }
  value -= z[static_cast<std::size_t>(y)];
  value += tsallis_entropy(res.gradient, alpha);
  res.gradient[static_cast<std::size_t>(y)] -= 1.0;
  res.value = value;
  return res;
}

LossResult sparsemax_loss(std::span<const double> z, int y) {
  return entmax_loss(z, y, 2.0);
}

LossResult cross_entropy(std::span<const double> z, int y) {
  check_label(y, z.size());
  detail::check_logits(z);
  LossResult res;
  res.gradient.resize(z.size());
  kernels::softmax_row(z.data(), res.gradient.data(), z.size());
  double m = z[0];
  for (const double v : z) m = std::max(m, v);
  double sum = 0.0;
  for (const double v : z) sum += std::exp(v - m);
  res.value = m + std::log(sum) - z[static_cast<std::size_t>(y)];
  res.gradient[static_cast<std::size_t>(y)] -= 1.0;
  return res;
}

LossResult matched_loss(std::span<const double> z, int y,
                        const TransformConfig& cfg) {
  switch (cfg.kind) {
    case TransformKind::softmax:
      return cross_entropy(z, y);
    case TransformKind::sparsemax:
      return sparsemax_loss(z, y);
    case TransformKind::entmax15_sorted:
      if (cfg.alpha != 1.5) {
        throw ConfigError("entmax15_sorted requires alpha = 1.5 exactly");
      }
      return entmax_loss(z, y, 1.5);
    case TransformKind::entmax_bisect:
      return entmax_loss(z, y, cfg.alpha);
    case TransformKind::arelu:
      return arelu_loss(z, y, cfg);
  }
  throw ConfigError("unknown transform kind");
}

}  // namespace arelu
