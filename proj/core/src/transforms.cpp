// SPDX-License-Identifier: Apache-2.0
#include "arelu/transforms.hpp"

#include <cmath>
#include <numeric>

#include "arelu/kernels.hpp"

namespace arelu {

namespace detail {

void check_logits(std::span<const double> z) {
  if (z.empty()) throw InputError("logits must have dimension >= 1");
  for (const double v : z) {
    if (!std::isfinite(v)) {
      throw InputError("logits must be finite (found NaN or Inf)");
    }
  }
}

void check_alpha(double alpha) {
  if (!(alpha > 1.0)) {
    throw ConfigError("alpha must be > 1, got " + std::to_string(alpha));
  }
}

}  // namespace detail

double WeightVector::sum() const {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

double WeightVector::zero_fraction() const {
  if (values.empty()) return 0.0;
  std::size_t zeros = 0;
  for (const double v : values) {
    if (v == 0.0) ++zeros;
  }
  return static_cast<double>(zeros) / static_cast<double>(values.size());
}

std::size_t WeightVector::support_size() const {
  std::size_t n = 0;
  for (const double v : values) {
    if (v > 0.0) ++n;
  }
  return n;
}

WeightVector softmax(std::span<const double> z) {
  detail::check_logits(z);
  WeightVector out;
  out.values.resize(z.size());
  out.normalized = true;
  kernels::softmax_row(z.data(), out.values.data(), z.size());
  return out;
}

ThresholdResult entmax_bisect(std::span<const double> z, double alpha) {
  detail::check_logits(z);
  detail::check_alpha(alpha);
  ThresholdResult res;
  res.weights.values.resize(z.size());
  res.weights.normalized = true;
  res.threshold =
      kernels::entmax_bisect_row(z.data(), res.weights.values.data(), z.size(),
                                 alpha, detail::kBisectTol,
                                 detail::kBisectMaxIter);
  return res;
}

ThresholdResult entmax15_sorted(std::span<const double> z) {
  detail::check_logits(z);
  ThresholdResult res;
  res.weights.values.resize(z.size());
  res.weights.normalized = true;
  std::vector<double> work(z.size());
  res.threshold = kernels::entmax15_sorted_row(
      z.data(), res.weights.values.data(), z.size(), work.data());
  return res;
}

ThresholdResult sparsemax(std::span<const double> z) {
  detail::check_logits(z);
  ThresholdResult res;
  res.weights.values.resize(z.size());
  res.weights.normalized = true;
  std::vector<double> work(z.size());
  res.threshold = kernels::sparsemax_row(z.data(), res.weights.values.data(),
                                         z.size(), work.data());
  return res;
}

WeightVector arelu(std::span<const double> z, const TransformConfig& cfg) {
  detail::check_logits(z);
  detail::check_alpha(cfg.alpha);
  WeightVector out;
  out.values.resize(z.size());
  out.normalized = false;
  kernels::arelu_row(z.data(), out.values.data(), z.size(), cfg.alpha,
                     cfg.tau);
  return out;
}

std::vector<double> arelu_jacobian_diag(std::span<const double> z,
                                        const TransformConfig& cfg) {
  const WeightVector p = arelu(z, cfg);
  std::vector<double> diag(p.values.size(), 0.0);
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    if (p.values[i] > 0.0) {
      diag[i] = std::pow(p.values[i], 2.0 - cfg.alpha);
    }
  }
  return diag;
}

WeightVector apply_transform(std::span<const double> z,
                             const TransformConfig& cfg) {
  switch (cfg.kind) {
    case TransformKind::softmax:
      return softmax(z);
    case TransformKind::sparsemax:
      return sparsemax(z).weights;
    case TransformKind::entmax15_sorted:
      if (cfg.alpha != 1.5) {
        throw ConfigError("entmax15_sorted requires alpha = 1.5 exactly");
      }
      return entmax15_sorted(z).weights;
    case TransformKind::entmax_bisect:
      return entmax_bisect(z, cfg.alpha).weights;
    case TransformKind::arelu:
      return arelu(z, cfg);
  }
  throw ConfigError("unknown transform kind");
}

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::softmax:
      return "softmax";
    case TransformKind::sparsemax:
      return "sparsemax";
    case TransformKind::entmax15_sorted:
      return "entmax15";
    case TransformKind::entmax_bisect:
      return "entmax_bisect";
    case TransformKind::arelu:
      return "arelu";
  }
  return "unknown";
}

TransformKind transform_kind_from_string(std::string_view name) {
  if (name == "softmax") return TransformKind::softmax;
  if (name == "sparsemax") return TransformKind::sparsemax;
  if (name == "entmax15") return TransformKind::entmax15_sorted;
  if (name == "entmax_bisect") return TransformKind::entmax_bisect;
  if (name == "arelu") return TransformKind::arelu;
  throw ConfigError("unknown transform: " + std::string(name));
}

}  // namespace arelu
