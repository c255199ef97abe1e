// SPDX-License-Identifier: Apache-2.0
#pragma once

// Sparse output transformations: softmax, sparsemax, 1.5-entmax (exact
// sorted solver), general-alpha entmax (bisection), and the thresholded
// power transform arelu with a constant, data-independent threshold.
//
// All functions are pure and safe to call concurrently.

#include <span>
#include <string_view>
#include <vector>

#include "arelu/errors.hpp"

namespace arelu {

enum class TransformKind {
  softmax,
  sparsemax,
  entmax15_sorted,
  entmax_bisect,
  arelu,
};

struct TransformConfig {
  double alpha = 1.5;  // entropic index, > 1 for the sparse kinds
  double tau = 0.0;    // constant threshold, used by arelu only
  TransformKind kind = TransformKind::arelu;
};

// Nonnegative weights. normalized is true for the entmax family and
// softmax (entries sum to 1); arelu outputs are unnormalized and may be
// all-zero.
struct WeightVector {
  std::vector<double> values;
  bool normalized = false;

  double sum() const;
  // Fraction of entries that are exactly 0.0.
  double zero_fraction() const;
  std::size_t support_size() const;
};

// Weights plus the threshold solving
// sum_j [(alpha-1) z_j - threshold]_+^{1/(alpha-1)} = 1.
struct ThresholdResult {
  WeightVector weights;
  double threshold = 0.0;
};

// Dense exponential normalization; strictly positive output, stable under
// large-magnitude logits.
WeightVector softmax(std::span<const double> z);

// General-alpha entmax via bisection on the normalization residual.
ThresholdResult entmax_bisect(std::span<const double> z, double alpha);

// Exact 1.5-entmax via the descending-sort cumulative-moment solver.
ThresholdResult entmax15_sorted(std::span<const double> z);

// Euclidean projection onto the probability simplex (entmax at alpha=2).
ThresholdResult sparsemax(std::span<const double> z);

// arelu_i(z) = [(alpha-1) z_i - tau]_+^{1/(alpha-1)} with cfg.tau constant.
// No sort, no data-dependent threshold; the zero vector is a legal output.
WeightVector arelu(std::span<const double> z, const TransformConfig& cfg);

// Diagonal of the Jacobian of arelu at z: [arelu_i(z)]^{2-alpha} on the
// support, 0 elsewhere (the clamp's subgradient at the kink).
std::vector<double> arelu_jacobian_diag(std::span<const double> z,
                                        const TransformConfig& cfg);

// Dispatch on cfg.kind. Threshold kinds drop the threshold.
WeightVector apply_transform(std::span<const double> z,
                             const TransformConfig& cfg);

std::string_view to_string(TransformKind kind);
TransformKind transform_kind_from_string(std::string_view name);

namespace detail {
// Residual tolerance for the bisection solver. Chosen well below the
// 1e-12 the threshold contract requires so downstream identities that
// rely on sum(p) == 1 hold to ~1e-13.
inline constexpr double kBisectTol = 1e-14;
inline constexpr int kBisectMaxIter = 100;

void check_logits(std::span<const double> z);
}  // namespace detail

}  // namespace arelu
