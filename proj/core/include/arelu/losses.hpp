// SPDX-License-Identifier: Apache-2.0
#pragma once

// Losses matched to each transform. Every loss returns its value together
// with the closed-form logit gradient sigma(z) - e_y, where sigma is the
// paired transform; nothing here is numerically differentiated.

#include <span>
#include <vector>

#include "arelu/transforms.hpp"

namespace arelu {

struct LossResult {
  double value = 0.0;
  std::vector<double> gradient;
};

// Tsallis alpha-entropy H_alpha[p] = 1/(alpha(alpha-1)) sum_j (p_j - p_j^alpha).
// Requires p >= 0 componentwise and alpha != 1.
double tsallis_entropy(std::span<const double> p, double alpha);

// value = (arelu(z) - e_y)^T (z - tau/(alpha-1) 1) + H_alpha[arelu(z)],
// gradient = arelu(z) - e_y. Zero exactly when arelu(z) = e_y.
LossResult arelu_loss(std::span<const double> z, int y,
                      const TransformConfig& cfg);

// value = (p* - e_y)^T z + H_alpha[p*] with p* = entmax(z, alpha); the
// constant-shift term drops out because p* sums to 1.
LossResult entmax_loss(std::span<const double> z, int y, double alpha);

// entmax loss at alpha = 2.
LossResult sparsemax_loss(std::span<const double> z, int y);

// value = logsumexp(z) - z_y, gradient = softmax(z) - e_y.
LossResult cross_entropy(std::span<const double> z, int y);

// Dispatch to the loss paired with cfg.kind.
LossResult matched_loss(std::span<const double> z, int y,
                        const TransformConfig& cfg);

}  // namespace arelu
