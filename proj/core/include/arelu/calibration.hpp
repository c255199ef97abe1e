// SPDX-License-Identifier: Apache-2.0
#pragma once

// Threshold calibration: run a batch of logits through the entmax
// threshold solver and average the per-row thresholds. The result is used
// as the constant tau of the arelu transform, so that early in training
// the arelu output stays close to a probability distribution.

#include <span>
#include <vector>

#include "arelu/errors.hpp"

namespace arelu {

// Mean of entmax_bisect(row, alpha).threshold over all rows. Deterministic
// and invariant to row order. Throws InputError on an empty batch and
// ConfigError for alpha <= 1.
double calibrate_tau(const std::vector<std::vector<double>>& batch,
                     double alpha);

}  // namespace arelu
