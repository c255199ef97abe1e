// SPDX-License-Identifier: Apache-2.0
#include "arelu/calibration.hpp"

#include "arelu/transforms.hpp"

namespace arelu {

double calibrate_tau(const std::vector<std::vector<double>>& batch,
                     double alpha) {
  if (batch.empty()) throw InputError("calibrate_tau: empty batch");
  double acc = 0.0;
  for (const auto& row : batch) {
    acc += entmax_bisect(row, alpha).threshold;
  }
  return acc / static_cast<double>(batch.size());
}

}  // namespace arelu
