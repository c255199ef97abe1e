// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace arelu {

// Bad data at an API boundary: NaN/Inf logits, empty batches, empty vectors.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Invalid configuration: alpha out of range, nonpositive learning rate,
// unknown transform kind.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Mismatched dimensions between weights, inputs, or gradients.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Label index outside [0, d).
struct IndexError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

}  // namespace arelu
