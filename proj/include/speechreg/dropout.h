// speechreg/dropout.h

// Copyright 2026  The speechreg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Dropout without inverted scaling: training multiplies by a 0/1 mask,
// evaluation multiplies by (1 - p), so E[train output] = eval output.
//
// Two mask kinds:
//   - per-timestep: an independent Bernoulli(1 - p) draw for every entry;
//   - fixed-across-time: one draw per feature, reused at every time step of
//     the sequence (no dropout on recurrent connections).

#ifndef SPEECHREG_DROPOUT_H_
#define SPEECHREG_DROPOUT_H_

#include <cstdint>
#include <vector>

#include "speechreg/common.h"
#include "speechreg/tensor.h"

namespace speechreg {

enum class MaskKind { kPerTimestep, kFixedAcrossTime };

struct DropoutMask {
  std::vector<uint8_t> keep;  // 0 or 1
  Shape shape;  // full tensor shape (per-timestep) or {feature_dim}
  double p = 0.0;
  MaskKind kind = MaskKind::kPerTimestep;
};

DropoutMask SampleStandardMask(const Shape &shape, double p, Rng &rng);
DropoutMask SampleSequenceMask(size_t feature_dim, double p, Rng &rng);

/// x * mask. A per-timestep mask must match x's shape. A fixed-across-time
/// mask is broadcast over `time_axis`: the remaining axes of x, flattened in
/// order, must have exactly feature_dim elements.
Tensor ApplyTrain(const Tensor &x, const DropoutMask &mask, size_t time_axis = 0);

/// Gradient of ApplyTrain with respect to x (the same masking of dy).
inline Tensor DropoutBackward(const Tensor &dy, const DropoutMask &mask,
                              size_t time_axis = 0) {
  return ApplyTrain(dy, mask, time_axis);
}

/// (1 - p) * x.
Tensor ApplyEval(const Tensor &x, double p);

}  // namespace speechreg

#endif  // SPEECHREG_DROPOUT_H_
