// src/dropout.cc

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

#include "speechreg/dropout.h"

#include <string>

namespace speechreg {

namespace {

void CheckProbability(double p) {
  if (!(p >= 0.0 && p < 1.0))
    throw ArgumentError("dropout: probability " + std::to_string(p) + " outside [0, 1)");
}

std::vector<uint8_t> Draw(size_t n, double p, Rng &rng) {
  std::vector<uint8_t> keep(n);
  for (auto &k : keep) k = rng.Uniform() >= p ? 1 : 0;
  return keep;
}

}  // namespace

DropoutMask SampleStandardMask(const Shape &shape, double p, Rng &rng) {
  CheckProbability(p);
  return DropoutMask{Draw(NumElements(shape), p, rng), shape, p, MaskKind::kPerTimestep};
}

DropoutMask SampleSequenceMask(size_t feature_dim, double p, Rng &rng) {
  CheckProbability(p);
  return DropoutMask{Draw(feature_dim, p, rng), Shape{feature_dim}, p,
                     MaskKind::kFixedAcrossTime};
}

Tensor ApplyTrain(const Tensor &x, const DropoutMask &mask, size_t time_axis) {
  Tensor out = x;
  if (mask.kind == MaskKind::kPerTimestep) {
    if (mask.shape != x.shape())
      throw ArgumentError("dropout: mask shape " + ShapeToString(mask.shape) +
                          " does not match input " + ShapeToString(x.shape()));
    for (size_t i = 0; i < out.size(); ++i)
      if (!mask.keep[i]) out[i] = 0.0;
    return out;
  }
  if (time_axis >= x.rank())
    throw ArgumentError("dropout: time axis out of range for " + ShapeToString(x.shape()));
  size_t outer = 1, inner = 1;
  for (size_t a = 0; a < time_axis; ++a) outer *= x.dim(a);
  for (size_t a = time_axis + 1; a < x.rank(); ++a) inner *= x.dim(a);
  const size_t steps = x.dim(time_axis);
  if (outer * inner != mask.keep.size())
    throw ArgumentError("dropout: sequence mask over " + std::to_string(mask.keep.size()) +
                        " features does not fit input " + ShapeToString(x.shape()));
  for (size_t o = 0; o < outer; ++o)
    for (size_t t = 0; t < steps; ++t)
      for (size_t i = 0; i < inner; ++i)
        if (!mask.keep[o * inner + i]) out[(o * steps + t) * inner + i] = 0.0;
  return out;
}

Tensor ApplyEval(const Tensor &x, double p) {
  CheckProbability(p);
  Tensor out = x;
  if (p == 0.0) return out;
  out *= 1.0 - p;
  return out;
}

}  // namespace speechreg
