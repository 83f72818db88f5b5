// speechreg/internal/resampler.h

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

#ifndef SPEECHREG_INTERNAL_RESAMPLER_H_
#define SPEECHREG_INTERNAL_RESAMPLER_H_

#include <vector>

namespace speechreg::internal {

// Resamples so that output length = round(len * ratio); ratio is
// target_rate / source_rate and need not be rational.
std::vector<double> ResampleByRatio(const std::vector<double> &input, double ratio);

}  // namespace speechreg::internal

#endif  // SPEECHREG_INTERNAL_RESAMPLER_H_
