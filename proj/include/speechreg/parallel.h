// speechreg/parallel.h

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

#ifndef SPEECHREG_PARALLEL_H_
#define SPEECHREG_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace speechreg {

/// Worker cap: SPEECHREG_THREADS if set to a positive integer, else the
/// hardware concurrency (at least 1).
size_t NumThreads();

/// Runs fn(i) for i in [0, n) on up to NumThreads() workers. Results must
/// depend only on i. If any call throws, the exception of the lowest
/// failing index is rethrown after all workers finish.
void ParallelFor(size_t n, const std::function<void(size_t)> &fn);

}  // namespace speechreg

#endif  // SPEECHREG_PARALLEL_H_
