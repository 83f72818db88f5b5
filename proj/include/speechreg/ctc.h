// speechreg/ctc.h

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

// Connectionist temporal classification. Class 0 is the blank; symbols of an
// alphabet of size V occupy classes 1..V, so a lattice has V + 1 columns.
// All recursions run in log space in double precision.

#ifndef SPEECHREG_CTC_H_
#define SPEECHREG_CTC_H_

#include <string>
#include <string_view>
#include <vector>

#include "speechreg/tensor.h"

namespace speechreg {

inline constexpr int kBlank = 0;

/// Label ids in [1, V]; never the blank.
using LabelSequence = std::vector<int>;

class Alphabet {
 public:
  Alphabet() = default;
  /// Throws ArgumentError on duplicate symbols or an empty alphabet.
  explicit Alphabet(std::string symbols);

  const std::string &symbols() const { return symbols_; }
  int size() const { return static_cast<int>(symbols_.size()); }
  int num_classes() const { return size() + 1; }
  bool Contains(char c) const;
  /// 1-based id of `c`; throws ArgumentError naming the character if absent.
  int Id(char c) const;
  char Symbol(int id) const;
  LabelSequence Encode(std::string_view text) const;
  std::string Decode(const LabelSequence &labels) const;

 private:
  std::string symbols_;
  int index_[256] = {};
};

/// Frames x classes matrix of per-frame log-probabilities.
class LogProbLattice {
 public:
  LogProbLattice() = default;
  explicit LogProbLattice(Tensor values);

  size_t frames() const { return values_.empty() ? 0 : values_.dim(0); }
  size_t classes() const { return values_.empty() ? 0 : values_.dim(1); }
  double at(size_t t, size_t k) const { return values_.at(t, k); }
  const Tensor &values() const { return values_; }

  /// Max over rows of |logsumexp(row)|.
  double MaxRowNormalizationError() const;

 private:
  Tensor values_;
};

/// Row-wise log-softmax of a [T, K] logit matrix.
LogProbLattice LogSoftmax(const Tensor &logits);

/// Fewest frames that admit an alignment: |l| plus one per adjacent repeat.
size_t MinFramesForLabels(const LabelSequence &labels);

struct CtcResult {
  double loss = 0.0;  // -log p(labels | lattice); +inf when infeasible
  bool feasible = true;
};

/// Forward recursion. Infeasible targets return {+inf, false}; no throw.
CtcResult CtcLoss(const LogProbLattice &lattice, const LabelSequence &labels);

/// Exhaustive path enumeration; throws ArgumentError if classes^frames > 1e7.
double BruteForceCtc(const LogProbLattice &lattice, const LabelSequence &labels);

struct CtcLossGrad {
  double loss = 0.0;
  Tensor grad;        // d loss / d logits, [T, K]
  Tensor posteriors;  // per-frame class occupancy, rows sum to 1
};

/// Forward-backward. Gradient with respect to the pre-softmax logits:
/// softmax - posterior. Throws ArgumentError for infeasible targets.
CtcLossGrad CtcForwardBackward(const LogProbLattice &lattice, const LabelSequence &labels);

inline Tensor CtcGrad(const LogProbLattice &lattice, const LabelSequence &labels) {
  return CtcForwardBackward(lattice, labels).grad;
}

/// Best path: per-frame argmax (lowest index wins ties), merge repeats, drop
/// blanks.
LabelSequence GreedyDecode(const LogProbLattice &lattice);

/// Merge repeats then drop blanks.
LabelSequence CollapsePath(const std::vector<int> &path);

}  // namespace speechreg

#endif  // SPEECHREG_CTC_H_
