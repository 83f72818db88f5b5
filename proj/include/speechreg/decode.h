// speechreg/decode.h

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

// CTC prefix beam search with shallow character-level LM fusion. A
// hypothesis is ranked by
//   ln p_ctc(prefix) + alpha * ln p_lm(prefix) + beta * |prefix|,
// where the LM term accumulates one conditional per emitted character,
// starting from <s>.

#ifndef SPEECHREG_DECODE_H_
#define SPEECHREG_DECODE_H_

#include <vector>

#include "speechreg/ctc.h"
#include "speechreg/lm.h"

namespace speechreg {

/// Maps alphabet labels onto LM symbols (' ' -> <space>) and scores in
/// natural log. Read-only after construction; safe to share across threads.
class LmScorer {
 public:
  LmScorer(const NGramModel &model, const Alphabet &alphabet);

  /// ln p(label | previous labels).
  double Score(const LabelSequence &history, int label) const;
  const NGramModel &model() const { return model_; }

 private:
  const NGramModel &model_;
  std::vector<int> label_to_symbol_;  // indexed by label id
  int start_symbol_;
};

struct DecodeConfig {
  size_t beam_width = 100;
  double lm_weight = 1.0;        // alpha
  double insertion_bonus = 1.5;  // beta, per emitted character
  const LmScorer *lm = nullptr;  // no fusion when null

  void Validate() const;
};

struct DecodeHypothesis {
  LabelSequence labels;
  double score = 0.0;     // combined ranking score
  double acoustic = 0.0;  // ln p_ctc summed over surviving alignments
  double lm = 0.0;        // ln p_lm(labels), zero without fusion
};

/// Up to beam_width hypotheses, best first; ties go to the lexicographically
/// smaller label sequence. Candidates are the final beams of searches at
/// widths B, B/2, ..., 1, and each is ranked with its exact CTC likelihood.
std::vector<DecodeHypothesis> BeamSearch(const LogProbLattice &lattice,
                                         const DecodeConfig &config);

}  // namespace speechreg

#endif  // SPEECHREG_DECODE_H_
