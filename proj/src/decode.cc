// src/decode.cc

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

#include "speechreg/decode.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "speechreg/common.h"

namespace speechreg {

LmScorer::LmScorer(const NGramModel &model, const Alphabet &alphabet)
    : model_(model), start_symbol_(model.Index(kSentenceStart)) {
  label_to_symbol_.assign(static_cast<size_t>(alphabet.num_classes()), -1);
  for (int id = 1; id <= alphabet.size(); ++id) {
    const char c = alphabet.Symbol(id);
    label_to_symbol_[static_cast<size_t>(id)] =
        model.Index(c == ' ' ? std::string(kSpaceToken) : std::string(1, c));
  }
}

double LmScorer::Score(const LabelSequence &history, int label) const {
  const size_t need = static_cast<size_t>(model_.order() - 1);
  std::vector<int> context;
  context.reserve(need);
  const size_t take = std::min(need, history.size());
  if (take < need) context.push_back(start_symbol_);
  for (size_t i = history.size() - take; i < history.size(); ++i)
    context.push_back(label_to_symbol_.at(static_cast<size_t>(history[i])));
  return std::numbers::ln10 *
         model_.ScoreIds(context, label_to_symbol_.at(static_cast<size_t>(label)));
}

void DecodeConfig::Validate() const {
  if (beam_width < 1) throw ArgumentError("beam width must be at least 1");
  if (lm_weight < 0.0) throw ArgumentError("LM weight must be non-negative");
}

namespace {

struct Beam {
  double blank = kLogZero;     // prefix probability, path ends in blank
  double nonblank = kLogZero;  // path ends in the prefix's last label
  double bonus = 0.0;          // alpha * lm + beta * length
  double lm = 0.0;

  double acoustic() const { return LogAdd(blank, nonblank); }
  double score() const { return acoustic() + bonus; }
};

using BeamSet = std::map<LabelSequence, Beam>;

}  // namespace

namespace {

// Final beam of one prefix search at the given width, as prefix -> beam.
BeamSet RunBeam(const LogProbLattice &lattice, const DecodeConfig &config, size_t width) {
  const size_t T = lattice.frames();
  const int K = static_cast<int>(lattice.classes());

  std::vector<std::pair<LabelSequence, Beam>> beam;
  beam.push_back({LabelSequence{}, Beam{0.0, kLogZero, 0.0, 0.0}});

  for (size_t t = 0; t < T; ++t) {
    BeamSet next;
    for (const auto &[prefix, b] : beam) {
      // Staying on the same prefix: emit blank, or repeat the last label.
      Beam &same = next.try_emplace(prefix, Beam{kLogZero, kLogZero, b.bonus, b.lm}).first->second;
      same.blank = LogAdd(same.blank, b.acoustic() + lattice.at(t, kBlank));
      if (!prefix.empty())
        same.nonblank =
            LogAdd(same.nonblank, b.nonblank + lattice.at(t, static_cast<size_t>(prefix.back())));

      for (int k = 1; k < K; ++k) {
        const double emit = lattice.at(t, static_cast<size_t>(k));
        // A repeated label only extends through a blank.
        const double from = !prefix.empty() && prefix.back() == k ? b.blank : b.acoustic();
        if (from == kLogZero) continue;
        LabelSequence extended = prefix;
        extended.push_back(k);
        auto [it, inserted] = next.try_emplace(std::move(extended));
        Beam &e = it->second;
        if (inserted) {
          const double lm = config.lm ? config.lm->Score(prefix, k) : 0.0;
          e.lm = b.lm + lm;
          e.bonus = b.bonus + config.lm_weight * lm + config.insertion_bonus;
        }
        e.nonblank = LogAdd(e.nonblank, from + emit);
      }
    }

    beam.assign(next.begin(), next.end());  // lexicographic order
    std::stable_sort(beam.begin(), beam.end(), [](const auto &a, const auto &b) {
      return a.second.score() > b.second.score();
    });
    while (!beam.empty() && beam.back().second.acoustic() == kLogZero) beam.pop_back();
    if (beam.size() > width) beam.resize(width);
  }
  return BeamSet(beam.begin(), beam.end());
}

}  // namespace

std::vector<DecodeHypothesis> BeamSearch(const LogProbLattice &lattice,
                                         const DecodeConfig &config) {
  config.Validate();
  // Candidates are the union of the final beams at widths B, B/2, ..., 1, so
  // the candidate set of width B contains that of width B/2 and the top
  // score never drops when the width doubles.
  BeamSet candidates;
  for (size_t width = config.beam_width; width >= 1; width /= 2)
    candidates.merge(RunBeam(lattice, config, width));

  // Ranking uses the exact CTC likelihood of each label sequence rather than
  // the mass of the alignments that survived pruning.
  std::vector<DecodeHypothesis> out;
  out.reserve(candidates.size());
  for (const auto &[prefix, b] : candidates) {
    DecodeHypothesis h;
    h.labels = prefix;
    h.acoustic = -CtcLoss(lattice, prefix).loss;
    h.lm = b.lm;
    h.score = h.acoustic + b.bonus;
    out.push_back(std::move(h));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto &a, const auto &b) { return a.score > b.score; });
  if (out.size() > config.beam_width) out.resize(config.beam_width);
  return out;
}

}  // namespace speechreg
