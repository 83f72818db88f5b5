// src/ctc.cc

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

#include "speechreg/ctc.h"

#include <cmath>
#include <limits>

#include "speechreg/common.h"

namespace speechreg {

Alphabet::Alphabet(std::string symbols) : symbols_(std::move(symbols)) {
  if (symbols_.empty()) throw ArgumentError("alphabet: no symbols");
  for (size_t i = 0; i < symbols_.size(); ++i) {
    auto &slot = index_[static_cast<unsigned char>(symbols_[i])];
    if (slot != 0)
      throw ArgumentError(std::string("alphabet: duplicate symbol '") + symbols_[i] + "'");
    slot = static_cast<int>(i) + 1;
  }
}

bool Alphabet::Contains(char c) const {
  return index_[static_cast<unsigned char>(c)] != 0;
}

int Alphabet::Id(char c) const {
  const int id = index_[static_cast<unsigned char>(c)];
  if (id == 0) throw ArgumentError(std::string("character '") + c + "' is not in the alphabet");
  return id;
}

char Alphabet::Symbol(int id) const {
  if (id < 1 || id > size())
    throw ArgumentError("alphabet: label id " + std::to_string(id) + " out of range");
  return symbols_[static_cast<size_t>(id - 1)];
}

LabelSequence Alphabet::Encode(std::string_view text) const {
  LabelSequence out;
  out.reserve(text.size());
  for (char c : text) out.push_back(Id(c));
  return out;
}

std::string Alphabet::Decode(const LabelSequence &labels) const {
  std::string out;
  out.reserve(labels.size());
  for (int id : labels) out.push_back(Symbol(id));
  return out;
}

LogProbLattice::LogProbLattice(Tensor values) : values_(std::move(values)) {
  if (values_.rank() != 2)
    throw ArgumentError("lattice: expected [frames, classes], got " +
                        ShapeToString(values_.shape()));
}

double LogProbLattice::MaxRowNormalizationError() const {
  double worst = 0.0;
  for (size_t t = 0; t < frames(); ++t) {
    double acc = kLogZero;
    for (size_t k = 0; k < classes(); ++k) acc = LogAdd(acc, at(t, k));
    worst = std::max(worst, std::fabs(acc));
  }
  return worst;
}

LogProbLattice LogSoftmax(const Tensor &logits) {
  if (logits.rank() != 2) throw ArgumentError("LogSoftmax: expected a matrix");
  Tensor out = logits;
  const size_t T = logits.dim(0), K = logits.dim(1);
  for (size_t t = 0; t < T; ++t) {
    double mx = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < K; ++k) mx = std::max(mx, logits.at(t, k));
    double sum = 0.0;
    for (size_t k = 0; k < K; ++k) sum += std::exp(logits.at(t, k) - mx);
    const double lse = mx + std::log(sum);
    for (size_t k = 0; k < K; ++k) out.at(t, k) = logits.at(t, k) - lse;
  }
  return LogProbLattice(std::move(out));
}

size_t MinFramesForLabels(const LabelSequence &labels) {
  size_t n = labels.size();
  for (size_t i = 1; i < labels.size(); ++i)
    if (labels[i] == labels[i - 1]) ++n;
  return n;
}

namespace {

void CheckLabels(const LogProbLattice &lattice, const LabelSequence &labels) {
  for (int id : labels)
    if (id <= kBlank || static_cast<size_t>(id) >= lattice.classes())
      throw ArgumentError("ctc: label id " + std::to_string(id) + " invalid for " +
                          std::to_string(lattice.classes()) + " classes");
}

std::vector<int> Extend(const LabelSequence &labels) {
  std::vector<int> ext(2 * labels.size() + 1, kBlank);
  for (size_t i = 0; i < labels.size(); ++i) ext[2 * i + 1] = labels[i];
  return ext;
}

// alpha[t][s]: log prob of all prefixes of paths ending in state s at t,
// including the emission at t.
std::vector<double> Forward(const LogProbLattice &y, const std::vector<int> &ext) {
  const size_t T = y.frames(), S = ext.size();
  std::vector<double> alpha(T * S, kLogZero);
  alpha[0] = y.at(0, ext[0]);
  if (S > 1) alpha[1] = y.at(0, ext[1]);
  for (size_t t = 1; t < T; ++t) {
    const double *prev = &alpha[(t - 1) * S];
    double *cur = &alpha[t * S];
    for (size_t s = 0; s < S; ++s) {
      double a = prev[s];
      if (s >= 1) a = LogAdd(a, prev[s - 1]);
      if (s >= 2 && ext[s] != kBlank && ext[s] != ext[s - 2]) a = LogAdd(a, prev[s - 2]);
      cur[s] = a == kLogZero ? kLogZero : a + y.at(t, ext[s]);
    }
  }
  return alpha;
}

// beta[t][s]: log prob of completing the path from state s at t, excluding
// the emission at t.
std::vector<double> Backward(const LogProbLattice &y, const std::vector<int> &ext) {
  const size_t T = y.frames(), S = ext.size();
  std::vector<double> beta(T * S, kLogZero);
  beta[(T - 1) * S + S - 1] = 0.0;
  if (S > 1) beta[(T - 1) * S + S - 2] = 0.0;
  for (size_t t = T - 1; t-- > 0;) {
    const double *next = &beta[(t + 1) * S];
    double *cur = &beta[t * S];
    for (size_t s = 0; s < S; ++s) {
      double b = next[s] + y.at(t + 1, ext[s]);
      if (s + 1 < S) b = LogAdd(b, next[s + 1] + y.at(t + 1, ext[s + 1]));
      if (s + 2 < S && ext[s + 2] != kBlank && ext[s + 2] != ext[s])
        b = LogAdd(b, next[s + 2] + y.at(t + 1, ext[s + 2]));
      cur[s] = b;
    }
  }
  return beta;
}

}  // namespace

CtcResult CtcLoss(const LogProbLattice &lattice, const LabelSequence &labels) {
  CheckLabels(lattice, labels);
  const size_t T = lattice.frames();
  if (T < MinFramesForLabels(labels) || T == 0)
    return {std::numeric_limits<double>::infinity(), false};
  const auto ext = Extend(labels);
  const auto alpha = Forward(lattice, ext);
  const size_t S = ext.size();
  double total = alpha[(T - 1) * S + S - 1];
  if (S > 1) total = LogAdd(total, alpha[(T - 1) * S + S - 2]);
  return {-total, true};
}

double BruteForceCtc(const LogProbLattice &lattice, const LabelSequence &labels) {
  CheckLabels(lattice, labels);
  const size_t T = lattice.frames(), K = lattice.classes();
  double count = 1.0;
  for (size_t t = 0; t < T; ++t) count *= static_cast<double>(K);
  if (count > 1e7) throw ArgumentError("BruteForceCtc: instance has more than 1e7 paths");
  std::vector<int> path(T, 0);
  double total = kLogZero;
  const auto n_paths = static_cast<size_t>(count);
  for (size_t code = 0; code < n_paths; ++code) {
    size_t c = code;
    double logp = 0.0;
    for (size_t t = 0; t < T; ++t) {
      path[t] = static_cast<int>(c % K);
      c /= K;
      logp += lattice.at(t, static_cast<size_t>(path[t]));
    }
    if (CollapsePath(path) == labels) total = LogAdd(total, logp);
  }
  return -total;
}

CtcLossGrad CtcForwardBackward(const LogProbLattice &lattice, const LabelSequence &labels) {
  const CtcResult r = CtcLoss(lattice, labels);
  if (!r.feasible)
    throw ArgumentError("ctc: " + std::to_string(lattice.frames()) +
                        " frames cannot align " + std::to_string(labels.size()) +
                        " labels");
  const size_t T = lattice.frames(), K = lattice.classes();
  const auto ext = Extend(labels);
  const size_t S = ext.size();
  const auto alpha = Forward(lattice, ext);
  const auto beta = Backward(lattice, ext);

  CtcLossGrad out;
  out.loss = r.loss;
  out.posteriors = Tensor({T, K});
  out.grad = Tensor({T, K});
  for (size_t t = 0; t < T; ++t) {
    for (size_t s = 0; s < S; ++s) {
      const double g = alpha[t * S + s] + beta[t * S + s];
      if (g == kLogZero) continue;
      out.posteriors.at(t, static_cast<size_t>(ext[s])) += std::exp(g + r.loss);
    }
    for (size_t k = 0; k < K; ++k)
      out.grad.at(t, k) = std::exp(lattice.at(t, k)) - out.posteriors.at(t, k);
  }
  return out;
}

LabelSequence CollapsePath(const std::vector<int> &path) {
  LabelSequence out;
  int prev = -1;
  for (int k : path) {
    if (k != prev && k != kBlank) out.push_back(k);
    prev = k;
  }
  return out;
}

LabelSequence GreedyDecode(const LogProbLattice &lattice) {
  std::vector<int> path(lattice.frames());
  for (size_t t = 0; t < lattice.frames(); ++t) {
    size_t best = 0;
    for (size_t k = 1; k < lattice.classes(); ++k)
      if (lattice.at(t, k) > lattice.at(t, best)) best = k;
    path[t] = static_cast<int>(best);
  }
  return CollapsePath(path);
}

}  // namespace speechreg
