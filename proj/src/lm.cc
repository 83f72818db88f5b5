// src/lm.cc

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

#include "speechreg/lm.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

#include "speechreg/common.h"
#include "speechreg/file_util.h"

namespace speechreg {

size_t NGramModel::IdsHash::operator()(const std::vector<int> &v) const {
  uint64_t h = 1469598103934665603ull;
  for (int x : v) {
    h ^= static_cast<uint32_t>(x);
    h *= 1099511628211ull;
  }
  return static_cast<size_t>(h);
}

NGramModel::NGramModel(int order) : order_(order) {
  if (order < 1) throw ArgumentError("n-gram order must be at least 1");
  tables_.resize(static_cast<size_t>(order));
}

int NGramModel::Index(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  return it == index_.end() ? -1 : it->second;
}

int NGramModel::Intern(std::string_view symbol) {
  auto [it, inserted] = index_.emplace(std::string(symbol), static_cast<int>(vocab_.size()));
  if (inserted) vocab_.emplace_back(symbol);
  return it->second;
}

std::vector<int> NGramModel::ToIds(const std::vector<std::string> &ngram, bool intern) {
  std::vector<int> ids;
  ids.reserve(ngram.size());
  for (const auto &s : ngram) ids.push_back(intern ? Intern(s) : Index(s));
  return ids;
}

const NGramModel::Entry *NGramModel::Find(std::span<const int> ngram) const {
  if (ngram.empty() || ngram.size() > tables_.size()) return nullptr;
  const auto &table = tables_[ngram.size() - 1];
  auto it = table.find(std::vector<int>(ngram.begin(), ngram.end()));
  return it == table.end() ? nullptr : &it->second;
}

double NGramModel::ScoreIds(std::span<const int> context, int symbol) const {
  if (symbol < 0 || symbol >= static_cast<int>(vocab_.size())) return oov_log10_;
  const size_t max_ctx = static_cast<size_t>(order_ - 1);
  if (context.size() > max_ctx) context = context.subspan(context.size() - max_ctx);
  // Walk from the longest context down, accumulating backoff weights of the
  // contexts that fail to predict `symbol`.
  std::vector<int> key(context.begin(), context.end());
  key.push_back(symbol);
  double backoff = 0.0;
  for (size_t skip = 0; skip <= context.size(); ++skip) {
    std::span<const int> ngram(key.data() + skip, key.size() - skip);
    if (const Entry *e = Find(ngram)) return backoff + e->log10_prob;
    if (const Entry *ctx = Find(ngram.first(ngram.size() - 1))) backoff += ctx->log10_bow;
  }
  return oov_log10_;
}

double NGramModel::Score(std::span<const std::string> context, std::string_view symbol) const {
  std::vector<int> ids;
  ids.reserve(context.size());
  for (const auto &s : context) ids.push_back(Index(s));
  return ScoreIds(ids, Index(symbol));
}

void NGramModel::Set(const std::vector<std::string> &ngram, double log10_prob,
                     double log10_bow) {
  if (ngram.empty() || ngram.size() > tables_.size())
    throw ArgumentError("n-gram of length " + std::to_string(ngram.size()) +
                        " does not fit a model of order " + std::to_string(order_));
  tables_[ngram.size() - 1][ToIds(ngram, true)] = Entry{log10_prob, log10_bow};
}

void NGramModel::SetBackoff(const std::vector<std::string> &ngram, double log10_bow) {
  if (ngram.empty() || ngram.size() > tables_.size()) throw ArgumentError("no such n-gram");
  auto it = tables_[ngram.size() - 1].find(ToIds(ngram, false));
  if (it == tables_[ngram.size() - 1].end()) throw ArgumentError("no such n-gram");
  it->second.log10_bow = log10_bow;
}

bool NGramModel::Contains(const std::vector<std::string> &ngram) const {
  std::vector<int> ids;
  for (const auto &s : ngram) ids.push_back(Index(s));
  return Find(ids) != nullptr;
}

bool NGramModel::Remove(const std::vector<std::string> &ngram) {
  if (ngram.empty() || ngram.size() > tables_.size()) return false;
  return tables_[ngram.size() - 1].erase(ToIds(ngram, false)) > 0;
}

namespace {

std::string FormatReal(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool ParseReal(std::string_view s, double &out) {
  std::string tmp(s);
  char *end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size() && !tmp.empty();
}

[[noreturn]] void Fail(size_t line, const std::string &msg) {
  throw ParseError("arpa line " + std::to_string(line) + ": " + msg);
}

}  // namespace

std::string NGramModel::ToArpa() const {
  std::ostringstream out;
  out << "\\data\\\n";
  for (int n = 1; n <= order_; ++n) out << "ngram " << n << "=" << NumNGrams(n) << "\n";
  for (int n = 1; n <= order_; ++n) {
    out << "\n\\" << n << "-grams:\n";
    std::vector<std::pair<std::vector<std::string>, Entry>> rows;
    rows.reserve(NumNGrams(n));
    for (const auto &[ids, e] : tables_[static_cast<size_t>(n - 1)]) {
      std::vector<std::string> words;
      for (int id : ids) words.push_back(vocab_[static_cast<size_t>(id)]);
      rows.emplace_back(std::move(words), e);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto &a, const auto &b) { return a.first < b.first; });
    for (const auto &[words, e] : rows) {
      out << FormatReal(e.log10_prob);
      for (const auto &w : words) out << '\t' << w;
      if (n < order_ && e.log10_bow != 0.0) out << '\t' << FormatReal(e.log10_bow);
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
  return out.str();
}

NGramModel NGramModel::FromArpa(std::string_view text) {
  std::vector<std::string_view> lines;
  for (size_t pos = 0; pos <= text.size();) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  auto trimmed = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  };

  size_t i = 0;
  while (i < lines.size() && trimmed(lines[i]).empty()) ++i;
  if (i == lines.size() || trimmed(lines[i]) != "\\data\\") Fail(i + 1, "expected \\data\\");
  ++i;
  std::vector<size_t> declared;
  for (; i < lines.size(); ++i) {
    const auto line = trimmed(lines[i]);
    if (line.empty()) continue;
    if (!line.starts_with("ngram ")) break;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) Fail(i + 1, "malformed count line");
    double n = 0, count = 0;
    if (!ParseReal(trimmed(line.substr(6, eq - 6)), n) ||
        !ParseReal(trimmed(line.substr(eq + 1)), count) || n < 1 || count < 0)
      Fail(i + 1, "malformed count line");
    if (static_cast<size_t>(n) != declared.size() + 1)
      Fail(i + 1, "n-gram orders must be declared in sequence");
    declared.push_back(static_cast<size_t>(count));
  }
  if (declared.empty()) Fail(i + 1, "no ngram counts declared");

  NGramModel model(static_cast<int>(declared.size()));
  std::vector<size_t> seen(declared.size(), 0);
  size_t current = 0;  // order of the section being read, 0 = none
  for (; i < lines.size(); ++i) {
    const auto line = trimmed(lines[i]);
    if (line.empty()) continue;
    if (line == "\\end\\") {
      for (size_t n = 0; n < declared.size(); ++n)
        if (seen[n] != declared[n])
          Fail(i + 1, std::to_string(n + 1) + "-grams: declared " +
                          std::to_string(declared[n]) + ", found " + std::to_string(seen[n]));
      return model;
    }
    if (line.front() == '\\') {
      size_t n = 0;
      if (std::sscanf(std::string(line).c_str(), "\\%zu-grams:", &n) != 1 || n < 1 ||
          n > declared.size())
        Fail(i + 1, "unknown section '" + std::string(line) + "'");
      current = n;
      continue;
    }
    if (current == 0) Fail(i + 1, "entry outside an n-gram section");
    const auto fields = SplitFields(line);
    if (fields.size() != current + 1 && fields.size() != current + 2)
      Fail(i + 1, "expected " + std::to_string(current + 1) + " or " +
                      std::to_string(current + 2) + " fields");
    double logp = 0.0, bow = 0.0;
    if (!ParseReal(fields[0], logp)) Fail(i + 1, "bad log probability");
    if (logp > 0.0) Fail(i + 1, "positive log probability");
    if (fields.size() == current + 2 && !ParseReal(fields.back(), bow))
      Fail(i + 1, "bad backoff weight");
    std::vector<std::string> words;
    for (size_t k = 1; k <= current; ++k) words.emplace_back(fields[k]);
    model.Set(words, logp, bow);
    ++seen[current - 1];
  }
  Fail(lines.size(), "missing \\end\\");
}

std::vector<std::string> CharTokens(std::string_view line) {
  std::vector<std::string> out;
  out.reserve(line.size());
  for (char c : line) out.push_back(c == ' ' ? std::string(kSpaceToken) : std::string(1, c));
  return out;
}

NGramModel TrainNGram(const std::vector<std::vector<std::string>> &sentences, int order) {
  if (sentences.empty()) throw ArgumentError("lm: empty training corpus");
  NGramModel model(order);
  const std::string bos(kSentenceStart), eos(kSentenceEnd);

  // counts[k][ngram] for ngram length k + 1. Ordered maps keep training
  // deterministic regardless of hashing.
  using Counts = std::map<std::vector<std::string>, double>;
  std::vector<Counts> counts(static_cast<size_t>(order));
  for (const auto &s : sentences) {
    std::vector<std::string> padded;
    padded.reserve(s.size() + 2);
    padded.push_back(bos);
    padded.insert(padded.end(), s.begin(), s.end());
    padded.push_back(eos);
    for (size_t end = 1; end < padded.size(); ++end)
      for (size_t len = 1; len <= static_cast<size_t>(order) && len <= end + 1; ++len) {
        if (len == 1 && padded[end] == bos) continue;
        std::vector<std::string> g(padded.begin() + static_cast<long>(end + 1 - len),
                                   padded.begin() + static_cast<long>(end + 1));
        counts[len - 1][g] += 1.0;
      }
  }

  // Unigrams: interpolate with the uniform distribution over predictable
  // symbols (everything except <s>).
  const auto &uni = counts[0];
  double total = 0.0;
  for (const auto &[g, c] : uni) total += c;
  const double types = static_cast<double>(uni.size());
  const double uniform = 1.0 / types;
  for (const auto &[g, c] : uni)
    model.Set(g, std::log10((c + types * uniform) / (total + types)));
  model.Set({bos}, kStartLog10);

  for (size_t k = 1; k < counts.size(); ++k) {
    // Context totals and distinct continuations.
    std::map<std::vector<std::string>, std::pair<double, double>> ctx;
    for (const auto &[g, c] : counts[k]) {
      auto &[sum, distinct] = ctx[std::vector<std::string>(g.begin(), g.end() - 1)];
      sum += c;
      distinct += 1.0;
    }
    for (const auto &[g, c] : counts[k]) {
      const std::vector<std::string> h(g.begin(), g.end() - 1);
      const auto [sum, distinct] = ctx.at(h);
      const double lower =
          std::pow(10.0, model.Score(std::span(h).subspan(1), g.back()));
      model.Set(g, std::log10((c + distinct * lower) / (sum + distinct)));
    }
    // Backoff weight of each context = mass reserved for unseen symbols.
    for (const auto &[h, sd] : ctx) {
      const auto [sum, distinct] = sd;
      model.SetBackoff(h, std::log10(distinct / (sum + distinct)));
    }
  }
  return model;
}

NGramModel TrainCharNGram(const std::vector<std::string> &lines, int order) {
  std::vector<std::vector<std::string>> sentences;
  for (const auto &line : lines) {
    std::string_view s = line;
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
    if (s.empty()) continue;
    sentences.push_back(CharTokens(s));
  }
  return TrainNGram(sentences, order);
}

NGramModel ReadArpa(const std::string &path) {
  return NGramModel::FromArpa(ReadFileText(path));
}

void WriteArpa(const NGramModel &model, const std::string &path) {
  WriteFileAtomic(path, model.ToArpa());
}

}  // namespace speechreg
