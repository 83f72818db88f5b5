// speechreg/lm.h

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

// Backoff n-gram language model over string symbols, in log10. Trained models
// use interpolated Witten-Bell estimates written in backoff form, so they
// serialize losslessly to ARPA.

#ifndef SPEECHREG_LM_H_
#define SPEECHREG_LM_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace speechreg {

inline constexpr std::string_view kSentenceStart = "<s>";
inline constexpr std::string_view kSentenceEnd = "</s>";
inline constexpr std::string_view kSpaceToken = "<space>";
inline constexpr double kDefaultOovLog10 = -7.0;
/// Conventional ARPA log10 probability of <s>, which is never predicted.
inline constexpr double kStartLog10 = -99.0;

class NGramModel {
 public:
  /// Empty model of the given order (>= 1).
  explicit NGramModel(int order = 1);

  int order() const { return order_; }
  const std::vector<std::string> &vocabulary() const { return vocab_; }
  /// Symbol id, or -1 when not in the vocabulary.
  int Index(std::string_view symbol) const;
  size_t NumNGrams(int n) const { return tables_.at(static_cast<size_t>(n - 1)).size(); }

  double oov_log10() const { return oov_log10_; }
  void set_oov_log10(double v) { oov_log10_ = v; }

  /// log10 p(symbol | context). Only the last order-1 context symbols are
  /// used; an out-of-vocabulary symbol scores oov_log10().
  double Score(std::span<const std::string> context, std::string_view symbol) const;
  /// Same with symbol ids; a negative context id never matches.
  double ScoreIds(std::span<const int> context, int symbol) const;

  /// Inserts or replaces an n-gram entry. Adds unseen symbols to the vocabulary.
  void Set(const std::vector<std::string> &ngram, double log10_prob, double log10_bow = 0.0);
  /// Updates the backoff weight of an existing entry.
  void SetBackoff(const std::vector<std::string> &ngram, double log10_bow);
  bool Contains(const std::vector<std::string> &ngram) const;
  /// Drops an entry; returns false if it was absent.
  bool Remove(const std::vector<std::string> &ngram);

  /// ARPA text: tab-separated fields, entries sorted by symbol strings,
  /// values with 17 significant digits.
  std::string ToArpa() const;
  /// Throws ParseError with the offending line number.
  static NGramModel FromArpa(std::string_view text);

 private:
  struct Entry {
    double log10_prob = 0.0;
    double log10_bow = 0.0;
  };
  struct IdsHash {
    size_t operator()(const std::vector<int> &v) const;
  };
  using Table = std::unordered_map<std::vector<int>, Entry, IdsHash>;

  int Intern(std::string_view symbol);
  std::vector<int> ToIds(const std::vector<std::string> &ngram, bool intern);
  const Entry *Find(std::span<const int> ngram) const;

  int order_;
  double oov_log10_ = kDefaultOovLog10;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> index_;
  std::vector<Table> tables_;  // tables_[k] holds (k+1)-grams
};

/// Character tokens of one transcript line; ' ' becomes kSpaceToken.
std::vector<std::string> CharTokens(std::string_view line);

/// Witten-Bell model from tokenized sentences. Each sentence is padded with
/// <s> and </s>. Throws ArgumentError if there are no sentences.
NGramModel TrainNGram(const std::vector<std::vector<std::string>> &sentences, int order);

/// Character-level model from text lines; blank lines are ignored.
NGramModel TrainCharNGram(const std::vector<std::string> &lines, int order);

NGramModel ReadArpa(const std::string &path);
void WriteArpa(const NGramModel &model, const std::string &path);

}  // namespace speechreg

#endif  // SPEECHREG_LM_H_
