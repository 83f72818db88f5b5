// speechreg/trainer.h

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

// Mini-batch SGD with Nesterov momentum, global-norm clipping, weight decay
// and plateau halving of the learning rate; the synthetic tone corpus; and
// CER/WER evaluation.

#ifndef SPEECHREG_TRAINER_H_
#define SPEECHREG_TRAINER_H_

#include <filesystem>
#include <functional>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "speechreg/augment.h"
#include "speechreg/decode.h"
#include "speechreg/features.h"
#include "speechreg/manifest.h"
#include "speechreg/model.h"

namespace speechreg {

struct TrainConfig {
  ModelConfig model;  // model.dropout is taken from `dropout` below
  size_t batch_size = 16;
  double lr = 0.1;
  double momentum = 0.95;
  double clip_norm = 1.0;
  double weight_decay = 1e-5;
  size_t plateau_patience = 2;
  double plateau_threshold = 1e-4;
  size_t max_halvings = 5;  // consecutive halvings without improvement
  size_t max_epochs = 100;
  uint64_t seed = 0;
  bool augment = true;
  size_t augment_copies = 1;  // fresh augmented copies per utterance per epoch
  AugmentationPolicy augmentation;
  DropoutConfig dropout;

  /// Throws ArgumentError naming the offending field.
  void Validate() const;
  bool operator==(const TrainConfig &) const = default;
};

nlohmann::json ToJson(const AugmentationPolicy &policy);
AugmentationPolicy AugmentationPolicyFromJson(const nlohmann::json &j);
nlohmann::json ToJson(const TrainConfig &config);
/// Missing keys keep their defaults; unknown keys raise ArgumentError.
TrainConfig TrainConfigFromJson(const nlohmann::json &j);

struct SgdState {
  std::vector<Tensor> velocity;  // one per parameter, lazily zero-filled
};

struct StepStats {
  double grad_norm = 0.0;     // after weight decay, before clipping
  double clipped_norm = 0.0;  // after clipping
};

/// g += weight_decay * w; scale all g by clip_norm / |g| when the global
/// norm exceeds clip_norm; v = momentum * v + g; w -= lr * (g + momentum * v).
/// Gradients are left holding the clipped values. Throws Error naming the
/// parameter when a gradient is not finite; nothing is updated then.
StepStats SgdStep(std::vector<Parameter> &params, SgdState &state, const TrainConfig &config,
                  double lr);

/// Halves the rate after `patience` consecutive epochs whose validation
/// loss fails to beat the best so far by more than `threshold`.
class PlateauScheduler {
 public:
  PlateauScheduler(double lr, size_t patience, double threshold);

  /// Records one epoch; returns true when the rate was halved.
  bool Update(double val_loss);
  double lr() const { return lr_; }
  double best() const { return best_; }
  bool improved() const { return improved_; }
  /// Halvings since the best validation loss last improved.
  size_t halvings_without_improvement() const { return stale_halvings_; }

 private:
  double lr_;
  size_t patience_;
  double threshold_;
  double best_;
  size_t bad_epochs_ = 0;
  size_t stale_halvings_ = 0;
  bool improved_ = false;
};

struct EpochRecord {
  size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;  // rate used during the epoch
  double seconds = 0.0;
  size_t skipped = 0;  // infeasible training utterances
  bool operator==(const EpochRecord &) const = default;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  /// Header "epoch,train_loss,val_loss,lr,seconds"; reals as %.17g.
  std::string ToCsv() const;
};

/// Loaded audio and transcript of one manifest entry.
struct Utterance {
  AudioBuffer audio;
  std::string transcript;
};

std::vector<Utterance> LoadUtterances(const std::vector<ManifestEntry> &entries,
                                      const std::filesystem::path &manifest_dir);

/// Log spectrogram normalized per utterance; dataset statistics are taken
/// over these.
Spectrogram UtteranceFeatures(const AudioBuffer &audio);

/// UtteranceFeatures normalized by `stats`, as a [frames, bins] tensor.
Tensor ExtractFeatures(const AudioBuffer &audio, const FeatureStats &stats);

struct TrainResult {
  TrainLog log;
  size_t best_epoch = 0;
  double best_val_loss = 0.0;
  Checkpoint best;  // parameters at best_epoch plus stats and configs
};

/// Feature statistics come from the unaugmented training audio. When
/// `out_dir` is set, best.ckpt, train_log.csv and config.json are written
/// there (atomically) after every epoch. `on_epoch` sees each record as it
/// is logged.
TrainResult Train(const TrainConfig &config, const std::vector<Utterance> &train,
                  const std::vector<Utterance> &val,
                  const std::optional<std::filesystem::path> &out_dir = std::nullopt,
                  const std::function<void(const EpochRecord &)> &on_epoch = nullptr);

/// Stats stored by Train under "features.mean" / "features.variance".
FeatureStats StatsFromCheckpoint(const Checkpoint &ckpt);

/// Levenshtein distance with unit costs.
template <typename Seq>
size_t EditDistance(const Seq &a, const Seq &b) {
  std::vector<size_t> row(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    size_t diag = row[0];
    row[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      const size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::vector<std::string> SplitWords(const std::string &text);

struct EvalResult {
  double cer = 0.0;  // total character edits / total reference characters
  double wer = 0.0;  // total word edits / total reference words
  size_t utterances = 0;  // scored
  size_t skipped = 0;     // empty reference or too short for the model
  std::vector<std::string> hypotheses;  // per input entry; empty if skipped
};

/// Decodes every utterance (eval mode) and scores it against its transcript.
EvalResult Evaluate(Model &model, const FeatureStats &stats,
                    const std::vector<Utterance> &utterances, const DecodeConfig &decode);

struct ToyCorpusConfig {
  size_t num_train = 500;
  size_t num_val = 100;
  size_t alphabet_size = 5;
  size_t min_length = 3;
  size_t max_length = 8;
  double tone_ms = 120.0;
  double gap_ms = 40.0;
  int sample_rate = 16000;
  // Per-utterance nuisance variation.
  Range pitch_offset_cents{-400.0, 400.0};
  Range tempo{0.8, 1.25};
  Range gain_db{-10.0, 5.0};
  Range snr_db{-15.0, 5.0};
  double tone_jitter_cents = 100.0;  // per tone, uniform +-
  void Validate() const;
};

/// Tone frequency of symbol k: 150 Hz * 2^(k * s / 1200) with spacing
/// s = min(1500, 1200 * log2(5000 / 150) / (n - 1)) cents.
double ToyToneFrequency(size_t k, size_t alphabet_size);

/// The first `alphabet_size` letters of "abcdefgh".
std::string ToyAlphabet(size_t alphabet_size);

AudioBuffer SynthesizeToyUtterance(const std::string &text, const ToyCorpusConfig &config,
                                   Rng &rng);

struct ToyCorpus {
  std::string alphabet;
  std::vector<ManifestEntry> train;
  std::vector<ManifestEntry> val;
  std::vector<Utterance> train_audio;
  std::vector<Utterance> val_audio;
};

/// Validation strings never occur in the training split. With `out_dir`,
/// writes wav/{train,val}_NNNN.wav plus train.jsonl and val.jsonl with
/// paths relative to `out_dir`.
ToyCorpus GenerateToyCorpus(const ToyCorpusConfig &config, uint64_t seed,
                            const std::optional<std::filesystem::path> &out_dir = std::nullopt);

}  // namespace speechreg

#endif  // SPEECHREG_TRAINER_H_
