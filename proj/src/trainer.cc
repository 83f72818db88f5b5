// src/trainer.cc

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

#include "speechreg/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "speechreg/common.h"
#include "speechreg/ctc.h"
#include "speechreg/file_util.h"
#include "speechreg/parallel.h"

namespace speechreg {

namespace {

nlohmann::json RangeJson(const Range &r) { return nlohmann::json::array({r.low, r.high}); }

Range RangeFromJson(const nlohmann::json &j) {
  if (!j.is_array() || j.size() != 2) throw ArgumentError("range must be [low, high]");
  return {j[0].get<double>(), j[1].get<double>()};
}

void CheckKeys(const nlohmann::json &j, std::initializer_list<const char *> known,
               const std::string &what) {
  if (!j.is_object()) throw ArgumentError(what + ": expected a JSON object");
  for (const auto &[key, value] : j.items()) {
    bool ok = false;
    for (const char *k : known) ok |= key == k;
    if (!ok) throw ArgumentError(what + ": unknown key '" + key + "'");
  }
}

template <typename T>
void Read(const nlohmann::json &j, const char *key, T &out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void TrainConfig::Validate() const {
  model.Validate();
  if (batch_size < 1) throw ArgumentError("train config: batch_size must be >= 1");
  if (!(lr > 0.0)) throw ArgumentError("train config: lr must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw ArgumentError("train config: momentum must be in [0, 1)");
  if (!(clip_norm > 0.0)) throw ArgumentError("train config: clip_norm must be positive");
  if (!(weight_decay >= 0.0)) throw ArgumentError("train config: weight_decay must be >= 0");
  if (plateau_patience < 1) throw ArgumentError("train config: plateau_patience must be >= 1");
  if (!(plateau_threshold >= 0.0))
    throw ArgumentError("train config: plateau_threshold must be >= 0");
  if (max_epochs < 1) throw ArgumentError("train config: max_epochs must be >= 1");
  if (augment) augmentation.Validate();
  ModelConfig with_dropout = model;
  with_dropout.dropout = dropout;
  with_dropout.Validate();
}

nlohmann::json ToJson(const AugmentationPolicy &p) {
  return {{"tempo", RangeJson(p.tempo)},
          {"pitch_cents", RangeJson(p.pitch_cents)},
          {"gain_db", RangeJson(p.gain_db)},
          {"shift_ms", RangeJson(p.shift_ms)},
          {"snr_db", RangeJson(p.snr_db)},
          {"enable_tempo", p.enable_tempo},
          {"enable_pitch", p.enable_pitch},
          {"enable_gain", p.enable_gain},
          {"enable_shift", p.enable_shift},
          {"enable_noise", p.enable_noise}};
}

AugmentationPolicy AugmentationPolicyFromJson(const nlohmann::json &j) {
  AugmentationPolicy p;
  CheckKeys(j,
            {"tempo", "pitch_cents", "gain_db", "shift_ms", "snr_db", "enable_tempo",
             "enable_pitch", "enable_gain", "enable_shift", "enable_noise"},
            "augmentation");
  try {
    if (j.contains("tempo")) p.tempo = RangeFromJson(j["tempo"]);
    if (j.contains("pitch_cents")) p.pitch_cents = RangeFromJson(j["pitch_cents"]);
    if (j.contains("gain_db")) p.gain_db = RangeFromJson(j["gain_db"]);
    if (j.contains("shift_ms")) p.shift_ms = RangeFromJson(j["shift_ms"]);
    if (j.contains("snr_db")) p.snr_db = RangeFromJson(j["snr_db"]);
    Read(j, "enable_tempo", p.enable_tempo);
    Read(j, "enable_pitch", p.enable_pitch);
    Read(j, "enable_gain", p.enable_gain);
    Read(j, "enable_shift", p.enable_shift);
    Read(j, "enable_noise", p.enable_noise);
  } catch (const nlohmann::json::exception &e) {
    throw ArgumentError(std::string("augmentation: ") + e.what());
  }
  p.Validate();
  return p;
}

nlohmann::json ToJson(const TrainConfig &c) {
  nlohmann::json model = ToJson(c.model);
  model.erase("dropout");
  return {{"model", model},
          {"batch_size", c.batch_size},
          {"lr", c.lr},
          {"momentum", c.momentum},
          {"clip_norm", c.clip_norm},
          {"weight_decay", c.weight_decay},
          {"plateau_patience", c.plateau_patience},
          {"plateau_threshold", c.plateau_threshold},
          {"max_halvings", c.max_halvings},
          {"max_epochs", c.max_epochs},
          {"seed", c.seed},
          {"augment", c.augment},
          {"augment_copies", c.augment_copies},
          {"augmentation", ToJson(c.augmentation)},
          {"dropout",
           {{"data", c.dropout.data},
            {"conv", c.dropout.conv},
            {"recurrent", c.dropout.recurrent},
            {"fc", c.dropout.fc}}}};
}

TrainConfig TrainConfigFromJson(const nlohmann::json &j) {
  TrainConfig c;
  CheckKeys(j,
            {"model", "batch_size", "lr", "momentum", "clip_norm", "weight_decay",
             "plateau_patience", "plateau_threshold", "max_halvings", "max_epochs", "seed",
             "augment", "augment_copies", "augmentation", "dropout"},
            "train config");
  try {
    if (j.contains("model")) {
      if (j["model"].contains("dropout"))
        throw ArgumentError("train config: set dropout at the top level, not under model");
      c.model = ModelConfigFromJson(j["model"]);
    }
    Read(j, "batch_size", c.batch_size);
    Read(j, "lr", c.lr);
    Read(j, "momentum", c.momentum);
    Read(j, "clip_norm", c.clip_norm);
    Read(j, "weight_decay", c.weight_decay);
    Read(j, "plateau_patience", c.plateau_patience);
    Read(j, "plateau_threshold", c.plateau_threshold);
    Read(j, "max_halvings", c.max_halvings);
    Read(j, "max_epochs", c.max_epochs);
    Read(j, "seed", c.seed);
    Read(j, "augment", c.augment);
    Read(j, "augment_copies", c.augment_copies);
    if (j.contains("augmentation")) c.augmentation = AugmentationPolicyFromJson(j["augmentation"]);
    if (j.contains("dropout")) {
      const auto &d = j["dropout"];
      CheckKeys(d, {"data", "conv", "recurrent", "fc"}, "dropout");
      Read(d, "data", c.dropout.data);
      Read(d, "conv", c.dropout.conv);
      Read(d, "recurrent", c.dropout.recurrent);
      Read(d, "fc", c.dropout.fc);
    }
  } catch (const nlohmann::json::exception &e) {
    throw ArgumentError(std::string("train config: ") + e.what());
  }
  c.model.dropout = c.dropout;
  c.Validate();
  return c;
}

StepStats SgdStep(std::vector<Parameter> &params, SgdState &state, const TrainConfig &config,
                  double lr) {
  for (const auto &p : params) {
    if (p.grad.shape() != p.value.shape())
      throw ArgumentError("sgd: gradient shape mismatch for '" + p.name + "'");
    for (double g : p.grad.values())
      if (!std::isfinite(g)) throw Error("sgd: non-finite gradient in '" + p.name + "'");
  }
  if (state.velocity.size() != params.size()) {
    state.velocity.clear();
    for (const auto &p : params) state.velocity.emplace_back(p.value.shape());
  }
  StepStats stats;
  double sq = 0.0;
  for (auto &p : params) {
    auto &g = p.grad.vec();
    const auto &w = p.value.values();
    for (size_t i = 0; i < g.size(); ++i) {
      g[i] += config.weight_decay * w[i];
      sq += g[i] * g[i];
    }
  }
  stats.grad_norm = std::sqrt(sq);
  const double scale = stats.grad_norm > config.clip_norm ? config.clip_norm / stats.grad_norm : 1.0;
  stats.clipped_norm = stats.grad_norm * scale;
  const double mu = config.momentum;
  for (size_t k = 0; k < params.size(); ++k) {
    auto &g = params[k].grad.vec();
    auto &w = params[k].value.vec();
    auto &v = state.velocity[k].vec();
    for (size_t i = 0; i < g.size(); ++i) {
      if (scale != 1.0) g[i] *= scale;
      v[i] = mu * v[i] + g[i];
      w[i] -= lr * (g[i] + mu * v[i]);
    }
  }
  return stats;
}

PlateauScheduler::PlateauScheduler(double lr, size_t patience, double threshold)
    : lr_(lr),
      patience_(patience),
      threshold_(threshold),
      best_(std::numeric_limits<double>::infinity()) {
  if (!(lr > 0.0)) throw ArgumentError("plateau: lr must be positive");
  if (patience < 1) throw ArgumentError("plateau: patience must be >= 1");
}

bool PlateauScheduler::Update(double val_loss) {
  improved_ = val_loss < best_ - threshold_;
  if (improved_) {
    best_ = val_loss;
    bad_epochs_ = 0;
    stale_halvings_ = 0;
    return false;
  }
  if (++bad_epochs_ < patience_) return false;
  lr_ /= 2.0;
  bad_epochs_ = 0;
  ++stale_halvings_;
  return true;
}

std::string TrainLog::ToCsv() const {
  std::string out = "epoch,train_loss,val_loss,lr,seconds\n";
  char line[256];
  for (const auto &e : epochs) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g\n", e.epoch, e.train_loss,
                  e.val_loss, e.lr, e.seconds);
    out += line;
  }
  return out;
}

std::vector<Utterance> LoadUtterances(const std::vector<ManifestEntry> &entries,
                                      const std::filesystem::path &manifest_dir) {
  std::vector<Utterance> out(entries.size());
  ParallelFor(entries.size(), [&](size_t i) {
    out[i].audio = ReadWav(ResolveAudioPath(entries[i], manifest_dir));
    out[i].transcript = entries[i].transcript;
  });
  return out;
}

Spectrogram UtteranceFeatures(const AudioBuffer &audio) {
  return NormalizeUtterance(ComputeSpectrogram(audio));
}

Tensor ExtractFeatures(const AudioBuffer &audio, const FeatureStats &stats) {
  return FeaturesToTensor(NormalizeFeatures(UtteranceFeatures(audio), stats));
}

namespace {

struct Example {
  Tensor features;
  LabelSequence labels;
};

struct BatchLoss {
  double sum = 0.0;
  size_t count = 0;
  size_t skipped = 0;
};

// Forward (and optionally backward) over one batch. Utterances too short for
// the convolutions or for their CTC targets are skipped and counted. The
// loss is the mean over the remaining utterances.
BatchLoss RunBatch(Model &model, const std::vector<const Example *> &batch, bool train,
                   uint64_t seed, bool backward) {
  BatchLoss out;
  std::vector<const Tensor *> inputs;
  std::vector<const LabelSequence *> labels;
  for (const Example *e : batch) {
    if (e->features.dim(0) < model.MinInputFrames()) {
      ++out.skipped;
      continue;
    }
    inputs.push_back(&e->features);
    labels.push_back(&e->labels);
  }
  if (inputs.empty()) return out;
  if (train && inputs.size() == 1 && model.OutputFrames(inputs[0]->dim(0)) < 2) {
    ++out.skipped;  // batch statistics need two positions
    return out;
  }
  const auto logits = model.Forward(inputs, train, seed);
  std::vector<Tensor> dlogits(logits.size());
  std::vector<LogProbLattice> lattices;
  for (size_t n = 0; n < logits.size(); ++n) {
    lattices.push_back(LogSoftmax(logits[n]));
    const CtcResult r = CtcLoss(lattices[n], *labels[n]);
    if (!r.feasible) {
      ++out.skipped;
      continue;
    }
    out.sum += r.loss;
    ++out.count;
  }
  if (!backward || out.count == 0) return out;
  const double scale = 1.0 / static_cast<double>(out.count);
  for (size_t n = 0; n < logits.size(); ++n) {
    if (!CtcLoss(lattices[n], *labels[n]).feasible) {
      dlogits[n] = Tensor(logits[n].shape());
      continue;
    }
    dlogits[n] = CtcGrad(lattices[n], *labels[n]);
    dlogits[n] *= scale;
  }
  model.Backward(dlogits);
  return out;
}

double MeanLoss(Model &model, const std::vector<Example> &examples, size_t batch_size,
                size_t *skipped) {
  double sum = 0.0;
  size_t count = 0;
  for (size_t start = 0; start < examples.size(); start += batch_size) {
    std::vector<const Example *> batch;
    for (size_t i = start; i < std::min(examples.size(), start + batch_size); ++i)
      batch.push_back(&examples[i]);
    const BatchLoss b = RunBatch(model, batch, false, 0, false);
    sum += b.sum;
    count += b.count;
    if (skipped) *skipped += b.skipped;
  }
  return count == 0 ? std::numeric_limits<double>::infinity() : sum / count;
}

Checkpoint MakeCheckpoint(const Model &model, const TrainConfig &config,
                          const FeatureStats &stats, size_t epoch, double val_loss) {
  Checkpoint ckpt = ModelToCheckpoint(model);
  ckpt.metadata["train"] = ToJson(config);
  ckpt.metadata["epoch"] = epoch;
  ckpt.metadata["val_loss"] = val_loss;
  ckpt.metadata["feature_frames"] = stats.count;
  ckpt.tensors.emplace_back("features.mean", Tensor({stats.bins()}, stats.mean));
  ckpt.tensors.emplace_back("features.variance", Tensor({stats.bins()}, stats.variance));
  return ckpt;
}

}  // namespace

FeatureStats StatsFromCheckpoint(const Checkpoint &ckpt) {
  if (!ckpt.Has("features.mean") || !ckpt.Has("features.variance"))
    throw FormatError("checkpoint: no feature statistics");
  FeatureStats stats;
  const auto mean = ckpt.Get("features.mean").values();
  const auto variance = ckpt.Get("features.variance").values();
  stats.mean.assign(mean.begin(), mean.end());
  stats.variance.assign(variance.begin(), variance.end());
  if (stats.mean.size() != stats.variance.size())
    throw FormatError("checkpoint: feature statistics size mismatch");
  stats.count = ckpt.metadata.value("feature_frames", uint64_t{0});
  return stats;
}

TrainResult Train(const TrainConfig &input_config, const std::vector<Utterance> &train,
                  const std::vector<Utterance> &val,
                  const std::optional<std::filesystem::path> &out_dir,
                  const std::function<void(const EpochRecord &)> &on_epoch) {
  TrainConfig config = input_config;
  config.model.dropout = config.dropout;
  config.Validate();
  if (train.empty()) throw ArgumentError("train: empty training set");
  if (val.empty()) throw ArgumentError("train: empty validation set");
  const Alphabet alphabet(config.model.alphabet);

  // Original-audio features and the statistics they define.
  std::vector<Spectrogram> train_specs(train.size());
  ParallelFor(train.size(), [&](size_t i) { train_specs[i] = UtteranceFeatures(train[i].audio); });
  const FeatureStats stats = ComputeStats(train_specs);
  if (stats.bins() != config.model.input_bins)
    throw ArgumentError("train: features have " + std::to_string(stats.bins()) +
                        " bins but the model expects " + std::to_string(config.model.input_bins));

  std::vector<Example> originals(train.size());
  ParallelFor(train.size(), [&](size_t i) {
    originals[i].features = FeaturesToTensor(NormalizeFeatures(train_specs[i], stats));
    originals[i].labels = alphabet.Encode(train[i].transcript);
  });
  train_specs.clear();
  std::vector<Example> val_examples(val.size());
  ParallelFor(val.size(), [&](size_t i) {
    val_examples[i].features = ExtractFeatures(val[i].audio, stats);
    val_examples[i].labels = alphabet.Encode(val[i].transcript);
  });

  // Batches group utterances of similar duration; batch order is shuffled
  // each epoch.
  const size_t copies = 1 + (config.augment ? config.augment_copies : 0);
  std::vector<size_t> by_length(train.size());
  std::iota(by_length.begin(), by_length.end(), 0);
  std::stable_sort(by_length.begin(), by_length.end(), [&](size_t a, size_t b) {
    return train[a].audio.samples.size() < train[b].audio.samples.size();
  });
  std::vector<std::vector<std::pair<size_t, size_t>>> batches;  // (utterance, copy)
  for (size_t c = 0; c < copies; ++c)
    for (size_t start = 0; start < by_length.size(); start += config.batch_size) {
      std::vector<std::pair<size_t, size_t>> batch;
      for (size_t k = start; k < std::min(by_length.size(), start + config.batch_size); ++k)
        batch.emplace_back(by_length[k], c);
      batches.push_back(std::move(batch));
    }

  Model model(config.model);
  model.Init(DeriveSeed(config.seed, "init"));
  SgdState sgd;
  PlateauScheduler schedule(config.lr, config.plateau_patience, config.plateau_threshold);
  TrainResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    WriteFileAtomic(*out_dir / "config.json", ToJson(config).dump(2) + "\n");
  }

  for (size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = schedule.lr();
    std::vector<size_t> order(batches.size());
    std::iota(order.begin(), order.end(), 0);
    Rng order_rng(DeriveSeed(config.seed, "batch-order", epoch));
    Shuffle(order, order_rng);

    double loss_sum = 0.0;
    size_t loss_count = 0, skipped = 0;
    for (size_t step = 0; step < order.size(); ++step) {
      const auto &items = batches[order[step]];
      std::vector<Example> fresh(items.size());
      std::vector<const Example *> batch(items.size());
      ParallelFor(items.size(), [&](size_t k) {
        const auto [utt, copy] = items[k];
        if (copy == 0) {
          batch[k] = &originals[utt];
          return;
        }
        Rng rng(DeriveSeed(config.seed, "augment", epoch, utt * copies + copy));
        const AugmentationSpec spec = SampleSpec(config.augmentation, rng);
        fresh[k].features = ExtractFeatures(ApplyAugmentation(train[utt].audio, spec), stats);
        fresh[k].labels = originals[utt].labels;
        batch[k] = &fresh[k];
      });
      model.ZeroGrad();
      const BatchLoss b =
          RunBatch(model, batch, true, DeriveSeed(config.seed, "dropout", epoch, step), true);
      skipped += b.skipped;
      if (b.count == 0) continue;
      loss_sum += b.sum;
      loss_count += b.count;
      SgdStep(model.params(), sgd, config, lr);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_count ? loss_sum / loss_count : std::numeric_limits<double>::infinity();
    rec.val_loss = MeanLoss(model, val_examples, config.batch_size, nullptr);
    rec.lr = lr;
    rec.skipped = skipped;
    schedule.Update(rec.val_loss);
    if (schedule.improved()) {
      result.best_epoch = epoch;
      result.best_val_loss = rec.val_loss;
      result.best = MakeCheckpoint(model, config, stats, epoch, rec.val_loss);
      if (out_dir) SaveCheckpoint(result.best, *out_dir / "best.ckpt");
    }
    rec.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.epochs.push_back(rec);
    if (out_dir) WriteFileAtomic(*out_dir / "train_log.csv", result.log.ToCsv());
    if (on_epoch) on_epoch(rec);
    if (schedule.halvings_without_improvement() >= config.max_halvings) break;
  }
  if (result.best_epoch == 0) {
    // Validation never produced a finite loss; keep the final parameters.
    result.best_epoch = result.log.epochs.back().epoch;
    result.best = MakeCheckpoint(model, config, stats, result.best_epoch,
                                 result.log.epochs.back().val_loss);
    if (out_dir) SaveCheckpoint(result.best, *out_dir / "best.ckpt");
  }
  return result;
}

std::vector<std::string> SplitWords(const std::string &text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n') {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

EvalResult Evaluate(Model &model, const FeatureStats &stats,
                    const std::vector<Utterance> &utterances, const DecodeConfig &decode) {
  decode.Validate();
  const Alphabet alphabet(model.config().alphabet);
  EvalResult out;
  out.hypotheses.resize(utterances.size());
  std::vector<LogProbLattice> lattices(utterances.size());
  std::vector<uint8_t> scored(utterances.size(), 0);
  for (size_t i = 0; i < utterances.size(); ++i) {
    if (SplitWords(utterances[i].transcript).empty()) continue;
    const Tensor x = ExtractFeatures(utterances[i].audio, stats);
    if (x.dim(0) < model.MinInputFrames()) continue;
    lattices[i] = LogSoftmax(model.Forward({&x}, false)[0]);
    scored[i] = 1;
  }
  ParallelFor(utterances.size(), [&](size_t i) {
    if (!scored[i]) return;
    const auto hyps = BeamSearch(lattices[i], decode);
    out.hypotheses[i] = hyps.empty() ? "" : alphabet.Decode(hyps.front().labels);
  });
  size_t char_edits = 0, chars = 0, word_edits = 0, words = 0;
  for (size_t i = 0; i < utterances.size(); ++i) {
    if (!scored[i]) {
      ++out.skipped;
      continue;
    }
    const std::string &ref = utterances[i].transcript;
    const std::string &hyp = out.hypotheses[i];
    char_edits += EditDistance(ref, hyp);
    chars += ref.size();
    const auto rw = SplitWords(ref), hw = SplitWords(hyp);
    word_edits += EditDistance(rw, hw);
    words += rw.size();
    ++out.utterances;
  }
  if (chars > 0) out.cer = static_cast<double>(char_edits) / chars;
  if (words > 0) out.wer = static_cast<double>(word_edits) / words;
  return out;
}

void ToyCorpusConfig::Validate() const {
  if (alphabet_size < 1 || alphabet_size > 8)
    throw ArgumentError("toy corpus: alphabet_size must be in [1, 8]");
  if (min_length < 1 || max_length < min_length)
    throw ArgumentError("toy corpus: need 1 <= min_length <= max_length");
  if (num_train < 1) throw ArgumentError("toy corpus: num_train must be >= 1");
  if (!(tone_ms > 0.0) || !(gap_ms >= 0.0))
    throw ArgumentError("toy corpus: tone_ms must be positive and gap_ms non-negative");
  if (sample_rate < 16000) throw ArgumentError("toy corpus: sample_rate must be >= 16000");
  if (!(tempo.low > 0.0) || tempo.high < tempo.low)
    throw ArgumentError("toy corpus: bad tempo range");
  size_t possible = 0;
  double count = 1.0;
  for (size_t n = 1; n <= max_length; ++n) {
    count *= static_cast<double>(alphabet_size);
    if (n >= min_length) possible += count > 1e12 ? static_cast<size_t>(1e12) : static_cast<size_t>(count);
  }
  if (possible < num_train + num_val + 1)
    throw ArgumentError("toy corpus: too few distinct strings for disjoint splits");
}

double ToyToneFrequency(size_t k, size_t alphabet_size) {
  if (k >= alphabet_size) throw ArgumentError("toy corpus: symbol index out of range");
  const double spacing =
      alphabet_size < 2
          ? 0.0
          : std::min(1500.0, 1200.0 * std::log2(5000.0 / 150.0) / (alphabet_size - 1.0));
  return 150.0 * std::exp2(static_cast<double>(k) * spacing / 1200.0);
}

std::string ToyAlphabet(size_t alphabet_size) {
  if (alphabet_size < 1 || alphabet_size > 8)
    throw ArgumentError("toy corpus: alphabet_size must be in [1, 8]");
  return std::string("abcdefgh").substr(0, alphabet_size);
}

AudioBuffer SynthesizeToyUtterance(const std::string &text, const ToyCorpusConfig &config,
                                   Rng &rng) {
  const std::string alphabet = ToyAlphabet(config.alphabet_size);
  const double offset = rng.Uniform(config.pitch_offset_cents.low, config.pitch_offset_cents.high);
  const double tempo = rng.Uniform(config.tempo.low, config.tempo.high);
  const double gain = std::pow(10.0, rng.Uniform(config.gain_db.low, config.gain_db.high) / 20.0);
  const double snr = rng.Uniform(config.snr_db.low, config.snr_db.high);
  const double rate = config.sample_rate;
  const auto tone_len = static_cast<size_t>(std::lround(config.tone_ms / tempo * rate / 1000.0));
  const auto gap_len = static_cast<size_t>(std::lround(config.gap_ms / tempo * rate / 1000.0));
  const size_t ramp = std::min<size_t>(tone_len / 2, static_cast<size_t>(rate * 0.005));

  AudioBuffer out;
  out.sample_rate = config.sample_rate;
  out.samples.assign(gap_len, 0.0);
  for (char c : text) {
    const size_t k = alphabet.find(c);
    if (k == std::string::npos)
      throw ArgumentError(std::string("toy corpus: character '") + c + "' is not in the alphabet");
    const double jitter = rng.Uniform(-config.tone_jitter_cents, config.tone_jitter_cents);
    const double f = ToyToneFrequency(k, config.alphabet_size) *
                     std::exp2((offset + jitter) / 1200.0);
    const double phase = rng.Uniform(0.0, 2.0 * std::numbers::pi);
    for (size_t n = 0; n < tone_len; ++n) {
      double env = 1.0;
      if (n < ramp) env = static_cast<double>(n) / ramp;
      if (tone_len - 1 - n < ramp) env = static_cast<double>(tone_len - 1 - n) / ramp;
      out.samples.push_back(0.3 * gain * env *
                            std::sin(2.0 * std::numbers::pi * f * n / rate + phase));
    }
    out.samples.insert(out.samples.end(), gap_len, 0.0);
  }
  return AddWhiteNoise(out, snr, rng);
}

ToyCorpus GenerateToyCorpus(const ToyCorpusConfig &config, uint64_t seed,
                            const std::optional<std::filesystem::path> &out_dir) {
  config.Validate();
  ToyCorpus corpus;
  corpus.alphabet = ToyAlphabet(config.alphabet_size);
  Rng text_rng(DeriveSeed(seed, "toy-text"));
  auto random_string = [&] {
    const size_t len =
        config.min_length + text_rng.UniformInt(config.max_length - config.min_length + 1);
    std::string s;
    for (size_t i = 0; i < len; ++i) s.push_back(corpus.alphabet[text_rng.UniformInt(config.alphabet_size)]);
    return s;
  };
  std::vector<std::string> train_text, val_text;
  std::set<std::string> train_set;
  for (size_t i = 0; i < config.num_train; ++i) {
    train_text.push_back(random_string());
    train_set.insert(train_text.back());
  }
  while (val_text.size() < config.num_val) {
    std::string s = random_string();
    if (!train_set.count(s)) val_text.push_back(std::move(s));
  }

  auto synthesize = [&](const std::vector<std::string> &texts, const std::string &split,
                        std::vector<ManifestEntry> &entries, std::vector<Utterance> &audio) {
    audio.resize(texts.size());
    entries.resize(texts.size());
    ParallelFor(texts.size(), [&](size_t i) {
      Rng rng(DeriveSeed(seed, "toy-" + split, i));
      audio[i].audio = SynthesizeToyUtterance(texts[i], config, rng);
      audio[i].transcript = texts[i];
      char name[64];
      std::snprintf(name, sizeof name, "wav/%s_%04zu.wav", split.c_str(), i);
      entries[i] = {name, texts[i], audio[i].audio.duration_seconds()};
    });
  };
  synthesize(train_text, "train", corpus.train, corpus.train_audio);
  synthesize(val_text, "val", corpus.val, corpus.val_audio);

  if (out_dir) {
    std::filesystem::create_directories(*out_dir / "wav");
    auto write = [&](const std::vector<ManifestEntry> &entries,
                     const std::vector<Utterance> &audio, const char *manifest) {
      ParallelFor(entries.size(), [&](size_t i) {
        WriteWav(audio[i].audio, *out_dir / entries[i].audio_path);
      });
      WriteManifest(entries, *out_dir / manifest);
    };
    write(corpus.train, corpus.train_audio, "train.jsonl");
    write(corpus.val, corpus.val_audio, "val.jsonl");
  }
  return corpus;
}

}  // namespace speechreg
