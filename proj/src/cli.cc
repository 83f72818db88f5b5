// src/cli.cc

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

#include "speechreg/cli.h"

#include <CLI11.hpp>
#include <cstdio>
#include <json.hpp>
#include <ostream>

#include "speechreg/augment.h"
#include "speechreg/decode.h"
#include "speechreg/features.h"
#include "speechreg/file_util.h"
#include "speechreg/lm.h"
#include "speechreg/manifest.h"
#include "speechreg/parallel.h"
#include "speechreg/trainer.h"

namespace speechreg {

namespace fs = std::filesystem;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

std::string IndexedName(const char *prefix, size_t i, const char *suffix) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s%06zu%s", prefix, i, suffix);
  return buf;
}

Range ToRange(const std::vector<double> &v, const char *flag) {
  if (v.size() != 2) throw UsageError(std::string(flag) + " expects low,high");
  return {v[0], v[1]};
}

nlohmann::ordered_json SpecJson(const AugmentationSpec &s) {
  nlohmann::ordered_json j;
  j["tempo_factor"] = s.tempo_factor;
  j["pitch_cents"] = s.pitch_cents;
  j["gain_db"] = s.gain_db;
  j["shift_ms"] = s.shift_ms;
  j["snr_db"] = s.snr_db ? nlohmann::ordered_json(*s.snr_db) : nlohmann::ordered_json(nullptr);
  j["seed"] = s.seed;
  return j;
}

struct AugmentArgs {
  std::string manifest, out_dir;
  uint64_t seed = 0;
  size_t copies = 1;
  bool no_tempo = false, no_pitch = false, no_gain = false, no_shift = false, no_noise = false;
  std::vector<double> tempo, pitch, gain, shift, snr;
};

int RunAugment(const AugmentArgs &a, std::ostream &out) {
  AugmentationPolicy policy;
  policy.enable_tempo = !a.no_tempo;
  policy.enable_pitch = !a.no_pitch;
  policy.enable_gain = !a.no_gain;
  policy.enable_shift = !a.no_shift;
  policy.enable_noise = !a.no_noise;
  if (!a.tempo.empty()) policy.tempo = ToRange(a.tempo, "--tempo-range");
  if (!a.pitch.empty()) policy.pitch_cents = ToRange(a.pitch, "--pitch-range");
  if (!a.gain.empty()) policy.gain_db = ToRange(a.gain, "--gain-range");
  if (!a.shift.empty()) policy.shift_ms = ToRange(a.shift, "--shift-range");
  if (!a.snr.empty()) policy.snr_db = ToRange(a.snr, "--snr-range");
  try {
    policy.Validate();
  } catch (const ArgumentError &e) {
    throw UsageError(e.what());
  }
  const auto entries = ReadManifest(a.manifest);
  const fs::path in_dir = fs::path(a.manifest).parent_path();
  const fs::path out_dir(a.out_dir);
  fs::create_directories(out_dir / "wav");
  // Originals are kept; each gets `copies` augmented versions.
  std::vector<std::vector<std::string>> lines(entries.size());
  ParallelFor(entries.size(), [&](size_t i) {
    const fs::path src = ResolveAudioPath(entries[i], in_dir);
    const AudioBuffer audio = ReadWav(src);
    nlohmann::ordered_json orig;
    orig["audio_path"] = fs::absolute(src).lexically_normal().string();
    orig["transcript"] = entries[i].transcript;
    orig["duration_s"] = audio.duration_seconds();
    orig["augmentation"] = nullptr;
    lines[i].push_back(orig.dump());
    for (size_t k = 1; k <= a.copies; ++k) {
      Rng rng(DeriveSeed(a.seed, "augment", i, k));
      const AugmentationSpec spec = SampleSpec(policy, rng);
      const AudioBuffer aug = ApplyAugmentation(audio, spec);
      const std::string name = IndexedName("wav/", i, ("_" + std::to_string(k) + ".wav").c_str());
      WriteWav(aug, out_dir / name);
      nlohmann::ordered_json j;
      j["audio_path"] = name;
      j["transcript"] = entries[i].transcript;
      j["duration_s"] = aug.duration_seconds();
      j["augmentation"] = SpecJson(spec);
      lines[i].push_back(j.dump());
    }
  });
  std::string text;
  for (const auto &group : lines)
    for (const auto &l : group) text += l + "\n";
  WriteFileAtomic(out_dir / "manifest.jsonl", text);
  out << "wrote " << entries.size() * (a.copies + 1) << " entries to "
      << (out_dir / "manifest.jsonl").string() << "\n";
  return kExitOk;
}

struct FeaturizeArgs {
  std::string manifest, stats, out_dir;
};

int RunFeaturize(const FeaturizeArgs &a, std::ostream &out) {
  const auto entries = ReadManifest(a.manifest);
  const fs::path in_dir = fs::path(a.manifest).parent_path();
  const fs::path out_dir(a.out_dir);
  fs::create_directories(out_dir);
  std::vector<Spectrogram> specs(entries.size());
  ParallelFor(entries.size(), [&](size_t i) {
    specs[i] = UtteranceFeatures(ReadWav(ResolveAudioPath(entries[i], in_dir)));
    SaveSpectrogram(specs[i], out_dir / IndexedName("", i, ".feat"));
  });
  std::string index;
  for (size_t i = 0; i < entries.size(); ++i) {
    nlohmann::ordered_json j;
    j["feature_path"] = IndexedName("", i, ".feat");
    j["audio_path"] = entries[i].audio_path;
    j["transcript"] = entries[i].transcript;
    index += j.dump() + "\n";
  }
  WriteFileAtomic(out_dir / "features.jsonl", index);
  if (!entries.empty()) SaveStats(ComputeStats(specs), a.stats);
  out << "featurized " << entries.size() << " utterances\n";
  return kExitOk;
}

struct LmArgs {
  std::string corpus, out;
  int order = 3;
  bool words = false;
};

int RunLmTrain(const LmArgs &a, std::ostream &out) {
  if (a.order < 1) throw UsageError("--order must be >= 1");
  std::vector<std::string> lines;
  {
    std::string text = ReadFileText(a.corpus), line;
    for (char c : text) {
      if (c == '\n') {
        lines.push_back(line);
        line.clear();
      } else if (c != '\r') {
        line.push_back(c);
      }
    }
    if (!line.empty()) lines.push_back(line);
  }
  NGramModel model(a.order);
  if (a.words) {
    std::vector<std::vector<std::string>> sentences;
    for (const auto &l : lines) {
      auto w = SplitWords(l);
      if (!w.empty()) sentences.push_back(std::move(w));
    }
    model = TrainNGram(sentences, a.order);
  } else {
    model = TrainCharNGram(lines, a.order);
  }
  WriteArpa(model, a.out);
  out << "wrote order-" << a.order << " model to " << a.out << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string config, manifest, val, out;
  std::optional<uint64_t> seed;
  std::optional<size_t> max_epochs;
};

int RunTrain(const TrainArgs &a, std::ostream &out, std::ostream &err) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadFileText(a.config));
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(a.config + ": " + e.what());
  }
  TrainConfig config = TrainConfigFromJson(j);
  if (a.seed) config.seed = *a.seed;
  if (a.max_epochs) config.max_epochs = *a.max_epochs;
  config.Validate();
  const Alphabet alphabet(config.model.alphabet);
  const auto train_entries = ReadManifest(a.manifest, &alphabet);
  const auto val_entries = ReadManifest(a.val, &alphabet);
  const auto train = LoadUtterances(train_entries, fs::path(a.manifest).parent_path());
  const auto val = LoadUtterances(val_entries, fs::path(a.val).parent_path());
  const TrainResult r = Train(config, train, val, fs::path(a.out), [&](const EpochRecord &e) {
    err << "epoch " << e.epoch << " train " << e.train_loss << " val " << e.val_loss << " lr "
        << e.lr << " skipped " << e.skipped << " (" << e.seconds << " s)\n";
  });
  out << "best epoch " << r.best_epoch << " val_loss " << r.best_val_loss << "\n";
  return kExitOk;
}

struct DecodeArgs {
  std::string model, lm, out;
  size_t beam = 100;
  double alpha = 1.0, beta = 1.5;
};

struct DecodeSetup {
  std::optional<NGramModel> lm;
  std::optional<LmScorer> scorer;
  DecodeConfig config;
};

void SetUpDecode(const DecodeArgs &a, const Alphabet &alphabet, DecodeSetup &s) {
  s.config.beam_width = a.beam;
  s.config.lm_weight = a.alpha;
  s.config.insertion_bonus = a.beta;
  if (!a.lm.empty()) {
    s.lm.emplace(ReadArpa(a.lm));
    s.scorer.emplace(*s.lm, alphabet);
    s.config.lm = &*s.scorer;
  }
  try {
    s.config.Validate();
  } catch (const ArgumentError &e) {
    throw UsageError(e.what());
  }
}

int RunDecode(const DecodeArgs &a, const std::string &features, std::ostream &out) {
  const Checkpoint ckpt = LoadCheckpoint(a.model);
  Model model = ModelFromCheckpoint(ckpt);
  const FeatureStats stats = StatsFromCheckpoint(ckpt);
  const Alphabet alphabet(model.config().alphabet);
  DecodeSetup setup;
  SetUpDecode(a, alphabet, setup);
  const fs::path dir(features);
  std::vector<nlohmann::json> index;
  {
    const std::string text = ReadFileText(dir / "features.jsonl");
    size_t line = 0, start = 0;
    while (start < text.size()) {
      size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      ++line;
      const std::string l = text.substr(start, end - start);
      start = end + 1;
      if (l.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        index.push_back(nlohmann::json::parse(l));
        index.back().at("feature_path").get<std::string>();
      } catch (const nlohmann::json::exception &e) {
        throw ParseError("features.jsonl line " + std::to_string(line) + ": " + e.what());
      }
    }
  }
  std::vector<LogProbLattice> lattices(index.size());
  std::vector<uint8_t> ok(index.size(), 0);
  for (size_t i = 0; i < index.size(); ++i) {
    const Tensor x = FeaturesToTensor(
        NormalizeFeatures(LoadSpectrogram(dir / index[i]["feature_path"].get<std::string>()), stats));
    if (x.dim(0) < model.MinInputFrames()) continue;
    lattices[i] = LogSoftmax(model.Forward({&x}, false)[0]);
    ok[i] = 1;
  }
  std::vector<std::string> lines(index.size());
  ParallelFor(index.size(), [&](size_t i) {
    nlohmann::ordered_json j;
    j["feature_path"] = index[i]["feature_path"];
    if (!ok[i]) {
      j["hypothesis"] = nullptr;
      j["error"] = "too few frames";
    } else {
      const auto hyps = BeamSearch(lattices[i], setup.config);
      j["hypothesis"] = hyps.empty() ? "" : alphabet.Decode(hyps[0].labels);
      j["score"] = hyps.empty() ? 0.0 : hyps[0].score;
    }
    if (index[i].contains("transcript")) j["reference"] = index[i]["transcript"];
    lines[i] = j.dump();
  });
  std::string text;
  for (const auto &l : lines) text += l + "\n";
  if (a.out.empty()) {
    out << text;
  } else {
    WriteFileAtomic(a.out, text);
  }
  return kExitOk;
}

int RunEval(const DecodeArgs &a, const std::string &manifest, const std::string &hyps_out,
            std::ostream &out) {
  const Checkpoint ckpt = LoadCheckpoint(a.model);
  Model model = ModelFromCheckpoint(ckpt);
  const FeatureStats stats = StatsFromCheckpoint(ckpt);
  const Alphabet alphabet(model.config().alphabet);
  DecodeSetup setup;
  SetUpDecode(a, alphabet, setup);
  const auto entries = ReadManifest(manifest, &alphabet);
  const auto utts = LoadUtterances(entries, fs::path(manifest).parent_path());
  const EvalResult r = Evaluate(model, stats, utts, setup.config);
  if (!hyps_out.empty()) {
    std::string text;
    for (size_t i = 0; i < entries.size(); ++i) {
      nlohmann::ordered_json j;
      j["audio_path"] = entries[i].audio_path;
      j["reference"] = entries[i].transcript;
      j["hypothesis"] = r.hypotheses[i];
      text += j.dump() + "\n";
    }
    WriteFileAtomic(hyps_out, text);
  }
  nlohmann::ordered_json j;
  j["cer"] = r.cer;
  j["wer"] = r.wer;
  j["utterances"] = r.utterances;
  j["skipped"] = r.skipped;
  out << j.dump() << "\n";
  return kExitOk;
}

struct ToyArgs {
  std::string out_dir;
  uint64_t seed = 0;
  size_t train = 500, val = 100, alphabet_size = 5;
};

int RunToyCorpus(const ToyArgs &a, std::ostream &out) {
  ToyCorpusConfig c;
  c.num_train = a.train;
  c.num_val = a.val;
  c.alphabet_size = a.alphabet_size;
  try {
    c.Validate();
  } catch (const ArgumentError &e) {
    throw UsageError(e.what());
  }
  const ToyCorpus corpus = GenerateToyCorpus(c, a.seed, fs::path(a.out_dir));
  out << "alphabet " << corpus.alphabet << ": " << corpus.train.size() << " train, "
      << corpus.val.size() << " val utterances in " << a.out_dir << "\n";
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"speechreg: regularized end-to-end speech recognition pipeline", "speechreg"};
  app.require_subcommand(1);

  AugmentArgs aug;
  auto *augment = app.add_subcommand("augment", "Write augmented copies of a corpus");
  augment->add_option("--manifest", aug.manifest, "Input manifest (JSON lines)")->required();
  augment->add_option("--out-dir", aug.out_dir, "Output directory")->required();
  augment->add_option("--seed", aug.seed, "Random seed");
  augment->add_option("--copies", aug.copies, "Augmented copies per utterance")
      ->check(CLI::PositiveNumber);
  augment->add_flag("--no-tempo", aug.no_tempo, "Disable tempo perturbation");
  augment->add_flag("--no-pitch", aug.no_pitch, "Disable pitch perturbation");
  augment->add_flag("--no-gain", aug.no_gain, "Disable gain perturbation");
  augment->add_flag("--no-shift", aug.no_shift, "Disable time shift");
  augment->add_flag("--no-noise", aug.no_noise, "Disable white noise");
  augment->add_option("--tempo-range", aug.tempo, "low,high tempo factor")->delimiter(',');
  augment->add_option("--pitch-range", aug.pitch, "low,high cents")->delimiter(',');
  augment->add_option("--gain-range", aug.gain, "low,high dB")->delimiter(',');
  augment->add_option("--shift-range", aug.shift, "low,high ms")->delimiter(',');
  augment->add_option("--snr-range", aug.snr, "low,high dB")->delimiter(',');

  FeaturizeArgs feat;
  auto *featurize = app.add_subcommand("featurize", "Compute normalized log spectrograms");
  featurize->add_option("--manifest", feat.manifest, "Input manifest")->required();
  featurize->add_option("--stats", feat.stats, "Output per-bin statistics file")->required();
  featurize->add_option("--out-dir", feat.out_dir, "Output feature directory")->required();

  LmArgs lm;
  auto *lm_train = app.add_subcommand("lm-train", "Train a character n-gram model");
  lm_train->add_option("--corpus", lm.corpus, "Text corpus, one sentence per line")->required();
  lm_train->add_option("--order", lm.order, "N-gram order");
  lm_train->add_option("--out", lm.out, "Output ARPA file")->required();
  lm_train->add_flag("--words", lm.words, "Word tokens instead of characters");

  TrainArgs tr;
  auto *train = app.add_subcommand("train", "Train an acoustic model");
  train->add_option("--config", tr.config, "Training config (JSON)")->required();
  train->add_option("--manifest", tr.manifest, "Training manifest")->required();
  train->add_option("--val", tr.val, "Validation manifest")->required();
  train->add_option("--out", tr.out, "Output directory")->required();
  train->add_option("--seed", tr.seed, "Override the config seed");
  train->add_option("--max-epochs", tr.max_epochs, "Override max_epochs")
      ->check(CLI::PositiveNumber);

  DecodeArgs dec;
  std::string features;
  auto *decode = app.add_subcommand("decode", "Beam-search decode featurized utterances");
  decode->add_option("--features", features, "Directory written by featurize")->required();
  decode->add_option("--model", dec.model, "Checkpoint")->required();
  decode->add_option("--lm", dec.lm, "ARPA language model");
  decode->add_option("--beam", dec.beam, "Beam width")->check(CLI::PositiveNumber);
  decode->add_option("--alpha", dec.alpha, "LM weight");
  decode->add_option("--beta", dec.beta, "Insertion bonus");
  decode->add_option("--out", dec.out, "Output hypotheses (JSON lines); stdout if absent");

  DecodeArgs ev;
  std::string eval_manifest, eval_hyps;
  auto *eval = app.add_subcommand("eval", "Decode a manifest and report CER/WER as JSON");
  eval->add_option("--model", ev.model, "Checkpoint")->required();
  eval->add_option("--manifest", eval_manifest, "Manifest to score")->required();
  eval->add_option("--lm", ev.lm, "ARPA language model");
  eval->add_option("--beam", ev.beam, "Beam width")->check(CLI::PositiveNumber);
  eval->add_option("--alpha", ev.alpha, "LM weight");
  eval->add_option("--beta", ev.beta, "Insertion bonus");
  eval->add_option("--hyps", eval_hyps, "Also write per-utterance hypotheses here");

  ToyArgs toy;
  auto *toy_corpus = app.add_subcommand("toy-corpus", "Generate the synthetic tone corpus");
  toy_corpus->add_option("--out-dir", toy.out_dir, "Output directory")->required();
  toy_corpus->add_option("--seed", toy.seed, "Random seed");
  toy_corpus->add_option("--train", toy.train, "Training utterances")->check(CLI::PositiveNumber);
  toy_corpus->add_option("--val", toy.val, "Validation utterances");
  toy_corpus->add_option("--alphabet-size", toy.alphabet_size, "Symbols (1-8)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::ParseError &e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*augment) return RunAugment(aug, out);
    if (*featurize) return RunFeaturize(feat, out);
    if (*lm_train) return RunLmTrain(lm, out);
    if (*train) return RunTrain(tr, out, err);
    if (*decode) return RunDecode(dec, features, out);
    if (*eval) return RunEval(ev, eval_manifest, eval_hyps, out);
    if (*toy_corpus) return RunToyCorpus(toy, out);
  } catch (const UsageError &e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace speechreg
