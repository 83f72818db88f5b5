// speechreg/model.h

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

// Acoustic model: front convolution, pre-activation residual blocks of
// depthwise-separable convolutions, stacked bidirectional GRUs, one hidden
// fully connected layer and a per-frame output projection. A batch is a list
// of utterances of different lengths; nothing is padded, and batch
// normalization pools every valid position of every utterance.
//
// Layout per residual block (x is the block input):
//   y = sep2(drop(relu(bn2(sep1(drop(relu(bn1(x)))))))) + shortcut(x)
// where sep1 carries the block stride, both separable convs use same
// padding, and the shortcut is the identity unless the stride or channel
// count changes, in which case it is a strided 1x1 convolution.
//
// Dropout: inputs of every convolution (including the spectrogram itself)
// and every recurrent layer get one mask per sequence, shared by all frames;
// the two fully connected layers get independent per-frame masks.

#ifndef SPEECHREG_MODEL_H_
#define SPEECHREG_MODEL_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "speechreg/dropout.h"
#include "speechreg/features.h"
#include "speechreg/layers.h"
#include "speechreg/tensor.h"

namespace speechreg {

struct ConvSpec {
  size_t channels = 8;
  size_t filter_freq = 3;
  size_t filter_time = 3;
  size_t stride_freq = 1;
  size_t stride_time = 1;

  bool operator==(const ConvSpec &) const = default;
};

/// Drop probabilities per layer group.
struct DropoutConfig {
  double data = 0.1;
  double conv = 0.2;
  double recurrent = 0.3;
  double fc = 0.3;

  static DropoutConfig None() { return {0.0, 0.0, 0.0, 0.0}; }
  bool operator==(const DropoutConfig &) const = default;
};

struct ModelConfig {
  size_t input_bins = 257;
  ConvSpec front{8, 41, 11, 2, 2};
  std::vector<ConvSpec> blocks{{8, 3, 3, 1, 1}, {8, 3, 3, 1, 1}};
  size_t rnn_layers = 2;
  size_t rnn_hidden = 64;  // per direction
  size_t fc_hidden = 64;
  std::string alphabet = "abcde";
  DropoutConfig dropout;

  size_t num_classes() const { return alphabet.size() + 1; }
  /// Throws ArgumentError naming the offending field.
  void Validate() const;
  bool operator==(const ModelConfig &) const = default;
};

nlohmann::json ToJson(const ModelConfig &config);
ModelConfig ModelConfigFromJson(const nlohmann::json &j);

/// Trainable parameter count from the per-layer formulas, without
/// allocating the model.
size_t CountParameters(const ModelConfig &config);

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// Frame-major features of one utterance as a [frames, bins] tensor.
Tensor FeaturesToTensor(const Spectrogram &spec);

class Model {
 public:
  explicit Model(ModelConfig config);
  Model(const Model &) = delete;
  Model &operator=(const Model &) = delete;
  Model(Model &&) = default;

  const ModelConfig &config() const { return config_; }
  std::vector<Parameter> &params() { return params_; }
  const std::vector<Parameter> &params() const { return params_; }
  /// Batch-norm running statistics, saved with the parameters.
  std::vector<Parameter> &buffers() { return buffers_; }
  const std::vector<Parameter> &buffers() const { return buffers_; }
  Parameter &param(const std::string &name);
  size_t NumParameters() const;

  /// Conv/FC weights U(+-sqrt(6 / fan_in)), recurrent weights
  /// U(-1/32, 1/32), biases and BN shifts 0, BN scales 1, running stats
  /// (0, 1). Deterministic given the seed.
  void Init(uint64_t seed);

  /// Frames after the front convolution and the block strides.
  size_t OutputFrames(size_t input_frames) const;
  /// Smallest input frame count the convolutions accept.
  size_t MinInputFrames() const;

  /// Per-utterance logits [T', classes]. Train mode samples dropout masks
  /// from streams keyed by (seed, utterance index) and uses batch
  /// statistics; eval mode scales by (1 - p) and uses running statistics.
  /// The pass is cached for Backward.
  std::vector<Tensor> Forward(const std::vector<const Tensor *> &features, bool train,
                              uint64_t seed = 0);
  /// Accumulates parameter gradients from d loss / d logits of the last
  /// Forward.
  void Backward(const std::vector<Tensor> &dlogits);
  void ZeroGrad();

 private:
  struct Bn {
    size_t gamma, beta, mean, var;  // params_ / buffers_ indices
  };
  struct Block {
    ConvGeometry g1, g2;
    size_t dw1, pw1, b1, dw2, pw2, b2;
    Bn bn1, bn2;
    bool projection = false;
    ConvGeometry gproj;
    size_t proj_w = 0, proj_b = 0;
  };
  struct GruDir {
    size_t w, u;
    Bn bn;
  };
  struct Cache;

  size_t AddParam(const std::string &name, Shape shape);
  Bn AddBn(const std::string &name, size_t features);
  std::vector<Tensor> RunBn(const Bn &bn, const std::vector<const Tensor *> &xs,
                            BnLayout layout, bool train, BatchNormCache *cache);
  std::vector<Tensor> RunBnBackward(const Bn &bn, const std::vector<Tensor> &dys,
                                    BnLayout layout, const BatchNormCache &cache);

  ModelConfig config_;
  std::vector<Parameter> params_;
  std::vector<Parameter> buffers_;
  ConvGeometry front_geom_;
  size_t front_w_ = 0, front_b_ = 0;
  std::vector<Block> blocks_;
  Bn post_bn_{};
  size_t flat_dim_ = 0;
  std::vector<std::array<GruDir, 2>> grus_;
  size_t fc_w_ = 0;
  Bn fc_bn_{};
  size_t out_w_ = 0, out_b_ = 0;
  std::shared_ptr<Cache> cache_;
};

/// Versioned binary checkpoint: magic "SRCKPT\0\0", u32 version, u32 length
/// + canonical JSON metadata, u32 tensor count, then per tensor: u32 name
/// length, name, u8 dtype tag (1 = f64), u32 rank, u64 dims, f64 data.
/// Little-endian throughout.
struct Checkpoint {
  nlohmann::json metadata;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor &Get(const std::string &name) const;
  bool Has(const std::string &name) const;
};

std::vector<uint8_t> SerializeCheckpoint(const Checkpoint &ckpt);
Checkpoint DeserializeCheckpoint(const std::vector<uint8_t> &bytes);
void SaveCheckpoint(const Checkpoint &ckpt, const std::filesystem::path &path);
Checkpoint LoadCheckpoint(const std::filesystem::path &path);

/// Parameters and buffers under their names; metadata["model"] holds the
/// config.
Checkpoint ModelToCheckpoint(const Model &model);
/// Throws FormatError when a tensor is missing or mis-shaped.
Model ModelFromCheckpoint(const Checkpoint &ckpt);

}  // namespace speechreg

#endif  // SPEECHREG_MODEL_H_
