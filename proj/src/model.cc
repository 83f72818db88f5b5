// src/model.cc

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

#include "speechreg/model.h"

#include <cmath>
#include <set>

#include "speechreg/common.h"
#include "speechreg/file_util.h"

namespace speechreg {

namespace {

void CheckProbability(double p, const char *what) {
  if (!(p >= 0.0 && p < 1.0))
    throw ArgumentError(std::string("model config: dropout.") + what + " must be in [0, 1)");
}

void CheckSpec(const ConvSpec &s, const std::string &what) {
  if (s.channels == 0 || s.filter_freq == 0 || s.filter_time == 0 || s.stride_freq == 0 ||
      s.stride_time == 0)
    throw ArgumentError("model config: " + what + " has a zero entry");
}

nlohmann::json SpecJson(const ConvSpec &s) {
  return {{"channels", s.channels},       {"filter_freq", s.filter_freq},
          {"filter_time", s.filter_time}, {"stride_freq", s.stride_freq},
          {"stride_time", s.stride_time}};
}

ConvSpec SpecFromJson(const nlohmann::json &j) {
  ConvSpec s;
  s.channels = j.value("channels", s.channels);
  s.filter_freq = j.value("filter_freq", s.filter_freq);
  s.filter_time = j.value("filter_time", s.filter_time);
  s.stride_freq = j.value("stride_freq", s.stride_freq);
  s.stride_time = j.value("stride_time", s.stride_time);
  return s;
}

// Same padding for an odd filter.
ConvGeometry SameGeometry(const ConvSpec &s) {
  return {s.stride_freq, s.stride_time, (s.filter_freq - 1) / 2, (s.filter_time - 1) / 2};
}

Tensor Transpose2d(const Tensor &x) {
  const size_t R = x.dim(0), C = x.dim(1);
  Tensor y({C, R});
  for (size_t r = 0; r < R; ++r)
    for (size_t c = 0; c < C; ++c) y.at(c, r) = x.at(r, c);
  return y;
}

// [C, F, T] -> [T, C * F], feature index c * F + f.
Tensor Flatten(const Tensor &x) {
  const size_t C = x.dim(0), F = x.dim(1), T = x.dim(2);
  Tensor y({T, C * F});
  for (size_t c = 0; c < C; ++c)
    for (size_t f = 0; f < F; ++f)
      for (size_t t = 0; t < T; ++t) y.at(t, c * F + f) = x.at(c, f, t);
  return y;
}

Tensor Unflatten(const Tensor &y, size_t C, size_t F) {
  const size_t T = y.dim(0);
  Tensor x({C, F, T});
  for (size_t c = 0; c < C; ++c)
    for (size_t f = 0; f < F; ++f)
      for (size_t t = 0; t < T; ++t) x.at(c, f, t) = y.at(t, c * F + f);
  return x;
}

struct DropSite {
  bool train = false;
  double p = 0.0;
  bool sequence = true;  // fixed across time
  size_t time_axis = 0;
};

// Forward through one dropout site; `mask` receives the sampled mask.
Tensor Drop(const Tensor &x, const DropSite &s, Rng &rng, DropoutMask *mask) {
  if (s.p == 0.0) return x;
  if (!s.train) return ApplyEval(x, s.p);
  if (s.sequence) {
    *mask = SampleSequenceMask(x.size() / x.dim(s.time_axis), s.p, rng);
  } else {
    *mask = SampleStandardMask(x.shape(), s.p, rng);
  }
  return ApplyTrain(x, *mask, s.time_axis);
}

Tensor DropBackward(const Tensor &dy, const DropSite &s, const DropoutMask &mask) {
  if (s.p == 0.0) return dy;
  if (!s.train) return ApplyEval(dy, s.p);
  return DropoutBackward(dy, mask, s.time_axis);
}

std::vector<const Tensor *> Ptrs(const std::vector<Tensor> &v) {
  std::vector<const Tensor *> out;
  out.reserve(v.size());
  for (const auto &t : v) out.push_back(&t);
  return out;
}

}  // namespace

void ModelConfig::Validate() const {
  if (input_bins == 0) throw ArgumentError("model config: input_bins must be positive");
  CheckSpec(front, "front");
  if (front.filter_freq > input_bins)
    throw ArgumentError("model config: front filter_freq exceeds input_bins");
  if (blocks.empty()) throw ArgumentError("model config: at least one residual block required");
  for (size_t i = 0; i < blocks.size(); ++i) {
    CheckSpec(blocks[i], "block " + std::to_string(i));
    if (blocks[i].filter_freq % 2 == 0 || blocks[i].filter_time % 2 == 0)
      throw ArgumentError("model config: block " + std::to_string(i) +
                          " filters must be odd (same padding)");
  }
  if (rnn_layers == 0) throw ArgumentError("model config: rnn_layers must be at least 1");
  if (rnn_hidden == 0 || fc_hidden == 0)
    throw ArgumentError("model config: hidden sizes must be positive");
  if (alphabet.empty()) throw ArgumentError("model config: empty alphabet");
  std::set<char> seen(alphabet.begin(), alphabet.end());
  if (seen.size() != alphabet.size())
    throw ArgumentError("model config: alphabet has duplicate symbols");
  CheckProbability(dropout.data, "data");
  CheckProbability(dropout.conv, "conv");
  CheckProbability(dropout.recurrent, "recurrent");
  CheckProbability(dropout.fc, "fc");
}

nlohmann::json ToJson(const ModelConfig &c) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto &b : c.blocks) blocks.push_back(SpecJson(b));
  return {{"input_bins", c.input_bins},
          {"front", SpecJson(c.front)},
          {"blocks", blocks},
          {"rnn_layers", c.rnn_layers},
          {"rnn_hidden", c.rnn_hidden},
          {"fc_hidden", c.fc_hidden},
          {"alphabet", c.alphabet},
          {"dropout",
           {{"data", c.dropout.data},
            {"conv", c.dropout.conv},
            {"recurrent", c.dropout.recurrent},
            {"fc", c.dropout.fc}}}};
}

ModelConfig ModelConfigFromJson(const nlohmann::json &j) {
  ModelConfig c;
  try {
    c.input_bins = j.value("input_bins", c.input_bins);
    if (j.contains("front")) c.front = SpecFromJson(j.at("front"));
    if (j.contains("blocks")) {
      c.blocks.clear();
      for (const auto &b : j.at("blocks")) c.blocks.push_back(SpecFromJson(b));
    }
    c.rnn_layers = j.value("rnn_layers", c.rnn_layers);
    c.rnn_hidden = j.value("rnn_hidden", c.rnn_hidden);
    c.fc_hidden = j.value("fc_hidden", c.fc_hidden);
    c.alphabet = j.value("alphabet", c.alphabet);
    if (j.contains("dropout")) {
      const auto &d = j.at("dropout");
      c.dropout.data = d.value("data", c.dropout.data);
      c.dropout.conv = d.value("conv", c.dropout.conv);
      c.dropout.recurrent = d.value("recurrent", c.dropout.recurrent);
      c.dropout.fc = d.value("fc", c.dropout.fc);
    }
  } catch (const nlohmann::json::exception &e) {
    throw ArgumentError(std::string("model config: ") + e.what());
  }
  c.Validate();
  return c;
}

size_t CountParameters(const ModelConfig &c) {
  c.Validate();
  size_t n = DenseConvParamCount(1, c.front.channels, c.front.filter_freq, c.front.filter_time);
  size_t channels = c.front.channels;
  size_t freq = ConvOutputSize(c.input_bins, c.front.filter_freq, c.front.stride_freq, 0);
  for (const auto &s : c.blocks) {
    n += 2 * channels + SepConvParamCount(channels, s.channels, s.filter_freq, s.filter_time);
    n += 2 * s.channels + SepConvParamCount(s.channels, s.channels, s.filter_freq, s.filter_time);
    if (s.stride_freq > 1 || s.stride_time > 1 || s.channels != channels)
      n += DenseConvParamCount(channels, s.channels, 1, 1);
    channels = s.channels;
    freq = ConvOutputSize(freq, s.filter_freq, s.stride_freq, (s.filter_freq - 1) / 2);
  }
  n += 2 * channels;
  size_t in = channels * freq;
  const size_t H = c.rnn_hidden;
  for (size_t l = 0; l < c.rnn_layers; ++l) {
    n += 2 * (3 * H * in + 3 * H * H + 2 * 3 * H);
    in = 2 * H;
  }
  n += c.fc_hidden * in + 2 * c.fc_hidden;
  n += c.num_classes() * c.fc_hidden + c.num_classes();
  return n;
}

Tensor FeaturesToTensor(const Spectrogram &spec) {
  return Tensor({spec.frames, spec.bins}, spec.data);
}

// ---------------------------------------------------------------------------
// Construction and initialization.

size_t Model::AddParam(const std::string &name, Shape shape) {
  Tensor value(shape);
  params_.push_back({name, value, Tensor(std::move(shape))});
  return params_.size() - 1;
}

Model::Bn Model::AddBn(const std::string &name, size_t features) {
  Bn bn{};
  bn.gamma = AddParam(name + ".gamma", {features});
  bn.beta = AddParam(name + ".beta", {features});
  buffers_.push_back({name + ".running_mean", Tensor({features}), Tensor()});
  bn.mean = buffers_.size() - 1;
  buffers_.push_back({name + ".running_var", Tensor({features}, 1.0), Tensor()});
  bn.var = buffers_.size() - 1;
  params_[bn.gamma].value.Fill(1.0);
  return bn;
}

Model::Model(ModelConfig config) : config_(std::move(config)) {
  config_.Validate();
  const auto &fr = config_.front;
  front_geom_ = {fr.stride_freq, fr.stride_time, 0, 0};
  front_w_ = AddParam("front.w", {fr.channels, 1, fr.filter_freq, fr.filter_time});
  front_b_ = AddParam("front.b", {fr.channels});

  size_t channels = fr.channels;
  size_t freq = ConvOutputSize(config_.input_bins, fr.filter_freq, fr.stride_freq, 0);
  for (size_t i = 0; i < config_.blocks.size(); ++i) {
    const auto &s = config_.blocks[i];
    const std::string p = "block" + std::to_string(i);
    Block b{};
    b.g1 = SameGeometry(s);
    b.g2 = SameGeometry(ConvSpec{s.channels, s.filter_freq, s.filter_time, 1, 1});
    b.bn1 = AddBn(p + ".bn1", channels);
    b.dw1 = AddParam(p + ".conv1.depthwise", {channels, s.filter_freq, s.filter_time});
    b.pw1 = AddParam(p + ".conv1.pointwise", {s.channels, channels});
    b.b1 = AddParam(p + ".conv1.b", {s.channels});
    b.bn2 = AddBn(p + ".bn2", s.channels);
    b.dw2 = AddParam(p + ".conv2.depthwise", {s.channels, s.filter_freq, s.filter_time});
    b.pw2 = AddParam(p + ".conv2.pointwise", {s.channels, s.channels});
    b.b2 = AddParam(p + ".conv2.b", {s.channels});
    b.projection = s.stride_freq > 1 || s.stride_time > 1 || s.channels != channels;
    if (b.projection) {
      b.gproj = {s.stride_freq, s.stride_time, 0, 0};
      b.proj_w = AddParam(p + ".shortcut.w", {s.channels, channels, 1, 1});
      b.proj_b = AddParam(p + ".shortcut.b", {s.channels});
    }
    blocks_.push_back(b);
    channels = s.channels;
    freq = ConvOutputSize(freq, s.filter_freq, s.stride_freq, (s.filter_freq - 1) / 2);
  }
  post_bn_ = AddBn("post.bn", channels);
  flat_dim_ = channels * freq;

  size_t in = flat_dim_;
  const size_t H = config_.rnn_hidden;
  for (size_t l = 0; l < config_.rnn_layers; ++l) {
    std::array<GruDir, 2> dirs{};
    for (int d = 0; d < 2; ++d) {
      const std::string p = "gru" + std::to_string(l) + (d == 0 ? ".fwd" : ".bwd");
      dirs[static_cast<size_t>(d)].w = AddParam(p + ".w", {3 * H, in});
      dirs[static_cast<size_t>(d)].u = AddParam(p + ".u", {3 * H, H});
      dirs[static_cast<size_t>(d)].bn = AddBn(p + ".bn", 3 * H);
    }
    grus_.push_back(dirs);
    in = 2 * H;
  }
  fc_w_ = AddParam("fc.w", {config_.fc_hidden, in});
  fc_bn_ = AddBn("fc.bn", config_.fc_hidden);
  out_w_ = AddParam("out.w", {config_.num_classes(), config_.fc_hidden});
  out_b_ = AddParam("out.b", {config_.num_classes()});
}

Parameter &Model::param(const std::string &name) {
  for (auto &p : params_)
    if (p.name == name) return p;
  throw ArgumentError("model: no parameter named '" + name + "'");
}

size_t Model::NumParameters() const {
  size_t n = 0;
  for (const auto &p : params_) n += p.value.size();
  return n;
}

void Model::Init(uint64_t seed) {
  Rng rng(DeriveSeed(seed, "init"));
  auto uniform = [&](size_t idx, double limit) {
    for (auto &v : params_[idx].value.vec()) v = rng.Uniform(-limit, limit);
  };
  auto fan_in = [&](size_t idx) {
    const auto &s = params_[idx].value.shape();
    return static_cast<double>(NumElements(s) / s[0]);
  };
  auto he = [&](size_t idx) { uniform(idx, std::sqrt(6.0 / fan_in(idx))); };
  auto reset_bn = [&](const Bn &bn) {
    params_[bn.gamma].value.Fill(1.0);
    params_[bn.beta].value.Fill(0.0);
    buffers_[bn.mean].value.Fill(0.0);
    buffers_[bn.var].value.Fill(1.0);
  };

  he(front_w_);
  params_[front_b_].value.Fill(0.0);
  for (const auto &b : blocks_) {
    reset_bn(b.bn1);
    reset_bn(b.bn2);
    he(b.dw1);
    he(b.pw1);
    params_[b.b1].value.Fill(0.0);
    he(b.dw2);
    he(b.pw2);
    params_[b.b2].value.Fill(0.0);
    if (b.projection) {
      he(b.proj_w);
      params_[b.proj_b].value.Fill(0.0);
    }
  }
  reset_bn(post_bn_);
  for (const auto &dirs : grus_)
    for (const auto &d : dirs) {
      he(d.w);
      uniform(d.u, 1.0 / 32.0);
      reset_bn(d.bn);
    }
  he(fc_w_);
  reset_bn(fc_bn_);
  he(out_w_);
  params_[out_b_].value.Fill(0.0);
}

size_t Model::OutputFrames(size_t input_frames) const {
  const auto &fr = config_.front;
  if (input_frames < fr.filter_time) return 0;
  size_t t = (input_frames - fr.filter_time) / fr.stride_time + 1;
  for (const auto &s : config_.blocks) t = (t - 1) / s.stride_time + 1;
  return t;
}

size_t Model::MinInputFrames() const { return config_.front.filter_time; }

void Model::ZeroGrad() {
  for (auto &p : params_) p.grad.Fill(0.0);
}

std::vector<Tensor> Model::RunBn(const Bn &bn, const std::vector<const Tensor *> &xs,
                                 BnLayout layout, bool train, BatchNormCache *cache) {
  return BatchNormForward(xs, layout, params_[bn.gamma].value, params_[bn.beta].value,
                          buffers_[bn.mean].value, buffers_[bn.var].value, train, cache);
}

std::vector<Tensor> Model::RunBnBackward(const Bn &bn, const std::vector<Tensor> &dys,
                                         BnLayout layout, const BatchNormCache &cache) {
  return BatchNormBackward(dys, layout, params_[bn.gamma].value, cache,
                           &params_[bn.gamma].grad, &params_[bn.beta].grad);
}

// ---------------------------------------------------------------------------
// Forward and backward.

struct Model::Cache {
  bool train = false;
  size_t n = 0;
  DropSite data_site, conv_site, rec_site, fc_site;

  std::vector<Tensor> x0d;  // front conv input
  std::vector<DropoutMask> data_mask;

  struct BlockCache {
    std::vector<Tensor> in;
    BatchNormCache bn1, bn2;
    std::vector<Tensor> r1, d1, h1, r2, d2, h2;  // h = depthwise outputs
    std::vector<DropoutMask> m1, m2;
  };
  std::vector<BlockCache> blocks;
  size_t conv_channels = 0, conv_freq = 0;
  BatchNormCache post_bn;
  std::vector<Tensor> post_r;

  struct GruLayerCache {
    std::vector<Tensor> xd;
    std::vector<DropoutMask> m;
    BatchNormCache bn[2];
    std::vector<GruCache> rec[2];
  };
  std::vector<GruLayerCache> grus;

  std::vector<Tensor> fc_xd, fc_r, out_xd;
  std::vector<DropoutMask> fc_m, out_m;
  BatchNormCache fc_bn;
};

std::vector<Tensor> Model::Forward(const std::vector<const Tensor *> &features, bool train,
                                   uint64_t seed) {
  const size_t N = features.size();
  if (N == 0) throw ArgumentError("model: empty batch");
  auto c = std::make_shared<Cache>();
  c->train = train;
  c->n = N;
  const auto &dp = config_.dropout;
  c->data_site = {train, dp.data, true, 2};
  c->conv_site = {train, dp.conv, true, 2};
  c->rec_site = {train, dp.recurrent, true, 0};
  c->fc_site = {train, dp.fc, false, 0};

  std::vector<Rng> rngs;
  rngs.reserve(N);
  for (size_t n = 0; n < N; ++n) rngs.emplace_back(DeriveSeed(seed, "dropout", n));

  // Front convolution.
  std::vector<Tensor> h(N);
  c->x0d.resize(N);
  c->data_mask.resize(N);
  for (size_t n = 0; n < N; ++n) {
    const Tensor &f = *features[n];
    if (f.rank() != 2 || f.dim(1) != config_.input_bins)
      throw ArgumentError("model: expected features [frames, " +
                          std::to_string(config_.input_bins) + "], got " +
                          ShapeToString(f.shape()));
    if (f.dim(0) < MinInputFrames())
      throw ArgumentError("model: utterance " + std::to_string(n) + " has " +
                          std::to_string(f.dim(0)) + " frames, fewer than the minimum " +
                          std::to_string(MinInputFrames()));
    Tensor x = Transpose2d(f);
    x.Reshape({1, config_.input_bins, f.dim(0)});
    c->x0d[n] = Drop(x, c->data_site, rngs[n], &c->data_mask[n]);
    h[n] = Conv2dForward(c->x0d[n], params_[front_w_].value, &params_[front_b_].value,
                         front_geom_);
  }

  // Residual blocks.
  c->blocks.resize(blocks_.size());
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const Block &b = blocks_[i];
    auto &bc = c->blocks[i];
    bc.in = std::move(h);
    h.assign(N, Tensor());
    auto y1 = RunBn(b.bn1, Ptrs(bc.in), BnLayout::kChannelFirst, train, &bc.bn1);
    bc.r1.resize(N), bc.d1.resize(N), bc.h1.resize(N), bc.m1.resize(N);
    std::vector<Tensor> s1(N);
    for (size_t n = 0; n < N; ++n) {
      bc.r1[n] = Relu(y1[n]);
      bc.d1[n] = Drop(bc.r1[n], c->conv_site, rngs[n], &bc.m1[n]);
      bc.h1[n] = DepthwiseConv2dForward(bc.d1[n], params_[b.dw1].value, b.g1);
      s1[n] = PointwiseConvForward(bc.h1[n], params_[b.pw1].value, &params_[b.b1].value);
    }
    auto y2 = RunBn(b.bn2, Ptrs(s1), BnLayout::kChannelFirst, train, &bc.bn2);
    bc.r2.resize(N), bc.d2.resize(N), bc.h2.resize(N), bc.m2.resize(N);
    for (size_t n = 0; n < N; ++n) {
      bc.r2[n] = Relu(y2[n]);
      bc.d2[n] = Drop(bc.r2[n], c->conv_site, rngs[n], &bc.m2[n]);
      bc.h2[n] = DepthwiseConv2dForward(bc.d2[n], params_[b.dw2].value, b.g2);
      h[n] = PointwiseConvForward(bc.h2[n], params_[b.pw2].value, &params_[b.b2].value);
      if (b.projection) {
        h[n] += Conv2dForward(bc.in[n], params_[b.proj_w].value, &params_[b.proj_b].value,
                              b.gproj);
      } else {
        h[n] += bc.in[n];
      }
    }
  }

  // Final normalization, then one feature vector per frame.
  c->conv_channels = h[0].dim(0);
  c->conv_freq = h[0].dim(1);
  auto yp = RunBn(post_bn_, Ptrs(h), BnLayout::kChannelFirst, train, &c->post_bn);
  c->post_r.resize(N);
  std::vector<Tensor> seq(N);
  for (size_t n = 0; n < N; ++n) {
    c->post_r[n] = Relu(yp[n]);
    seq[n] = Flatten(c->post_r[n]);
  }

  // Bidirectional GRU stack.
  const size_t H = config_.rnn_hidden;
  c->grus.resize(grus_.size());
  for (size_t l = 0; l < grus_.size(); ++l) {
    auto &gc = c->grus[l];
    gc.xd.resize(N);
    gc.m.resize(N);
    for (size_t n = 0; n < N; ++n) gc.xd[n] = Drop(seq[n], c->rec_site, rngs[n], &gc.m[n]);
    std::vector<Tensor> out(N);
    for (size_t n = 0; n < N; ++n) out[n] = Tensor({seq[n].dim(0), 2 * H});
    for (int d = 0; d < 2; ++d) {
      const GruDir &g = grus_[l][static_cast<size_t>(d)];
      std::vector<Tensor> proj(N);
      for (size_t n = 0; n < N; ++n) proj[n] = LinearForward(gc.xd[n], params_[g.w].value, nullptr);
      auto a = RunBn(g.bn, Ptrs(proj), BnLayout::kFeatureLast, train, &gc.bn[d]);
      gc.rec[d].resize(N);
      for (size_t n = 0; n < N; ++n) {
        const Tensor hd = GruRecurrenceForward(a[n], params_[g.u].value, d == 1, &gc.rec[d][n]);
        for (size_t t = 0; t < hd.dim(0); ++t)
          for (size_t k = 0; k < H; ++k) out[n].at(t, static_cast<size_t>(d) * H + k) = hd.at(t, k);
      }
    }
    seq = std::move(out);
  }

  // Hidden fully connected layer and output projection.
  c->fc_xd.resize(N);
  c->fc_m.resize(N);
  std::vector<Tensor> fc_proj(N);
  for (size_t n = 0; n < N; ++n) {
    c->fc_xd[n] = Drop(seq[n], c->fc_site, rngs[n], &c->fc_m[n]);
    fc_proj[n] = LinearForward(c->fc_xd[n], params_[fc_w_].value, nullptr);
  }
  auto yf = RunBn(fc_bn_, Ptrs(fc_proj), BnLayout::kFeatureLast, train, &c->fc_bn);
  c->fc_r.resize(N);
  c->out_xd.resize(N);
  c->out_m.resize(N);
  std::vector<Tensor> logits(N);
  for (size_t n = 0; n < N; ++n) {
    c->fc_r[n] = Relu(yf[n]);
    c->out_xd[n] = Drop(c->fc_r[n], c->fc_site, rngs[n], &c->out_m[n]);
    logits[n] = LinearForward(c->out_xd[n], params_[out_w_].value, &params_[out_b_].value);
  }
  cache_ = std::move(c);
  return logits;
}

void Model::Backward(const std::vector<Tensor> &dlogits) {
  if (!cache_) throw ArgumentError("model: Backward called before Forward");
  Cache &c = *cache_;
  const size_t N = c.n;
  if (dlogits.size() != N) throw ArgumentError("model: gradient batch size mismatch");

  // Output projection and hidden layer.
  std::vector<Tensor> dfc(N);
  for (size_t n = 0; n < N; ++n) {
    Tensor dx;
    LinearBackward(c.out_xd[n], params_[out_w_].value, dlogits[n], &dx, &params_[out_w_].grad,
                   &params_[out_b_].grad);
    dfc[n] = ReluBackward(c.fc_r[n], DropBackward(dx, c.fc_site, c.out_m[n]));
  }
  auto dproj = RunBnBackward(fc_bn_, dfc, BnLayout::kFeatureLast, c.fc_bn);
  std::vector<Tensor> dseq(N);
  for (size_t n = 0; n < N; ++n) {
    Tensor dx;
    LinearBackward(c.fc_xd[n], params_[fc_w_].value, dproj[n], &dx, &params_[fc_w_].grad,
                   nullptr);
    dseq[n] = DropBackward(dx, c.fc_site, c.fc_m[n]);
  }

  // GRU stack.
  const size_t H = config_.rnn_hidden;
  for (size_t l = grus_.size(); l-- > 0;) {
    auto &gc = c.grus[l];
    std::vector<Tensor> dxd(N);
    for (size_t n = 0; n < N; ++n) dxd[n] = Tensor(gc.xd[n].shape());
    for (int d = 0; d < 2; ++d) {
      const GruDir &g = grus_[l][static_cast<size_t>(d)];
      std::vector<Tensor> da(N);
      for (size_t n = 0; n < N; ++n) {
        const size_t T = dseq[n].dim(0);
        Tensor dh({T, H});
        for (size_t t = 0; t < T; ++t)
          for (size_t k = 0; k < H; ++k) dh.at(t, k) = dseq[n].at(t, static_cast<size_t>(d) * H + k);
        GruRecurrenceBackward(params_[g.u].value, gc.rec[d][n], dh, &da[n], &params_[g.u].grad);
      }
      auto dp = RunBnBackward(g.bn, da, BnLayout::kFeatureLast, gc.bn[d]);
      for (size_t n = 0; n < N; ++n) {
        Tensor dx;
        LinearBackward(gc.xd[n], params_[g.w].value, dp[n], &dx, &params_[g.w].grad, nullptr);
        dxd[n] += dx;
      }
    }
    for (size_t n = 0; n < N; ++n) dseq[n] = DropBackward(dxd[n], c.rec_site, gc.m[n]);
  }

  // Back to the conv layout.
  std::vector<Tensor> dpost(N);
  for (size_t n = 0; n < N; ++n)
    dpost[n] = ReluBackward(c.post_r[n], Unflatten(dseq[n], c.conv_channels, c.conv_freq));
  auto dh = RunBnBackward(post_bn_, dpost, BnLayout::kChannelFirst, c.post_bn);

  for (size_t i = blocks_.size(); i-- > 0;) {
    const Block &b = blocks_[i];
    auto &bc = c.blocks[i];
    std::vector<Tensor> dy2(N), din(N);
    for (size_t n = 0; n < N; ++n) {
      if (b.projection) {
        Conv2dBackward(bc.in[n], params_[b.proj_w].value, dh[n], b.gproj, &din[n],
                       &params_[b.proj_w].grad, &params_[b.proj_b].grad);
      } else {
        din[n] = dh[n];
      }
      Tensor dh2, dd2;
      PointwiseConvBackward(bc.h2[n], params_[b.pw2].value, dh[n], &dh2, &params_[b.pw2].grad,
                            &params_[b.b2].grad);
      DepthwiseConv2dBackward(bc.d2[n], params_[b.dw2].value, dh2, b.g2, &dd2,
                              &params_[b.dw2].grad);
      dy2[n] = ReluBackward(bc.r2[n], DropBackward(dd2, c.conv_site, bc.m2[n]));
    }
    auto ds1 = RunBnBackward(b.bn2, dy2, BnLayout::kChannelFirst, bc.bn2);
    std::vector<Tensor> dy1(N);
    for (size_t n = 0; n < N; ++n) {
      Tensor dh1, dd1;
      PointwiseConvBackward(bc.h1[n], params_[b.pw1].value, ds1[n], &dh1, &params_[b.pw1].grad,
                            &params_[b.b1].grad);
      DepthwiseConv2dBackward(bc.d1[n], params_[b.dw1].value, dh1, b.g1, &dd1,
                              &params_[b.dw1].grad);
      dy1[n] = ReluBackward(bc.r1[n], DropBackward(dd1, c.conv_site, bc.m1[n]));
    }
    auto dx = RunBnBackward(b.bn1, dy1, BnLayout::kChannelFirst, bc.bn1);
    for (size_t n = 0; n < N; ++n) {
      dx[n] += din[n];
    }
    dh = std::move(dx);
  }

  for (size_t n = 0; n < N; ++n)
    Conv2dBackward(c.x0d[n], params_[front_w_].value, dh[n], front_geom_, nullptr,
                   &params_[front_w_].grad, &params_[front_b_].grad);
}

// ---------------------------------------------------------------------------
// Checkpoints.

namespace {
constexpr char kCheckpointMagic[8] = {'S', 'R', 'C', 'K', 'P', 'T', 0, 0};
constexpr uint32_t kCheckpointVersion = 1;
constexpr uint8_t kDtypeF64 = 1;
}  // namespace

const Tensor &Checkpoint::Get(const std::string &name) const {
  for (const auto &[n, t] : tensors)
    if (n == name) return t;
  throw FormatError("checkpoint: missing tensor '" + name + "'");
}

bool Checkpoint::Has(const std::string &name) const {
  for (const auto &[n, t] : tensors)
    if (n == name) return true;
  return false;
}

std::vector<uint8_t> SerializeCheckpoint(const Checkpoint &ckpt) {
  ByteWriter w;
  w.Bytes(std::string_view(kCheckpointMagic, 8));
  w.U32(kCheckpointVersion);
  const std::string meta = ckpt.metadata.dump();
  w.U32(static_cast<uint32_t>(meta.size()));
  w.Bytes(meta);
  w.U32(static_cast<uint32_t>(ckpt.tensors.size()));
  for (const auto &[name, t] : ckpt.tensors) {
    w.U32(static_cast<uint32_t>(name.size()));
    w.Bytes(name);
    w.U8(kDtypeF64);
    w.U32(static_cast<uint32_t>(t.rank()));
    for (size_t d : t.shape()) w.U64(d);
    for (double v : t.values()) w.F64(v);
  }
  return w.bytes();
}

Checkpoint DeserializeCheckpoint(const std::vector<uint8_t> &bytes) {
  ByteReader r(bytes, "checkpoint");
  if (r.Bytes(8) != std::string(kCheckpointMagic, 8))
    throw FormatError("checkpoint: bad magic");
  const uint32_t version = r.U32();
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  Checkpoint ckpt;
  const std::string meta = r.Bytes(r.U32());
  try {
    ckpt.metadata = nlohmann::json::parse(meta);
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("checkpoint: bad metadata: ") + e.what());
  }
  const uint32_t count = r.U32();
  for (uint32_t i = 0; i < count; ++i) {
    std::string name = r.Bytes(r.U32());
    const uint8_t dtype = r.U8();
    if (dtype != kDtypeF64)
      throw FormatError("checkpoint: tensor '" + name + "' has unsupported dtype tag " +
                        std::to_string(dtype));
    const uint32_t rank = r.U32();
    Shape shape(rank);
    for (auto &d : shape) d = r.U64();
    const size_t n = NumElements(shape);
    r.Need(n * 8);
    std::vector<double> data(n);
    for (auto &v : data) v = r.F64();
    ckpt.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  if (!r.done()) throw FormatError("checkpoint: trailing bytes");
  return ckpt;
}

void SaveCheckpoint(const Checkpoint &ckpt, const std::filesystem::path &path) {
  WriteFileAtomic(path, SerializeCheckpoint(ckpt));
}

Checkpoint LoadCheckpoint(const std::filesystem::path &path) {
  return DeserializeCheckpoint(ReadFileBytes(path));
}

Checkpoint ModelToCheckpoint(const Model &model) {
  Checkpoint ckpt;
  ckpt.metadata["model"] = ToJson(model.config());
  for (const auto &p : model.params()) ckpt.tensors.emplace_back(p.name, p.value);
  for (const auto &b : model.buffers()) ckpt.tensors.emplace_back(b.name, b.value);
  return ckpt;
}

Model ModelFromCheckpoint(const Checkpoint &ckpt) {
  if (!ckpt.metadata.contains("model")) throw FormatError("checkpoint: no model config");
  Model model(ModelConfigFromJson(ckpt.metadata.at("model")));
  auto load = [&](Parameter &p) {
    const Tensor &t = ckpt.Get(p.name);
    if (t.shape() != p.value.shape())
      throw FormatError("checkpoint: tensor '" + p.name + "' has shape " +
                        ShapeToString(t.shape()) + ", expected " +
                        ShapeToString(p.value.shape()));
    p.value = t;
  };
  for (auto &p : model.params()) load(p);
  for (auto &b : model.buffers()) load(b);
  return model;
}

}  // namespace speechreg
