// speechreg/layers.h

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

// Layer primitives with hand-derived gradients. Convolutions take a single
// utterance laid out as [channels, freq, time]; sequence layers take [time,
// features]. Backward functions accumulate into weight gradients (+=) and
// overwrite input gradients.

#ifndef SPEECHREG_LAYERS_H_
#define SPEECHREG_LAYERS_H_

#include <vector>

#include "speechreg/tensor.h"

namespace speechreg {

struct ConvGeometry {
  size_t stride_f = 1, stride_t = 1;
  size_t pad_f = 0, pad_t = 0;  // zeros added on both sides
};

/// Output extent of a strided, padded correlation; throws ArgumentError when
/// the padded input is smaller than the filter.
size_t ConvOutputSize(size_t in, size_t filter, size_t stride, size_t pad);

/// Dense correlation. x [Cin, F, T], w [Cout, Cin, kf, kt], b [Cout] or null.
Tensor Conv2dForward(const Tensor &x, const Tensor &w, const Tensor *b, const ConvGeometry &g);
/// dx may be null when the input gradient is not needed.
void Conv2dBackward(const Tensor &x, const Tensor &w, const Tensor &dy, const ConvGeometry &g,
                    Tensor *dx, Tensor *dw, Tensor *db);

/// Channel-wise correlation. x [C, F, T], w [C, kf, kt]; no bias.
Tensor DepthwiseConv2dForward(const Tensor &x, const Tensor &w, const ConvGeometry &g);
void DepthwiseConv2dBackward(const Tensor &x, const Tensor &w, const Tensor &dy,
                             const ConvGeometry &g, Tensor *dx, Tensor *dw);

/// 1x1 channel mixing. x [Cin, F, T], w [Cout, Cin], b [Cout] or null.
Tensor PointwiseConvForward(const Tensor &x, const Tensor &w, const Tensor *b);
void PointwiseConvBackward(const Tensor &x, const Tensor &w, const Tensor &dy, Tensor *dx,
                           Tensor *dw, Tensor *db);

/// Depthwise (carrying the stride) followed by a stride-one pointwise conv.
Tensor SepConv2dForward(const Tensor &x, const Tensor &w_depthwise, const Tensor &w_pointwise,
                        const Tensor *b, const ConvGeometry &g);

/// Trainable parameters of a separable conv: C_in*kf*kt + C_in*C_out + C_out.
size_t SepConvParamCount(size_t in_channels, size_t out_channels, size_t kf, size_t kt);
/// Dense equivalent: C_in*C_out*kf*kt + C_out.
size_t DenseConvParamCount(size_t in_channels, size_t out_channels, size_t kf, size_t kt);

/// y = x w^T + b. x [N, in], w [out, in], b [out] or null.
Tensor LinearForward(const Tensor &x, const Tensor &w, const Tensor *b);
void LinearBackward(const Tensor &x, const Tensor &w, const Tensor &dy, Tensor *dx, Tensor *dw,
                    Tensor *db);

Tensor Relu(const Tensor &x);
/// Uses the forward output y; the subgradient at 0 is 0.
Tensor ReluBackward(const Tensor &y, const Tensor &dy);

// Batch normalization over a batch of tensors. kChannelFirst: axis 0 is the
// feature, statistics pool every other position of every tensor.
// kFeatureLast: [N, D] rows are samples, columns are features.
enum class BnLayout { kChannelFirst, kFeatureLast };

inline constexpr double kBnEpsilon = 1e-5;
inline constexpr double kBnMomentum = 0.9;

struct BatchNormCache {
  std::vector<Tensor> xhat;
  std::vector<double> inv_std;
  bool train = true;
};

/// Train mode normalizes with batch statistics and folds them into the
/// running estimates (momentum 0.9, unbiased variance); throws ArgumentError
/// if fewer than 2 values per feature. Eval mode uses the running estimates.
std::vector<Tensor> BatchNormForward(const std::vector<const Tensor *> &xs, BnLayout layout,
                                     const Tensor &gamma, const Tensor &beta,
                                     Tensor &running_mean, Tensor &running_var, bool train,
                                     BatchNormCache *cache);
std::vector<Tensor> BatchNormBackward(const std::vector<Tensor> &dys, BnLayout layout,
                                      const Tensor &gamma, const BatchNormCache &cache,
                                      Tensor *dgamma, Tensor *dbeta);

// GRU recurrence on precomputed input projections a [T, 3H], gate blocks in
// order (update z, reset r, candidate). u [3H, H].
//   z = sig(a_z + U_z h'), r = sig(a_r + U_r h'),
//   c = tanh(a_c + U_c (r * h')), h = z * h' + (1 - z) * c.
// `reverse` runs from the last frame to the first; outputs stay in input
// time order.
struct GruCache {
  Tensor z, r, c, h;  // [T, H] each, indexed by input time
  bool reverse = false;
};

Tensor GruRecurrenceForward(const Tensor &a, const Tensor &u, bool reverse, GruCache *cache);
void GruRecurrenceBackward(const Tensor &u, const GruCache &cache, const Tensor &dh, Tensor *da,
                           Tensor *du);

/// One direction: x [T, in], w [3H, in], u [3H, H], b [3H]. Returns [T, H].
Tensor GruForward(const Tensor &x, const Tensor &w, const Tensor &u, const Tensor &b,
                  bool reverse);

/// Concatenation [T, 2H] of a forward pass with (w_f, u_f, b_f) and a
/// reversed pass with (w_b, u_b, b_b).
Tensor BiGruForward(const Tensor &x, const Tensor &w_f, const Tensor &u_f, const Tensor &b_f,
                    const Tensor &w_b, const Tensor &u_b, const Tensor &b_b);

}  // namespace speechreg

#endif  // SPEECHREG_LAYERS_H_
