// Copyright 2026 The vrudetect Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VRU_MODEL_LAYERS_HPP_
#define VRU_MODEL_LAYERS_HPP_

// Hand-written layers with explicit backward passes. Each layer caches what its backward
// pass needs from the most recent forward call; gradients accumulate into Param::grad.

#include <string>
#include <vector>

#include "vru/model/tensor.hpp"

namespace vru::model
{

/// y = x W + b, W is in x out.
class Linear
{
public:
  Linear() = default;
  Linear(ParamSet & params, const std::string & name, int in, int out, Rng & rng);
  Mat forward(const Mat & x);
  /// Accumulates parameter gradients; returns dL/dx unless need_dx is false.
  Mat backward(const Mat & dy, bool need_dx = true);
  int in() const { return in_; }
  int out() const { return out_; }

private:
  int in_{0};
  int out_{0};
  Param * w_{nullptr};
  Param * b_{nullptr};
  Mat x_;
};

void relu_inplace(Mat & x);
void relu_inplace(RMat & x);
/// Gradient through a ReLU given its output.
Mat relu_backward(const Mat & dy, const Mat & y);
RMat relu_backward(const RMat & dy, const RMat & y);

/// Row-wise softmax.
Mat softmax_rows(const Mat & logits);

struct MapShape
{
  int h{0};
  int w{0};
  int c{0};
  int size() const { return h * w * c; }
  bool operator==(const MapShape &) const = default;
};

/// 2D convolution with TensorFlow-style "same" padding: out = ceil(in / stride), the
/// total padding split with the smaller half on top/left.
class Conv2D
{
public:
  Conv2D() = default;
  Conv2D(ParamSet & params, const std::string & name, MapShape in, int filters, int kernel, int stride,
         Rng & rng);
  MapShape in_shape() const { return in_; }
  MapShape out_shape() const { return out_; }

  /// x has one frame per row. With `sparse` set the layer scatters each nonzero input
  /// value into the outputs it reaches instead of forming dense patches, which is much
  /// cheaper on box rasters. A sparse layer must be the input layer, since no input
  /// gradient is produced.
  RMat forward(const RMat & x, bool sparse = false);
  /// Needs the same `x` that was passed to forward. Returns dL/dx unless the forward
  /// pass was sparse.
  RMat backward(const RMat & x, const RMat & dy);

private:
  void patches(const double * frame, const std::vector<int> & positions, RMat & out) const;
  // Calls fn(output position, patch row) for every output reached by input pixel (iy, ix).
  template <typename Fn>
  void for_each_reach(int iy, int ix, Fn && fn) const;

  MapShape in_;
  MapShape out_;
  int kernel_{1};
  int stride_{1};
  int pad_top_{0};
  int pad_left_{0};
  Param * w_{nullptr};  // (kernel * kernel * in.c) x filters, patch order (ky, kx, c)
  Param * b_{nullptr};
  bool sparse_{false};
};

/// 2x2 max pooling, stride 2, partial windows at the border are kept (ceil mode).
class MaxPool2
{
public:
  MaxPool2() = default;
  explicit MaxPool2(MapShape in);
  MapShape out_shape() const { return out_; }
  RMat forward(const RMat & x);
  RMat backward(const RMat & dy) const;

private:
  MapShape in_;
  MapShape out_;
  std::vector<int> argmax_;
  int rows_{0};
};

/// Per-channel batch normalization over all frames and positions of the batch.
class BatchNorm
{
public:
  BatchNorm() = default;
  BatchNorm(ParamSet & params, const std::string & name, MapShape shape, double momentum, double eps);
  RMat forward(const RMat & x, bool training);
  RMat backward(const RMat & dy);

private:
  MapShape shape_;
  double momentum_{0.99};
  double eps_{1e-3};
  Param * gamma_{nullptr};
  Param * beta_{nullptr};
  Param * running_mean_{nullptr};
  Param * running_var_{nullptr};
  bool training_{false};
  RMat xhat_;
  RowVec inv_std_;
};

/// LSTM over time-major sequences with gate order (i, f, g, o). At masked steps the
/// hidden and cell states are carried over unchanged, so the final state equals the
/// state after the last valid step.
class Lstm
{
public:
  Lstm() = default;
  Lstm(ParamSet & params, const std::string & name, int in, int hidden, Rng & rng);
  /// xs is (L * B) x in, mask is B x L; returns (L * B) x hidden.
  Mat forward(const Mat & xs, const Mat & mask);
  Mat backward(const Mat & dhs);
  int hidden() const { return hidden_; }

private:
  int in_{0};
  int hidden_{0};
  Param * wx_{nullptr};
  Param * wh_{nullptr};
  Param * b_{nullptr};
  Mat xs_;
  Mat mask_;
  Mat gates_;  // (L * B) x 4H, post-activation
  Mat c_;      // (L * B) x H cell states
  Mat h_;      // (L * B) x H hidden states
};

/// Single-head scaled dot-product self-attention over the time axis, with bias-free
/// Q/K/V projections of the input width. Masked steps are excluded as keys.
class SelfAttention
{
public:
  SelfAttention() = default;
  SelfAttention(ParamSet & params, const std::string & name, int dim, Rng & rng);
  Mat forward(const Mat & xs, const Mat & mask);
  Mat backward(const Mat & dys);
  /// Attention weights of the last forward call, one L x L matrix per batch item.
  const std::vector<Mat> & weights() const { return attn_; }

private:
  int dim_{0};
  Param * wq_{nullptr};
  Param * wk_{nullptr};
  Param * wv_{nullptr};
  Mat xs_;
  Mat mask_;
  Mat q_;
  Mat k_;
  Mat v_;
  std::vector<Mat> attn_;
};

/// Rows t * B + b of a time-major sequence for one batch item b, as an L x F matrix.
Mat gather_item(const Mat & seq, int b, int batch);
void scatter_item(Mat & seq, const Mat & item, int b, int batch);

}  // namespace vru::model

#endif  // VRU_MODEL_LAYERS_HPP_
