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

#ifndef VRU_MODEL_TENSOR_HPP_
#define VRU_MODEL_TENSOR_HPP_

#include <deque>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vru/core/rng.hpp"

namespace vru::model
{

/// Column-major matrix used for per-step features. Sequences are stored time-major:
/// row t * B + b holds step t of batch item b.
using Mat = Eigen::MatrixXd;
/// Row-major matrix used for feature maps: one frame per row, laid out (y, x, c).
using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;

struct Param
{
  std::string name;
  Mat value;
  Mat grad;
  /// Buffers (BatchNorm running statistics) are checkpointed but never optimized.
  bool trainable{true};
};

/// Owns every tensor of a model. References stay valid because storage is a deque.
class ParamSet
{
public:
  Param & add(const std::string & name, Mat init, bool trainable = true);
  std::vector<Param *> all();
  std::vector<const Param *> all() const;
  std::vector<Param *> trainable();
  Param * find(const std::string & name);
  void zero_grad();
  std::size_t scalar_count() const;

private:
  std::deque<Param> params_;
};

/// Glorot-uniform initialization for a rows x cols kernel with the given fan sizes.
Mat glorot_uniform(int rows, int cols, double fan_in, double fan_out, Rng & rng);
/// Orthogonal initialization (QR of a Gaussian matrix), rows x cols.
Mat orthogonal(int rows, int cols, Rng & rng);

}  // namespace vru::model

#endif  // VRU_MODEL_TENSOR_HPP_
