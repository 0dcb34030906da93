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

#ifndef VRU_MODEL_ADAM_HPP_
#define VRU_MODEL_ADAM_HPP_

#include <vector>

#include "vru/model/tensor.hpp"

namespace vru::model
{

struct AdamConfig
{
  double learning_rate{1e-4};
  double beta1{0.9};
  double beta2{0.999};
  double epsilon{1e-7};
  bool operator==(const AdamConfig &) const = default;
};

/// Adam with bias correction folded into the step size. Moments are kept per trainable
/// parameter, in ParamSet order.
class Adam
{
public:
  Adam() = default;
  Adam(const AdamConfig & cfg, ParamSet & params);
  /// One update from the accumulated gradients.
  void step(ParamSet & params);
  long long steps() const { return t_; }
  const AdamConfig & config() const { return cfg_; }
  std::vector<Mat> & first_moments() { return m_; }
  std::vector<Mat> & second_moments() { return v_; }
  const std::vector<Mat> & first_moments() const { return m_; }
  const std::vector<Mat> & second_moments() const { return v_; }
  void set_steps(long long t) { t_ = t; }

private:
  AdamConfig cfg_;
  long long t_{0};
  std::vector<Mat> m_;
  std::vector<Mat> v_;
};

}  // namespace vru::model

#endif  // VRU_MODEL_ADAM_HPP_
