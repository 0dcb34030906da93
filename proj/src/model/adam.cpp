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

#include "vru/model/adam.hpp"

#include <cmath>

#include "vru/core/error.hpp"

namespace vru::model
{

Adam::Adam(const AdamConfig & cfg, ParamSet & params) : cfg_(cfg)
{
  if (!(cfg.learning_rate > 0.0) || !(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0) ||
      !(cfg.epsilon > 0.0)) {
    throw ConfigError("invalid Adam hyperparameters");
  }
  for (Param * p : params.trainable()) {
    m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step(ParamSet & params)
{
  const auto ps = params.trainable();
  if (ps.size() != m_.size()) {
    throw DimensionError("Adam: parameter set changed since construction");
  }
  ++t_;
  const double td = static_cast<double>(t_);
  const double lr = cfg_.learning_rate * std::sqrt(1.0 - std::pow(cfg_.beta2, td)) / (1.0 - std::pow(cfg_.beta1, td));
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const Mat & g = ps[i]->grad;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    ps[i]->value.array() -= lr * m_[i].array() / (v_[i].array().sqrt() + cfg_.epsilon);
  }
}

}  // namespace vru::model
