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

#include "vru/model/tensor.hpp"

#include <cmath>
#include <random>

#include "vru/core/error.hpp"

namespace vru::model
{

Param & ParamSet::add(const std::string & name, Mat init, bool trainable)
{
  if (find(name) != nullptr) {
    throw ConfigError("duplicate parameter name '" + name + "'");
  }
  Param p;
  p.name = name;
  p.grad = Mat::Zero(init.rows(), init.cols());
  p.value = std::move(init);
  p.trainable = trainable;
  params_.push_back(std::move(p));
  return params_.back();
}

std::vector<Param *> ParamSet::all()
{
  std::vector<Param *> out;
  for (auto & p : params_) {
    out.push_back(&p);
  }
  return out;
}

std::vector<const Param *> ParamSet::all() const
{
  std::vector<const Param *> out;
  for (const auto & p : params_) {
    out.push_back(&p);
  }
  return out;
}

std::vector<Param *> ParamSet::trainable()
{
  std::vector<Param *> out;
  for (auto & p : params_) {
    if (p.trainable) {
      out.push_back(&p);
    }
  }
  return out;
}

Param * ParamSet::find(const std::string & name)
{
  for (auto & p : params_) {
    if (p.name == name) {
      return &p;
    }
  }
  return nullptr;
}

void ParamSet::zero_grad()
{
  for (auto & p : params_) {
    p.grad.setZero();
  }
}

std::size_t ParamSet::scalar_count() const
{
  std::size_t n = 0;
  for (const auto & p : params_) {
    if (p.trainable) {
      n += static_cast<std::size_t>(p.value.size());
    }
  }
  return n;
}

Mat glorot_uniform(int rows, int cols, double fan_in, double fan_out, Rng & rng)
{
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> u(-limit, limit);
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      m(i, j) = u(rng);
    }
  }
  return m;
}

Mat orthogonal(int rows, int cols, Rng & rng)
{
  std::normal_distribution<double> n(0.0, 1.0);
  const int big = std::max(rows, cols);
  const int small = std::min(rows, cols);
  Mat a(big, small);
  for (int j = 0; j < small; ++j) {
    for (int i = 0; i < big; ++i) {
      a(i, j) = n(rng);
    }
  }
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(big, small);
  // Sign fix so the result is uniformly distributed over orthogonal matrices.
  const Mat r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
  for (int j = 0; j < small; ++j) {
    if (r(j, j) < 0) {
      q.col(j) *= -1.0;
    }
  }
  return rows >= cols ? q : Mat(q.transpose());
}

}  // namespace vru::model
