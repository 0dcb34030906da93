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

#include "vru/model/loss.hpp"

#include <algorithm>
#include <cmath>

#include "vru/core/error.hpp"

namespace vru::model
{

Mat sample_latent(const GaussianLatent & g, const Mat & noise)
{
  if (noise.rows() != g.mean.rows() || noise.cols() != g.mean.cols()) {
    throw DimensionError("sample_latent: noise shape does not match the latent");
  }
  return (g.mean.array() + (0.5 * g.log_var.array()).exp() * noise.array()).matrix();
}

Vec kl_divergence(const GaussianLatent & g)
{
  return 0.5 * (g.log_var.array().exp() + g.mean.array().square() - 1.0 - g.log_var.array()).rowwise().sum();
}

double binary_cross_entropy(double y, double p)
{
  const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

ElboTerms elbo_loss(const Mat & targets, const Mat & probs, const GaussianLatent * latent, const Mat & mask,
                    double kl_weight, ElboGrads * grads)
{
  const Eigen::Index b = mask.rows();
  const Eigen::Index len = mask.cols();
  if (probs.rows() != b * len || probs.cols() != 2 || targets.rows() != probs.rows()) {
    throw DimensionError("elbo_loss: prediction/target/mask shapes disagree");
  }
  if (b == 0) {
    throw DataError("elbo_loss: empty batch");
  }
  ElboTerms out;
  Vec valid = mask.rowwise().sum();
  if (grads != nullptr) {
    grads->dlogits = Mat::Zero(probs.rows(), 2);
  }
  for (Eigen::Index i = 0; i < b; ++i) {
    if (valid(i) <= 0.0) {
      throw DataError("elbo_loss: batch item without valid steps");
    }
    double sum = 0.0;
    for (Eigen::Index t = 0; t < len; ++t) {
      if (mask(i, t) == 0.0) {
        continue;
      }
      const Eigen::Index r = t * b + i;
      const double p = probs(r, 1);
      if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        throw NumericError("elbo_loss: probability outside [0, 1]");
      }
      const double y = targets(r, 0);
      sum += binary_cross_entropy(y, p);
      if (grads != nullptr && p > kProbClamp && p < 1.0 - kProbClamp) {
        // For a two-class softmax, BCE on p1 has dL/dlogit1 = p1 - y and dL/dlogit0 = -(p1 - y).
        const double g = (p - y) / (valid(i) * static_cast<double>(b));
        grads->dlogits(r, 1) = g;
        grads->dlogits(r, 0) = -g;
      }
    }
    out.recon += sum / valid(i);
  }
  out.recon /= static_cast<double>(b);
  if (latent != nullptr) {
    out.kl = kl_divergence(*latent).mean();
    if (grads != nullptr) {
      const double s = kl_weight / static_cast<double>(b);
      grads->dmean = latent->mean * s;
      grads->dlog_var = ((latent->log_var.array().exp() - 1.0) * (0.5 * s)).matrix();
    }
  }
  out.total = out.recon + kl_weight * out.kl;
  if (!std::isfinite(out.total)) {
    throw NumericError("elbo_loss: non-finite loss");
  }
  return out;
}

}  // namespace vru::model
