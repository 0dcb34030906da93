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

#ifndef VRU_MODEL_LOSS_HPP_
#define VRU_MODEL_LOSS_HPP_

#include "vru/model/tensor.hpp"

namespace vru::model
{

/// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before the log.
inline constexpr double kProbClamp = 1e-7;

/// Diagonal Gaussian posterior, one row per batch item.
struct GaussianLatent
{
  Mat mean;
  Mat log_var;
};

/// z = mean + exp(0.5 * log_var) * noise, elementwise.
Mat sample_latent(const GaussianLatent & g, const Mat & noise);

/// KL(N(mean, exp(log_var)) || N(0, I)) per row.
Vec kl_divergence(const GaussianLatent & g);

/// -[y log p + (1 - y) log(1 - p)] with p clamped.
double binary_cross_entropy(double y, double p);

struct ElboTerms
{
  double total{0.0};
  double kl{0.0};
  double recon{0.0};
};

struct ElboGrads
{
  /// dL/dlogits of the two-class softmax output, (L * B) x 2.
  Mat dlogits;
  Mat dmean;
  Mat dlog_var;
};

/// Batch ELBO. `targets` holds the per-frame interaction target (0/1) and `probs` the
/// two-class softmax rows, both time-major with (L * B) rows; `mask` is B x L.
/// recon is the masked mean BCE of the interaction probability per item; kl is the
/// closed-form KL per item (zero when `latent` is null); both are averaged over items
/// and total = recon + kl_weight * kl. Gradients are filled in when `grads` is non-null.
ElboTerms elbo_loss(const Mat & targets, const Mat & probs, const GaussianLatent * latent, const Mat & mask,
                    double kl_weight = 1.0, ElboGrads * grads = nullptr);

}  // namespace vru::model

#endif  // VRU_MODEL_LOSS_HPP_
