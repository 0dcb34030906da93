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

#ifndef VRU_UNCERTAINTY_KDE_HPP_
#define VRU_UNCERTAINTY_KDE_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vru/uncertainty/ensemble.hpp"

namespace vru::uncertainty
{

inline constexpr double kBandwidthFloor = 1e-3;

/// Gaussian-kernel density estimate (1 / (N h)) sum_i K((query - s_i) / h).
/// Throws ConfigError for h <= 0 and DataError for an empty sample.
double kde_density(std::span<const double> samples, double h, double query);

/// Silverman's rule 1.06 * sd * N^(-1/5) with the sample standard deviation (n - 1),
/// never below `floor`.
double silverman_bandwidth(std::span<const double> samples, double floor = kBandwidthFloor);

/// Log KDE density of the frame-wise mean, per step; NaN at invalid steps. Throws
/// DataError when no step is valid.
Eigen::RowVectorXd step_log_likelihoods(const PredictionEnsemble & ens, double floor = kBandwidthFloor);

/// Affine map of log-likelihoods onto [0, 1], clamped: lower -> 0, upper -> 1.
struct OmegaRule
{
  double lower{0.0};
  double upper{1.0};
  double operator()(double loglik) const;

  /// The largest log density a KDE can reach with bandwidth >= floor, -log(floor sqrt(2 pi));
  /// an ensemble whose samples coincide at every step attains it.
  static double max_log_likelihood(double floor = kBandwidthFloor);
  /// Lower anchor at the smallest valid log-likelihood of the batch, upper anchor at
  /// max_log_likelihood(floor).
  static OmegaRule from_batch(std::span<const Eigen::RowVectorXd> logliks, double floor = kBandwidthFloor);
};

struct UncertaintyScore
{
  /// 1 - mean over valid steps of omega(log-likelihood), in [0, 1].
  double gamma{0.0};
  Eigen::RowVectorXd per_step_loglik;
};

UncertaintyScore uncertainty(const PredictionEnsemble & ens, const OmegaRule & omega, double floor = kBandwidthFloor);

/// Scores a whole evaluation batch with one omega fitted to the batch.
std::vector<UncertaintyScore> uncertainty_batch(std::span<const PredictionEnsemble> batch,
                                                double floor = kBandwidthFloor);

/// id,gamma rows.
void write_gamma_csv(const std::filesystem::path & path, std::span<const PredictionEnsemble> batch,
                     std::span<const UncertaintyScore> scores);

}  // namespace vru::uncertainty

#endif  // VRU_UNCERTAINTY_KDE_HPP_
