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

#ifndef VRU_UNCERTAINTY_ENSEMBLE_HPP_
#define VRU_UNCERTAINTY_ENSEMBLE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace vru::uncertainty
{

/// N sampled frame-wise predictions of one sequence. Only the interaction-class
/// probability is stored; the other class is its complement.
struct PredictionEnsemble
{
  std::string id;
  /// N x T, row s is sample s.
  Eigen::MatrixXd interaction;
  /// T entries, 1 for real frames.
  std::vector<std::uint8_t> valid;

  int samples() const { return static_cast<int>(interaction.rows()); }
  int steps() const { return static_cast<int>(interaction.cols()); }
  /// Frame-wise mean over samples.
  Eigen::RowVectorXd mean() const { return interaction.colwise().mean(); }
  /// Frame-wise population standard deviation over samples.
  Eigen::RowVectorXd stddev() const
  {
    const Eigen::RowVectorXd m = mean();
    return ((interaction.rowwise() - m).array().square().colwise().mean()).sqrt().matrix();
  }
};

}  // namespace vru::uncertainty

#endif  // VRU_UNCERTAINTY_ENSEMBLE_HPP_
