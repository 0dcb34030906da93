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

#ifndef VRU_UNCERTAINTY_STATS_HPP_
#define VRU_UNCERTAINTY_STATS_HPP_

#include <span>

namespace vru::uncertainty
{

struct MannWhitneyResult
{
  /// U statistic of the first sample (pairs where a > b, ties count one half).
  double u{0.0};
  /// Normal-approximation z score with tie-corrected variance, no continuity correction.
  double z{0.0};
  /// One-sided p for "a tends to exceed b".
  double p_greater{1.0};
  double p_two_sided{1.0};
};

/// Throws DataError when either sample is empty.
MannWhitneyResult mann_whitney(std::span<const double> a, std::span<const double> b);

}  // namespace vru::uncertainty

#endif  // VRU_UNCERTAINTY_STATS_HPP_
