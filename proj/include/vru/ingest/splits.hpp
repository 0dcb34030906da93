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

#ifndef VRU_INGEST_SPLITS_HPP_
#define VRU_INGEST_SPLITS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vru/ingest/sequence.hpp"

namespace vru::ingest
{

struct SplitConfig
{
  /// Fraction of the balanced per-class pool used for train+validation; the rest is test.
  double train_ratio{0.7};
  /// Fraction of train+validation carved out as validation.
  double val_fraction{0.2};
  std::uint64_t seed{0};
  /// Sequences longer than this are excluded before balancing (none when unset).
  std::optional<int> max_length;
};

/// Per-class counts, indexed by the Interaction value.
using ClassCounts = std::array<int, 2>;

struct DatasetSplit
{
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  ClassCounts train_counts{};
  ClassCounts validation_counts{};
  ClassCounts test_counts{};
  std::uint64_t seed{0};
  int excluded_too_long{0};
  int dropped_for_balance{0};
  bool operator==(const DatasetSplit &) const = default;
};

/// Per-class sizes under the floor rounding policy: test = floor(n * (1 - train_ratio)),
/// validation = floor((n - test) * val_fraction), train takes the remainder.
struct SplitSizes
{
  int train{0};
  int validation{0};
  int test{0};
};
SplitSizes split_sizes(int per_class, double train_ratio, double val_fraction);

/// Length filter, class balancing by seeded down-sampling of the larger class, then a
/// seeded per-class partition. Throws DataError when a class is empty after filtering.
DatasetSplit build_splits(std::span<const SequenceInfo> pool, const SplitConfig & cfg);

void write_split_manifest(const std::filesystem::path & path, const DatasetSplit & split);
DatasetSplit read_split_manifest(const std::filesystem::path & path);

}  // namespace vru::ingest

#endif  // VRU_INGEST_SPLITS_HPP_
