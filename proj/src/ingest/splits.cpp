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

#include "vru/ingest/splits.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "vru/core/error.hpp"
#include "vru/core/rng.hpp"

namespace vru::ingest
{

SplitSizes split_sizes(int per_class, double train_ratio, double val_fraction)
{
  if (!(train_ratio > 0.0 && train_ratio <= 1.0) || !(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw ConfigError("split ratios out of range");
  }
  SplitSizes s;
  // The small epsilon keeps exact products (e.g. 0.3 * 10) from flooring one short.
  s.test = static_cast<int>(std::floor(per_class * (1.0 - train_ratio) + 1e-9));
  const int trainval = per_class - s.test;
  s.validation = static_cast<int>(std::floor(trainval * val_fraction + 1e-9));
  s.train = trainval - s.validation;
  return s;
}

DatasetSplit build_splits(std::span<const SequenceInfo> pool, const SplitConfig & cfg)
{
  DatasetSplit out;
  out.seed = cfg.seed;
  std::array<std::vector<std::string>, 2> by_class;
  for (const auto & info : pool) {
    if (cfg.max_length && info.length > *cfg.max_length) {
      ++out.excluded_too_long;
      continue;
    }
    by_class[static_cast<int>(info.label.value)].push_back(info.id);
  }
  if (by_class[0].empty() || by_class[1].empty()) {
    throw DataError("build_splits: both classes need at least one sequence (non_interaction=" +
                    std::to_string(by_class[0].size()) + ", interaction=" + std::to_string(by_class[1].size()) +
                    ")");
  }
  const int n = static_cast<int>(std::min(by_class[0].size(), by_class[1].size()));
  const auto sizes = split_sizes(n, cfg.train_ratio, cfg.val_fraction);
  for (int c = 0; c < 2; ++c) {
    auto & ids = by_class[c];
    std::sort(ids.begin(), ids.end());
    Rng rng(derive_seed(cfg.seed, {0x5911u, static_cast<std::uint64_t>(c)}));
    std::shuffle(ids.begin(), ids.end(), rng);
    out.dropped_for_balance += static_cast<int>(ids.size()) - n;
    ids.resize(static_cast<std::size_t>(n));
    auto it = ids.begin();
    out.train.insert(out.train.end(), it, it + sizes.train);
    it += sizes.train;
    out.validation.insert(out.validation.end(), it, it + sizes.validation);
    it += sizes.validation;
    out.test.insert(out.test.end(), it, it + sizes.test);
    out.train_counts[c] = sizes.train;
    out.validation_counts[c] = sizes.validation;
    out.test_counts[c] = sizes.test;
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

void write_split_manifest(const std::filesystem::path & path, const DatasetSplit & split)
{
  nlohmann::json j;
  j["seed"] = split.seed;
  j["train"] = split.train;
  j["validation"] = split.validation;
  j["test"] = split.test;
  j["train_counts"] = split.train_counts;
  j["validation_counts"] = split.validation_counts;
  j["test_counts"] = split.test_counts;
  j["excluded_too_long"] = split.excluded_too_long;
  j["dropped_for_balance"] = split.dropped_for_balance;
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write split manifest " + path.string());
  }
  out << j.dump(2) << "\n";
}

DatasetSplit read_split_manifest(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read split manifest " + path.string());
  }
  try {
    const auto j = nlohmann::json::parse(in);
    DatasetSplit s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.train = j.at("train").get<std::vector<std::string>>();
    s.validation = j.at("validation").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    s.train_counts = j.at("train_counts").get<ClassCounts>();
    s.validation_counts = j.at("validation_counts").get<ClassCounts>();
    s.test_counts = j.at("test_counts").get<ClassCounts>();
    s.excluded_too_long = j.value("excluded_too_long", 0);
    s.dropped_for_balance = j.value("dropped_for_balance", 0);
    return s;
  } catch (const nlohmann::json::exception & e) {
    throw DataError("malformed split manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace vru::ingest
