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

#ifndef VRU_EVAL_METRICS_HPP_
#define VRU_EVAL_METRICS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vru/sim/scenario.hpp"
#include "vru/uncertainty/ensemble.hpp"

namespace vru::eval
{

using sim::Interaction;

/// Majority vote over valid frames. `scores` is T x 2 with columns (non-interaction,
/// interaction); each valid frame votes for its larger column. Ties, per frame or
/// between the vote counts, go to interaction. Throws DataError without valid frames.
Interaction vote(const Eigen::MatrixXd & scores, std::span<const std::uint8_t> valid);

/// Averages the ensemble frame-wise, then votes.
Interaction vote(const uncertainty::PredictionEnsemble & ens);

struct ConfusionMatrix
{
  long long tp{0};
  long long tn{0};
  long long fp{0};
  long long fn{0};
  long long total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionMatrix &) const = default;
};

/// Interaction is the positive class. Throws DataError on a length mismatch.
ConfusionMatrix confusion(std::span<const Interaction> predictions, std::span<const Interaction> truths);

struct MetricsReport
{
  double accuracy{0.0};
  /// NaN when undefined (no positive predictions / no positive truths).
  double precision{0.0};
  double recall{0.0};
  /// 0 when precision or recall is undefined or both are 0.
  double f1{0.0};
};

/// Throws DataError for an empty matrix.
MetricsReport metrics(const ConfusionMatrix & cm);

/// Mean and sample standard deviation over repeated evaluations; std is empty for a
/// single run.
struct MetricsSummary
{
  MetricsReport mean;
  std::optional<MetricsReport> stddev;
  int runs{0};
};

MetricsSummary summarize(std::span<const MetricsReport> runs);

/// "0.961" or "0.961 ± 0.004"; undefined values print as "n/a".
std::string format_value(double mean, std::optional<double> stddev);

struct MetricsRow
{
  std::string model;
  std::string parsing;
  MetricsSummary summary;
};

/// model,parsing,runs,accuracy,accuracy_std,precision,precision_std,recall,recall_std,f1,f1_std
void write_metrics_csv(const std::filesystem::path & path, std::span<const MetricsRow> rows);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path & path);

/// Fixed-width table with Accuracy, Precision, Recall and F1 columns.
std::string format_table(std::span<const MetricsRow> rows);

/// run,tp,tn,fp,fn,accuracy,precision,recall,f1
void write_runs_csv(const std::filesystem::path & path, std::span<const ConfusionMatrix> runs);

}  // namespace vru::eval

#endif  // VRU_EVAL_METRICS_HPP_
