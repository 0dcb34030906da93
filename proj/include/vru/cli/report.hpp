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

#ifndef VRU_CLI_REPORT_HPP_
#define VRU_CLI_REPORT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "vru/uncertainty/ensemble.hpp"

namespace vru::cli
{

/// A CSV file as strings; no quoting (none of the artifacts need it).
struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// Index of a header column; throws DataError when absent.
  std::size_t column(const std::string & name) const;
};

CsvTable read_csv(const std::filesystem::path & path);
void write_csv(const std::filesystem::path & path, const CsvTable & table);

/// Reads the ensembles.csv written by an evaluation.
std::vector<uncertainty::PredictionEnsemble> read_ensembles_csv(const std::filesystem::path & path);

/// Renders the report of a run directory into `<run_dir>/report`. Every evaluation
/// directory (the run itself or its immediate sub-directories holding metrics.csv and
/// ensembles.csv) gets report/<name>/ with:
///
///   curves.csv      id,step,mean,lower,upper over valid steps (mean +- 1 std of the samples)
///   gamma_box.csv   group,n,min,q1,median,q3,max,mean for all / clear / ambiguous and per label
///   confusion.csv   truth,prediction,count summed over the repeated runs
///   *.svg           figures drawn from those CSVs only
///
/// plus report.md with the metric tables. Output depends only on the artifacts, so
/// re-running is idempotent. Throws DataError when no evaluation artifacts exist.
std::vector<std::filesystem::path> cmd_report(const std::filesystem::path & run_dir);

}  // namespace vru::cli

#endif  // VRU_CLI_REPORT_HPP_
