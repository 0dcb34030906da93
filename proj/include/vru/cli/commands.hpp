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

#ifndef VRU_CLI_COMMANDS_HPP_
#define VRU_CLI_COMMANDS_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vru/cli/config.hpp"
#include "vru/eval/metrics.hpp"
#include "vru/ingest/source.hpp"
#include "vru/ingest/splits.hpp"
#include "vru/model/trainer.hpp"
#include "vru/uncertainty/kde.hpp"

namespace vru::cli
{

namespace fs = std::filesystem;

/// `cfg.run_dir` when set, otherwise a fresh `<output root>/<YYYYmmdd-HHMMSS>-<command>`
/// directory. The resolved configuration is echoed to `config.txt` inside it.
fs::path make_run_dir(const ExperimentConfig & cfg, std::string_view command);

/// Name of the split manifest stored next to a generated dataset.
inline constexpr const char * kSplitFile = "splits.json";

struct GenerateResult
{
  fs::path dataset;
  int sequences{0};
  ingest::DatasetSplit split;
};

/// Simulates n_per_class interaction and n_per_class non-interaction scenes into a
/// container at `cfg.data_dir` (or `<run_dir>/dataset`) and writes the split manifest.
/// The output depends only on the configuration. Throws DataError for n_per_class = 0.
GenerateResult cmd_generate(const ExperimentConfig & cfg, const fs::path & run_dir);

struct TrainResult
{
  fs::path checkpoint;
  std::vector<model::EpochRecord> epochs;
};

/// Trains on the train split of `cfg.data_dir`, validating on its validation split, and
/// writes `model.ckpt` and `loss.csv` into `run_dir`.
TrainResult cmd_train(const ExperimentConfig & cfg, const fs::path & run_dir,
                      const model::EpochCallback & on_epoch = {});

struct EvalOutcome
{
  std::string model_tag;
  std::string parsing;
  std::vector<ingest::SequenceInfo> infos;
  /// One confusion matrix per repeated sampled evaluation.
  std::vector<eval::ConfusionMatrix> runs;
  eval::MetricsSummary summary;
  /// Ensembles, votes and uncertainty of the first repeat.
  std::vector<uncertainty::PredictionEnsemble> ensembles;
  std::vector<sim::Interaction> predictions;
  std::vector<uncertainty::UncertaintyScore> gamma;
};

/// Repeated sampled evaluation over every sequence of `test`. The s2s baseline is
/// deterministic, so it is evaluated once.
EvalOutcome evaluate(model::SeqModel & model, const ingest::SequenceSource & test,
                     const model::ParsingConfig & parsing, const EvalConfig & cfg);

/// metrics.csv, runs.csv, gamma.csv, ensembles.csv and table.txt.
void write_eval_artifacts(const fs::path & dir, const EvalOutcome & outcome);

/// Evaluates a checkpoint on the test split of `cfg.data_dir`.
EvalOutcome cmd_eval(const ExperimentConfig & cfg, const fs::path & checkpoint, const fs::path & run_dir);

struct AblationResult
{
  std::vector<eval::MetricsRow> rows;
  /// "<row> <parsing>: <message>" for every cell that failed.
  std::vector<std::string> failures;
};

/// Trains and evaluates the five ablation rows under both parsing modes, one
/// sub-directory per cell, and writes the grid to metrics.csv and table.txt. A failing
/// cell is recorded in failures.json without stopping the others. Cells run on up to
/// `cfg.threads` worker threads; each is seeded from the configuration alone.
AblationResult cmd_ablate(const ExperimentConfig & cfg, const fs::path & run_dir);

/// Evaluates a checkpoint on another dataset after resizing and/or mirroring its
/// frames. Uses that dataset's test split when it has one, every sequence otherwise.
/// Throws DimensionError when the transformed frames do not match the model.
EvalOutcome cmd_crosseval(const ExperimentConfig & cfg, const fs::path & checkpoint, const fs::path & dataset,
                          const ingest::FrameTransform & transform, const fs::path & run_dir);

}  // namespace vru::cli

#endif  // VRU_CLI_COMMANDS_HPP_
