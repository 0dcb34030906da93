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

#ifndef VRU_MODEL_TRAINER_HPP_
#define VRU_MODEL_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "vru/ingest/source.hpp"
#include "vru/model/adam.hpp"
#include "vru/model/batching.hpp"
#include "vru/model/network.hpp"

namespace vru::model
{

struct TrainConfig
{
  int epochs{50};
  int batch_size{32};
  AdamConfig adam;
  ParsingConfig parsing;
  std::uint64_t seed{1};
  /// Sequences loaded per shuffling group; bounds memory when the source streams from disk.
  int group_sequences{64};
  /// Where a state dump goes if the loss diverges (no dump when empty).
  std::filesystem::path dump_dir;

  void validate() const;
  std::map<std::string, std::string> to_map() const;
  /// Keys absent from `kv` keep their defaults.
  static TrainConfig from_map(const std::map<std::string, std::string> & kv);
};

struct EpochRecord
{
  int epoch{0};
  /// Means over the epoch's training steps.
  double kl{0.0};
  double recon{0.0};
  double total{0.0};
  /// Validation ELBO with fixed noise, NaN without a validation set.
  double val_total{0.0};
};

struct TrainState
{
  std::unique_ptr<SeqModel> model;
  Adam optimizer;
  TrainConfig train_config;
  int epoch{0};
  std::uint64_t seed{0};
  /// One entry per optimizer step.
  std::vector<ElboTerms> step_losses;
  std::vector<EpochRecord> epochs;
};

/// Fresh model and optimizer; parameter initialization is seeded by `tc.seed`.
TrainState init_state(const ModelConfig & mc, const TrainConfig & tc);

using EpochCallback = std::function<void(const EpochRecord &)>;

/// Trains from `state.epoch` up to `state.train_config.epochs`. Throws TrainingError
/// (after dumping the state) when the loss turns non-finite.
void train_epochs(TrainState & state, const ingest::SequenceSource & train, const ingest::SequenceSource * val,
                  const EpochCallback & on_epoch = {});

TrainState train(const ingest::SequenceSource & train, const ingest::SequenceSource * val, const ModelConfig & mc,
                 const TrainConfig & tc, const EpochCallback & on_epoch = {});

/// Mean ELBO over all units of `source` in eval mode, with noise seeded by `seed`.
double evaluate_loss(SeqModel & model, const ingest::SequenceSource & source, const ParsingConfig & parsing,
                     int batch_size, std::uint64_t seed);

/// epoch,kl,recon,total,val_total
void write_loss_csv(const std::filesystem::path & path, const std::vector<EpochRecord> & epochs);

}  // namespace vru::model

#endif  // VRU_MODEL_TRAINER_HPP_
