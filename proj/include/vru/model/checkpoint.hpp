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

#ifndef VRU_MODEL_CHECKPOINT_HPP_
#define VRU_MODEL_CHECKPOINT_HPP_

#include <filesystem>

#include "vru/model/trainer.hpp"

namespace vru::model
{

/// Format version written into every checkpoint.
inline constexpr int kCheckpointVersion = 1;

/// Binary little-endian container: magic, version, a JSON header echoing the model and
/// training configs plus seed, epoch and optimizer step, then named float64 tensors
/// (parameters, BatchNorm buffers, Adam moments, loss history). Nothing time-dependent
/// is stored, so identical training runs give identical files.
void write_checkpoint(const std::filesystem::path & path, const TrainState & state);

/// Throws IoError for unreadable files and DataError for malformed or mismatched content.
TrainState read_checkpoint(const std::filesystem::path & path);

}  // namespace vru::model

#endif  // VRU_MODEL_CHECKPOINT_HPP_
