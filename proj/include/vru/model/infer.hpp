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

#ifndef VRU_MODEL_INFER_HPP_
#define VRU_MODEL_INFER_HPP_

#include <cstdint>
#include <string_view>

#include "vru/ingest/sequence.hpp"
#include "vru/model/batching.hpp"
#include "vru/model/network.hpp"
#include "vru/uncertainty/ensemble.hpp"

namespace vru::model
{

struct InferConfig
{
  /// Number of latent samples N. The s2s baseline always yields a single sample.
  int samples{100};
  std::uint64_t seed{0};
  /// Use z = 0 (the prior mean) instead of random draws.
  bool zero_noise{false};
  /// Upper bound on decoder items (windows x samples) per pass.
  int max_items{512};
};

/// Frame-wise predictions for one sequence. Every window (or the padded sequence) is
/// decoded with its own independent z ~ N(0, I) per sample; window outputs are stitched
/// back onto the timeline, a frame taking the prediction of the first window covering it.
/// The latent draws depend only on (cfg.seed, sequence id), so results do not depend on
/// evaluation order.
uncertainty::PredictionEnsemble infer(SeqModel & model, const ingest::TurningSequence & seq,
                                      const ParsingConfig & parsing, const InferConfig & cfg);

/// 64-bit FNV-1a; stable across platforms, used to derive per-sequence seeds.
std::uint64_t fnv1a(std::string_view s);

}  // namespace vru::model

#endif  // VRU_MODEL_INFER_HPP_
