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

#ifndef VRU_INGEST_SEQUENCE_HPP_
#define VRU_INGEST_SEQUENCE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "vru/core/frame.hpp"
#include "vru/sim/render.hpp"
#include "vru/sim/scenario.hpp"

namespace vru::ingest
{

/// Per-sequence metadata that travels without the frames.
struct SequenceInfo
{
  std::string id;
  sim::InteractionLabel label;
  int length{0};
  double frame_rate{12.5};
  std::uint64_t seed{0};
  bool ambiguous{false};
  sim::Cue cue{sim::Cue::both};
  bool operator==(const SequenceInfo &) const = default;
};

/// One vehicle-turning episode with aligned object and flow streams.
struct TurningSequence
{
  SequenceInfo info;
  std::vector<ObjectFrame> object_frames;
  std::vector<FlowFrame> flow_frames;

  int length() const { return static_cast<int>(object_frames.size()); }
  int width() const { return object_frames.empty() ? 0 : object_frames.front().width; }
  int height() const { return object_frames.empty() ? 0 : object_frames.front().height; }
  bool operator==(const TurningSequence &) const = default;
};

/// Throws DataError unless both streams have the same nonzero length and consistent shapes.
void check_consistent(const TurningSequence & seq);

/// Renders a simulated scenario into model-ready frames: object frames pass through the
/// lane filter, single-cue scenes have the other modality zeroed, and the label comes
/// from `label_scenario`.
TurningSequence make_sequence(const sim::Scenario & scenario, const std::string & id,
                              const sim::RenderConfig & render = {}, const sim::LabelRule & rule = {});

/// Keeps every `factor`-th frame (indices 0, factor, 2*factor, ...) of both streams and
/// divides the frame rate accordingly.
TurningSequence align_rates(const TurningSequence & seq, int factor);

}  // namespace vru::ingest

#endif  // VRU_INGEST_SEQUENCE_HPP_
