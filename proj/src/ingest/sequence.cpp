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

#include "vru/ingest/sequence.hpp"

#include <algorithm>
#include <string>

#include "vru/core/error.hpp"

namespace vru::ingest
{

void check_consistent(const TurningSequence & seq)
{
  if (seq.object_frames.empty()) {
    throw DataError("sequence '" + seq.info.id + "' has no frames");
  }
  if (seq.object_frames.size() != seq.flow_frames.size()) {
    throw DataError("sequence '" + seq.info.id + "': object/flow frame counts differ (" +
                    std::to_string(seq.object_frames.size()) + " vs " + std::to_string(seq.flow_frames.size()) +
                    ")");
  }
  const int w = seq.object_frames.front().width;
  const int h = seq.object_frames.front().height;
  for (std::size_t t = 0; t < seq.object_frames.size(); ++t) {
    const auto & o = seq.object_frames[t];
    const auto & f = seq.flow_frames[t];
    if (o.width != w || o.height != h || o.channels != kObjectChannels || f.width != w || f.height != h ||
        f.channels != kFlowChannels) {
      throw DataError("sequence '" + seq.info.id + "': inconsistent frame shape at step " + std::to_string(t));
    }
  }
}

TurningSequence make_sequence(const sim::Scenario & scenario, const std::string & id,
                              const sim::RenderConfig & render, const sim::LabelRule & rule)
{
  TurningSequence seq;
  seq.info.id = id;
  seq.info.label = sim::label_scenario(scenario, rule);
  seq.info.length = scenario.steps;
  seq.info.frame_rate = scenario.step_rate;
  seq.info.seed = scenario.seed;
  seq.info.ambiguous = scenario.ambiguous;
  seq.info.cue = scenario.cue;
  seq.object_frames.reserve(static_cast<std::size_t>(scenario.steps));
  seq.flow_frames.reserve(static_cast<std::size_t>(scenario.steps));
  for (int t = 0; t < scenario.steps; ++t) {
    const auto boxes = sim::frame_boxes(scenario, t);
    auto obj = sim::apply_lane_filter(sim::render_object_frame(scenario, t), boxes, scenario.region_mask);
    auto flow = sim::render_flow_frame(scenario, t, render);
    if (scenario.cue == sim::Cue::motion_only) {
      std::fill(obj.data.begin(), obj.data.end(), std::uint8_t{0});
    } else if (scenario.cue == sim::Cue::occupancy_only) {
      std::fill(flow.data.begin(), flow.data.end(), 0.0f);
    }
    seq.object_frames.push_back(std::move(obj));
    seq.flow_frames.push_back(std::move(flow));
  }
  return seq;
}

TurningSequence align_rates(const TurningSequence & seq, int factor)
{
  if (factor < 1) {
    throw ConfigError("align_rates: factor must be >= 1, got " + std::to_string(factor));
  }
  if (seq.object_frames.size() != seq.flow_frames.size()) {
    throw DataError("align_rates: object/flow frame counts differ");
  }
  TurningSequence out;
  out.info = seq.info;
  for (std::size_t t = 0; t < seq.object_frames.size(); t += static_cast<std::size_t>(factor)) {
    out.object_frames.push_back(seq.object_frames[t]);
    out.flow_frames.push_back(seq.flow_frames[t]);
  }
  out.info.length = out.length();
  out.info.frame_rate = seq.info.frame_rate / factor;
  return out;
}

}  // namespace vru::ingest
