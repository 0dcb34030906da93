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

#ifndef VRU_INGEST_DETECTIONS_HPP_
#define VRU_INGEST_DETECTIONS_HPP_

// Detection-record ingestion for real extractor outputs. One JSON object per line:
//
//   {"sequence_id": "kow_0012", "frame_idx": 3, "class": "pedestrian", "bbox": [x, y, w, h]}
//
// bbox is normalized to [0, 1] with (x, y) the top-left corner. Flow tensors are read from
// <flow_dir>/<sequence_id>.flow.bin in the container's float32 (y, x, c) layout, one frame
// per object frame. Labels come from a CSV with lines "sequence_id,label".

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "vru/ingest/sequence.hpp"
#include "vru/sim/render.hpp"

namespace vru::ingest
{

struct DetectionRecord
{
  std::string sequence_id;
  int frame_idx{0};
  sim::AgentClass agent_class{sim::AgentClass::pedestrian};
  double x{0.0};
  double y{0.0};
  double w{0.0};
  double h{0.0};
};

/// Accepts the four channel names plus common detector aliases (person, bicycle, car, ...).
sim::AgentClass parse_detector_class(const std::string & name);

std::vector<DetectionRecord> parse_detection_records(std::istream & in);

/// Pixel box of a normalized bbox on a width x height frame.
sim::PixelBox to_pixel_box(const DetectionRecord & r, int width, int height);

/// Rasterizes the records of one sequence (frames 0..max frame_idx) and applies the lane
/// filter with `mask`.
std::vector<ObjectFrame> rasterize_detections(const std::vector<DetectionRecord> & records, int width,
                                              int height, const sim::RegionMask & mask);

std::map<std::string, sim::InteractionLabel> read_label_csv(const std::filesystem::path & path);

/// Builds one TurningSequence per labeled sequence id found in the records.
std::vector<TurningSequence> import_detections(const std::filesystem::path & records_jsonl,
                                               const std::filesystem::path & flow_dir,
                                               const std::filesystem::path & labels_csv,
                                               const sim::RegionMask & mask, double frame_rate);

}  // namespace vru::ingest

#endif  // VRU_INGEST_DETECTIONS_HPP_
