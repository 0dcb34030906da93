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

#include "vru/ingest/detections.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vru/core/error.hpp"
#include "vru/ingest/container.hpp"

namespace vru::ingest
{

namespace
{

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string & s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

sim::AgentClass parse_detector_class(const std::string & name)
{
  const auto n = lower(trim(name));
  if (n == "pedestrian" || n == "person" || n == "ped") {
    return sim::AgentClass::pedestrian;
  }
  if (n == "bike_motor" || n == "bicycle" || n == "bike" || n == "motorcycle" || n == "motorbike" ||
      n == "cyclist") {
    return sim::AgentClass::bike_motor;
  }
  if (n == "car_truck" || n == "car" || n == "truck" || n == "van") {
    return sim::AgentClass::car_truck;
  }
  if (n == "bus") {
    return sim::AgentClass::bus;
  }
  throw DataError("unknown detection class '" + name + "'");
}

std::vector<DetectionRecord> parse_detection_records(std::istream & in)
{
  std::vector<DetectionRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) {
      continue;
    }
    try {
      const auto j = nlohmann::json::parse(line);
      DetectionRecord r;
      r.sequence_id = j.at("sequence_id").get<std::string>();
      r.frame_idx = j.at("frame_idx").get<int>();
      r.agent_class = parse_detector_class(j.at("class").get<std::string>());
      const auto bbox = j.at("bbox").get<std::vector<double>>();
      if (bbox.size() != 4) {
        throw DataError("bbox needs 4 values");
      }
      r.x = bbox[0];
      r.y = bbox[1];
      r.w = bbox[2];
      r.h = bbox[3];
      if (r.frame_idx < 0) {
        throw DataError("negative frame_idx");
      }
      if (r.w < 0.0 || r.h < 0.0) {
        throw DataError("negative bbox size");
      }
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception & e) {
      throw DataError("detection line " + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError & e) {
      throw DataError("detection line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

sim::PixelBox to_pixel_box(const DetectionRecord & r, int width, int height)
{
  sim::PixelBox b;
  b.agent_class = r.agent_class;
  b.x0 = std::max(0, static_cast<int>(std::floor(r.x * width)));
  b.y0 = std::max(0, static_cast<int>(std::floor(r.y * height)));
  b.x1 = std::min(width - 1, static_cast<int>(std::ceil((r.x + r.w) * width)) - 1);
  b.y1 = std::min(height - 1, static_cast<int>(std::ceil((r.y + r.h) * height)) - 1);
  return b;
}

std::vector<ObjectFrame> rasterize_detections(const std::vector<DetectionRecord> & records, int width, int height,
                                              const sim::RegionMask & mask)
{
  if (mask.width != width || mask.height != height) {
    throw DimensionError("region mask does not match the frame size");
  }
  int frames = 0;
  for (const auto & r : records) {
    frames = std::max(frames, r.frame_idx + 1);
  }
  std::vector<std::vector<sim::PixelBox>> boxes(static_cast<std::size_t>(frames));
  for (const auto & r : records) {
    auto b = to_pixel_box(r, width, height);
    if (!b.empty()) {
      boxes[static_cast<std::size_t>(r.frame_idx)].push_back(b);
    }
  }
  std::vector<ObjectFrame> out;
  out.reserve(boxes.size());
  for (const auto & fb : boxes) {
    ObjectFrame f(width, height, kObjectChannels);
    for (const auto & b : fb) {
      const int c = sim::object_channel(b.agent_class);
      for (int y = b.y0; y <= b.y1; ++y) {
        for (int x = b.x0; x <= b.x1; ++x) {
          f.at(x, y, c) = 1;
        }
      }
    }
    out.push_back(sim::apply_lane_filter(f, fb, mask));
  }
  return out;
}

std::map<std::string, sim::InteractionLabel> read_label_csv(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::map<std::string, sim::InteractionLabel> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') {
      continue;
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 'id,label'");
    }
    const auto id = trim(t.substr(0, comma));
    const auto label = trim(t.substr(comma + 1));
    if (lineno == 1 && id == "id") {
      continue;
    }
    try {
      out[id] = sim::InteractionLabel{sim::parse_interaction(label)};
    } catch (const Error & e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<TurningSequence> import_detections(const std::filesystem::path & records_jsonl,
                                               const std::filesystem::path & flow_dir,
                                               const std::filesystem::path & labels_csv,
                                               const sim::RegionMask & mask, double frame_rate)
{
  std::ifstream in(records_jsonl);
  if (!in) {
    throw IoError("cannot open " + records_jsonl.string());
  }
  const auto records = parse_detection_records(in);
  const auto labels = read_label_csv(labels_csv);
  std::map<std::string, std::vector<DetectionRecord>> by_seq;
  for (const auto & r : records) {
    by_seq[r.sequence_id].push_back(r);
  }
  std::vector<TurningSequence> out;
  for (const auto & [id, recs] : by_seq) {
    const auto lab = labels.find(id);
    if (lab == labels.end()) {
      continue;
    }
    TurningSequence seq;
    seq.info.id = id;
    seq.info.label = lab->second;
    seq.info.frame_rate = frame_rate;
    seq.object_frames = rasterize_detections(recs, mask.width, mask.height, mask);
    seq.flow_frames = read_flow_frames(flow_dir / (id + ".flow.bin"), mask.width, mask.height);
    if (seq.flow_frames.size() < seq.object_frames.size()) {
      throw DataError("sequence '" + id + "': flow file has " + std::to_string(seq.flow_frames.size()) +
                      " frames, detections reach frame " + std::to_string(seq.object_frames.size() - 1));
    }
    // Trailing frames without detections are empty but still part of the episode.
    while (seq.object_frames.size() < seq.flow_frames.size()) {
      seq.object_frames.emplace_back(mask.width, mask.height, kObjectChannels);
    }
    seq.info.length = seq.length();
    check_consistent(seq);
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace vru::ingest
