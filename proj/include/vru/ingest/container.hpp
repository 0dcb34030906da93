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

#ifndef VRU_INGEST_CONTAINER_HPP_
#define VRU_INGEST_CONTAINER_HPP_

// Scenario container layout (all binary data little-endian, frames in (y, x, c) order):
//
//   <root>/dataset.json             width, height, frame_rate, sequence ids, free-form meta
//   <root>/mask.bin                 W*H bytes (0/1)
//   <root>/<id>/manifest.json       id, label, length, fps, seed, ambiguous, cue
//   <root>/<id>/object.bin          T*H*W*4 unsigned bytes
//   <root>/<id>/flow.bin            T*H*W*3 float32

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vru/ingest/source.hpp"
#include "vru/sim/scenario.hpp"

namespace vru::ingest
{

struct DatasetHeader
{
  int width{0};
  int height{0};
  double frame_rate{12.5};
  std::vector<std::string> ids;
  /// Echo of the generating configuration (flat key/value pairs).
  std::map<std::string, std::string> meta;
};

void write_sequence(const std::filesystem::path & dir, const TurningSequence & seq);
TurningSequence read_sequence(const std::filesystem::path & dir);
SequenceInfo read_sequence_info(const std::filesystem::path & dir);

void write_mask(const std::filesystem::path & path, const sim::RegionMask & mask);
sim::RegionMask read_mask(const std::filesystem::path & path, int width, int height);

void write_dataset_header(const std::filesystem::path & root, const DatasetHeader & header);
DatasetHeader read_dataset_header(const std::filesystem::path & root);

void write_object_frames(const std::filesystem::path & path, const std::vector<ObjectFrame> & frames);
void write_flow_frames(const std::filesystem::path & path, const std::vector<FlowFrame> & frames);
std::vector<ObjectFrame> read_object_frames(const std::filesystem::path & path, int width, int height);
std::vector<FlowFrame> read_flow_frames(const std::filesystem::path & path, int width, int height);

/// Reads sequences from a container directory on demand.
class ContainerSource : public SequenceSource
{
public:
  explicit ContainerSource(std::filesystem::path root);
  std::size_t size() const override { return infos_.size(); }
  const SequenceInfo & info(std::size_t i) const override { return infos_.at(i); }
  TurningSequence load(std::size_t i) const override;
  int width() const override { return header_.width; }
  int height() const override { return header_.height; }
  const DatasetHeader & header() const { return header_; }
  const sim::RegionMask & mask() const { return mask_; }
  const std::filesystem::path & root() const { return root_; }

private:
  std::filesystem::path root_;
  DatasetHeader header_;
  sim::RegionMask mask_;
  std::vector<SequenceInfo> infos_;
};

}  // namespace vru::ingest

#endif  // VRU_INGEST_CONTAINER_HPP_
