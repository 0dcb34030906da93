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

#include "vru/ingest/container.hpp"

#include <bit>
#include <fstream>
#include <string>

#include <json.hpp>

#include "vru/core/error.hpp"

namespace vru::ingest
{

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

namespace
{

json read_json(const fs::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::exception & e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path & path, const json & j)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << j.dump(2) << "\n";
}

template <typename T>
void write_raw(const fs::path & path, const std::vector<Frame<T>> & frames)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  for (const auto & f : frames) {
    out.write(reinterpret_cast<const char *>(f.data.data()), static_cast<std::streamsize>(f.data.size() * sizeof(T)));
  }
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

template <typename T>
std::vector<Frame<T>> read_raw(const fs::path & path, int width, int height, int channels)
{
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  const auto bytes = static_cast<std::size_t>(in.tellg());
  const std::size_t frame_bytes = static_cast<std::size_t>(width) * height * channels * sizeof(T);
  if (frame_bytes == 0 || bytes % frame_bytes != 0) {
    throw DimensionError(path.string() + ": size " + std::to_string(bytes) + " is not a multiple of the frame size " +
                         std::to_string(frame_bytes));
  }
  in.seekg(0);
  std::vector<Frame<T>> frames(bytes / frame_bytes, Frame<T>(width, height, channels));
  for (auto & f : frames) {
    in.read(reinterpret_cast<char *>(f.data.data()), static_cast<std::streamsize>(frame_bytes));
  }
  if (!in) {
    throw IoError("read failed for " + path.string());
  }
  return frames;
}

json info_to_json(const SequenceInfo & info, int width, int height)
{
  return json{{"id", info.id},
              {"label", std::string(sim::to_string(info.label.value))},
              {"length", info.length},
              {"fps", info.frame_rate},
              {"seed", info.seed},
              {"ambiguous", info.ambiguous},
              {"cue", std::string(sim::to_string(info.cue))},
              {"width", width},
              {"height", height}};
}

SequenceInfo info_from_json(const json & j)
{
  SequenceInfo info;
  info.id = j.at("id").get<std::string>();
  info.label.value = sim::parse_interaction(j.at("label").get<std::string>());
  info.length = j.at("length").get<int>();
  info.frame_rate = j.at("fps").get<double>();
  info.seed = j.value("seed", std::uint64_t{0});
  info.ambiguous = j.value("ambiguous", false);
  info.cue = sim::parse_cue(j.value("cue", std::string("both")));
  return info;
}

}  // namespace

void write_object_frames(const fs::path & path, const std::vector<ObjectFrame> & frames) { write_raw(path, frames); }
void write_flow_frames(const fs::path & path, const std::vector<FlowFrame> & frames) { write_raw(path, frames); }

std::vector<ObjectFrame> read_object_frames(const fs::path & path, int width, int height)
{
  return read_raw<std::uint8_t>(path, width, height, kObjectChannels);
}

std::vector<FlowFrame> read_flow_frames(const fs::path & path, int width, int height)
{
  return read_raw<float>(path, width, height, kFlowChannels);
}

void write_sequence(const fs::path & dir, const TurningSequence & seq)
{
  check_consistent(seq);
  fs::create_directories(dir);
  write_json(dir / "manifest.json", info_to_json(seq.info, seq.width(), seq.height()));
  write_object_frames(dir / "object.bin", seq.object_frames);
  write_flow_frames(dir / "flow.bin", seq.flow_frames);
}

SequenceInfo read_sequence_info(const fs::path & dir)
{
  try {
    return info_from_json(read_json(dir / "manifest.json"));
  } catch (const json::exception & e) {
    throw DataError("bad manifest in " + dir.string() + ": " + e.what());
  }
}

TurningSequence read_sequence(const fs::path & dir)
{
  const auto j = read_json(dir / "manifest.json");
  TurningSequence seq;
  int w = 0;
  int h = 0;
  try {
    seq.info = info_from_json(j);
    w = j.at("width").get<int>();
    h = j.at("height").get<int>();
  } catch (const json::exception & e) {
    throw DataError("bad manifest in " + dir.string() + ": " + e.what());
  }
  seq.object_frames = read_object_frames(dir / "object.bin", w, h);
  seq.flow_frames = read_flow_frames(dir / "flow.bin", w, h);
  check_consistent(seq);
  if (seq.length() != seq.info.length) {
    throw DataError("sequence '" + seq.info.id + "': manifest length " + std::to_string(seq.info.length) +
                    " but " + std::to_string(seq.length()) + " frames on disk");
  }
  return seq;
}

void write_mask(const fs::path & path, const sim::RegionMask & mask)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char *>(mask.grid.data()), static_cast<std::streamsize>(mask.grid.size()));
}

sim::RegionMask read_mask(const fs::path & path, int width, int height)
{
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  sim::RegionMask mask(width, height);
  if (static_cast<std::size_t>(in.tellg()) != mask.grid.size()) {
    throw DimensionError(path.string() + ": mask size does not match " + std::to_string(width) + "x" +
                         std::to_string(height));
  }
  in.seekg(0);
  in.read(reinterpret_cast<char *>(mask.grid.data()), static_cast<std::streamsize>(mask.grid.size()));
  for (auto & v : mask.grid) {
    v = v != 0 ? 1 : 0;
  }
  return mask;
}

void write_dataset_header(const fs::path & root, const DatasetHeader & header)
{
  fs::create_directories(root);
  write_json(root / "dataset.json", json{{"width", header.width},
                                         {"height", header.height},
                                         {"frame_rate", header.frame_rate},
                                         {"ids", header.ids},
                                         {"meta", header.meta}});
}

DatasetHeader read_dataset_header(const fs::path & root)
{
  const auto j = read_json(root / "dataset.json");
  try {
    DatasetHeader h;
    h.width = j.at("width").get<int>();
    h.height = j.at("height").get<int>();
    h.frame_rate = j.at("frame_rate").get<double>();
    h.ids = j.at("ids").get<std::vector<std::string>>();
    h.meta = j.value("meta", std::map<std::string, std::string>{});
    return h;
  } catch (const json::exception & e) {
    throw DataError("bad dataset header in " + root.string() + ": " + e.what());
  }
}

ContainerSource::ContainerSource(fs::path root) : root_(std::move(root))
{
  header_ = read_dataset_header(root_);
  mask_ = read_mask(root_ / "mask.bin", header_.width, header_.height);
  infos_.reserve(header_.ids.size());
  for (const auto & id : header_.ids) {
    infos_.push_back(read_sequence_info(root_ / id));
  }
}

TurningSequence ContainerSource::load(std::size_t i) const
{
  auto seq = read_sequence(root_ / infos_.at(i).id);
  if (seq.width() != header_.width || seq.height() != header_.height) {
    throw DimensionError("sequence '" + seq.info.id + "' frame size differs from the dataset header");
  }
  return seq;
}

}  // namespace vru::ingest
