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

#include "vru/model/batching.hpp"

#include <algorithm>

#include "vru/core/error.hpp"
#include "vru/ingest/windowing.hpp"

namespace vru::model
{

std::string to_string(ParsingMode m) { return m == ParsingMode::sliding ? "sliding" : "padding"; }

ParsingMode parse_parsing_mode(const std::string & s)
{
  if (s == "sliding" || s == "sli") {
    return ParsingMode::sliding;
  }
  if (s == "padding" || s == "pad") {
    return ParsingMode::padding;
  }
  throw ConfigError("unknown parsing mode '" + s + "' (expected sliding or padding)");
}

void ParsingConfig::validate() const
{
  if (window < 1) {
    throw ConfigError("window must be >= 1");
  }
  if (stride < 1 || stride > window) {
    throw ConfigError("stride must lie in [1, window]");
  }
  if (t_star < 1) {
    throw ConfigError("t_star must be >= 1");
  }
}

std::vector<BatchUnit> make_units(const ingest::TurningSequence & seq, const ParsingConfig & p)
{
  std::vector<BatchUnit> units;
  if (p.mode == ParsingMode::padding) {
    if (seq.length() > p.t_star) {
      throw SequenceTooLongError("sequence '" + seq.info.id + "' has " + std::to_string(seq.length()) +
                                 " frames, more than the padding length " + std::to_string(p.t_star));
    }
    if (seq.length() < 1) {
      throw DataError("sequence '" + seq.info.id + "' is empty");
    }
    units.push_back({&seq, 0, seq.length(), p.t_star});
    return units;
  }
  for (const auto & s : ingest::window_spans(seq.length(), p.window, p.stride)) {
    units.push_back({&seq, s.start, s.valid, p.window});
  }
  return units;
}

SequenceBatch assemble_batch(std::span<const BatchUnit> units, const ModelConfig & cfg)
{
  if (units.empty()) {
    throw DataError("cannot assemble an empty batch");
  }
  SequenceBatch b;
  b.batch = static_cast<int>(units.size());
  for (const auto & u : units) {
    if (u.seq->width() != cfg.width || u.seq->height() != cfg.height) {
      throw DimensionError("sequence '" + u.seq->info.id + "' is " + std::to_string(u.seq->width()) + "x" +
                           std::to_string(u.seq->height()) + ", the model expects " + std::to_string(cfg.width) +
                           "x" + std::to_string(cfg.height));
    }
    b.length = std::max(b.length, u.valid);
  }
  const int n = b.batch;
  b.mask = Mat::Zero(n, b.length);
  b.labels = Vec(n);
  b.targets = Mat(static_cast<Eigen::Index>(n) * b.length, 1);
  int frames = 0;
  for (int i = 0; i < n; ++i) {
    const auto & u = units[static_cast<std::size_t>(i)];
    b.labels(i) = u.seq->info.label.value == sim::Interaction::interaction ? 1.0 : 0.0;
    b.mask.row(i).head(u.valid).setOnes();
    frames += u.valid;
  }
  for (int t = 0; t < b.length; ++t) {
    b.targets.middleRows(static_cast<Eigen::Index>(t) * n, n) = b.labels;
  }
  const int px = cfg.width * cfg.height;
  if (cfg.use_object) {
    b.object.resize(frames, px * kObjectChannels);
  }
  if (cfg.use_flow) {
    b.flow.resize(frames, px * kFlowChannels);
  }
  // Frames in time-major order so the CNN sees them in the same order as the rows.
  int k = 0;
  for (int t = 0; t < b.length; ++t) {
    for (int i = 0; i < n; ++i) {
      const auto & u = units[static_cast<std::size_t>(i)];
      if (t >= u.valid) {
        continue;
      }
      const auto f = static_cast<std::size_t>(u.start + t);
      b.frame_rows.push_back(t * n + i);
      if (cfg.use_object) {
        const auto & src = u.seq->object_frames[f].data;
        std::transform(src.begin(), src.end(), b.object.row(k).data(), [](std::uint8_t v) { return double(v); });
      }
      if (cfg.use_flow) {
        const auto & src = u.seq->flow_frames[f].data;
        std::transform(src.begin(), src.end(), b.flow.row(k).data(), [](float v) { return double(v); });
      }
      ++k;
    }
  }
  return b;
}

}  // namespace vru::model
