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

#include "vru/ingest/windowing.hpp"

#include <algorithm>
#include <string>

#include "vru/core/error.hpp"

namespace vru::ingest
{

std::vector<WindowSpan> window_spans(int length, int window, int stride)
{
  if (window < 1) {
    throw ConfigError("window size must be >= 1, got " + std::to_string(window));
  }
  if (stride < 1 || stride > window) {
    throw ConfigError("stride must lie in [1, window], got " + std::to_string(stride));
  }
  if (length < 1) {
    throw DataError("cannot window an empty sequence");
  }
  std::vector<WindowSpan> spans;
  for (int start = 0;; start += stride) {
    spans.push_back({start, std::min(window, length - start)});
    if (start + window >= length) {
      break;
    }
  }
  return spans;
}

WindowBatch slide_windows(const TurningSequence & seq, int window, int stride)
{
  const auto spans = window_spans(seq.length(), window, stride);
  WindowBatch b;
  b.parent_id = seq.info.id;
  b.window_size = window;
  b.stride = stride;
  const ObjectFrame zero_obj(seq.width(), seq.height(), kObjectChannels);
  const FlowFrame zero_flow(seq.width(), seq.height(), kFlowChannels);
  int covered = 0;
  for (const auto & span : spans) {
    std::vector<ObjectFrame> objs;
    std::vector<FlowFrame> flows;
    std::vector<std::uint8_t> valid(static_cast<std::size_t>(window), 0);
    std::vector<std::uint8_t> fresh(static_cast<std::size_t>(window), 0);
    for (int i = 0; i < window; ++i) {
      if (i < span.valid) {
        const auto t = static_cast<std::size_t>(span.start + i);
        objs.push_back(seq.object_frames[t]);
        flows.push_back(seq.flow_frames[t]);
        valid[static_cast<std::size_t>(i)] = 1;
        fresh[static_cast<std::size_t>(i)] = span.start + i >= covered ? 1 : 0;
      } else {
        objs.push_back(zero_obj);
        flows.push_back(zero_flow);
      }
    }
    covered = span.start + span.valid;
    b.object_windows.push_back(std::move(objs));
    b.flow_windows.push_back(std::move(flows));
    b.per_frame_valid.push_back(std::move(valid));
    b.per_frame_new.push_back(std::move(fresh));
  }
  return b;
}

void reconstruct(const WindowBatch & batch, std::vector<ObjectFrame> & objects, std::vector<FlowFrame> & flows)
{
  objects.clear();
  flows.clear();
  for (int k = 0; k < batch.count(); ++k) {
    for (std::size_t i = 0; i < batch.per_frame_new[k].size(); ++i) {
      if (batch.per_frame_new[k][i] != 0) {
        objects.push_back(batch.object_windows[k][i]);
        flows.push_back(batch.flow_windows[k][i]);
      }
    }
  }
}

PaddedBatch pad_to(const TurningSequence & seq, int t_star)
{
  if (t_star < 1) {
    throw ConfigError("padding length must be >= 1");
  }
  if (seq.length() > t_star) {
    throw SequenceTooLongError("sequence '" + seq.info.id + "' has " + std::to_string(seq.length()) +
                               " frames, more than the padding length " + std::to_string(t_star));
  }
  PaddedBatch p;
  p.parent_id = seq.info.id;
  p.true_length = seq.length();
  p.object_frames = seq.object_frames;
  p.flow_frames = seq.flow_frames;
  p.mask.assign(static_cast<std::size_t>(t_star), 0);
  std::fill_n(p.mask.begin(), seq.length(), std::uint8_t{1});
  p.object_frames.resize(static_cast<std::size_t>(t_star), ObjectFrame(seq.width(), seq.height(), kObjectChannels));
  p.flow_frames.resize(static_cast<std::size_t>(t_star), FlowFrame(seq.width(), seq.height(), kFlowChannels));
  return p;
}

void unpad(const PaddedBatch & batch, std::vector<ObjectFrame> & objects, std::vector<FlowFrame> & flows)
{
  objects.clear();
  flows.clear();
  for (std::size_t t = 0; t < batch.mask.size(); ++t) {
    if (batch.mask[t] != 0) {
      objects.push_back(batch.object_frames[t]);
      flows.push_back(batch.flow_frames[t]);
    }
  }
}

}  // namespace vru::ingest
