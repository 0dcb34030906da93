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

#ifndef VRU_INGEST_WINDOWING_HPP_
#define VRU_INGEST_WINDOWING_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "vru/ingest/sequence.hpp"

namespace vru::ingest
{

/// Half-open frame range [start, start + valid) of one window inside its parent.
struct WindowSpan
{
  int start{0};
  int valid{0};
};

/// Start offsets and valid lengths of the windows covering a length-`length` sequence.
/// Windows advance by `stride`; the last one is the first whose end reaches the final frame.
std::vector<WindowSpan> window_spans(int length, int window, int stride);

struct WindowBatch
{
  std::string parent_id;
  int window_size{0};
  int stride{0};
  std::vector<std::vector<ObjectFrame>> object_windows;
  std::vector<std::vector<FlowFrame>> flow_windows;
  /// 1 where the slot holds a real frame, 0 for zero padding.
  std::vector<std::vector<std::uint8_t>> per_frame_valid;
  /// 1 where the slot holds a real frame not already covered by an earlier window.
  /// Identical to `per_frame_valid` when stride == window_size.
  std::vector<std::vector<std::uint8_t>> per_frame_new;

  int count() const { return static_cast<int>(object_windows.size()); }
};

WindowBatch slide_windows(const TurningSequence & seq, int window, int stride);

/// Concatenates the `per_frame_new` slots in order.
void reconstruct(const WindowBatch & batch, std::vector<ObjectFrame> & objects, std::vector<FlowFrame> & flows);

struct PaddedBatch
{
  std::string parent_id;
  std::vector<ObjectFrame> object_frames;
  std::vector<FlowFrame> flow_frames;
  std::vector<std::uint8_t> mask;
  int true_length{0};
};

/// Zero-pads to `t_star` frames; throws SequenceTooLongError when the sequence is longer.
PaddedBatch pad_to(const TurningSequence & seq, int t_star);

void unpad(const PaddedBatch & batch, std::vector<ObjectFrame> & objects, std::vector<FlowFrame> & flows);

}  // namespace vru::ingest

#endif  // VRU_INGEST_WINDOWING_HPP_
