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

#ifndef VRU_SIM_RENDER_HPP_
#define VRU_SIM_RENDER_HPP_

#include <array>
#include <span>
#include <vector>

#include "vru/core/frame.hpp"
#include "vru/sim/scenario.hpp"

namespace vru::sim
{

struct RenderConfig
{
  /// Speed (pixels/step) mapped to a full value channel; larger speeds saturate.
  double v_cap{8.0};
};

/// Inclusive pixel bounds of a class-tagged box, already clipped to the frame.
struct PixelBox
{
  AgentClass agent_class{AgentClass::pedestrian};
  int x0{0};
  int y0{0};
  int x1{-1};
  int y1{-1};

  bool empty() const { return x1 < x0 || y1 < y0; }
  int area() const { return empty() ? 0 : (x1 - x0 + 1) * (y1 - y0 + 1); }
  bool contains(int x, int y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

/// Pixels [ceil(c - e/2), floor(c + e/2)] on each axis, clipped to the frame.
PixelBox pixel_box(AgentClass cls, Vec2 center, Vec2 extent, int width, int height);

/// (hue, saturation, value) encoding of one velocity: hue = atan2(dy, dx) mapped from
/// [0, 2pi) to [0, 1); saturation 1; value = min(|v| / v_cap, 1). Zero velocity -> all 0.
std::array<float, 3> encode_flow(Vec2 velocity, double v_cap);

std::vector<PixelBox> frame_boxes(const Scenario & s, int t);

ObjectFrame render_object_frame(const Scenario & s, int t);

/// Valid for 0 <= t < steps; each state's velocity is the displacement to the next step,
/// so the final step is defined as well.
FlowFrame render_flow_frame(const Scenario & s, int t, const RenderConfig & cfg = {});

/// Erases vehicle boxes whose lower-midpoint pixel lies outside `mask`. VRU channels and
/// pixels still covered by a kept box of the same channel are untouched.
ObjectFrame apply_lane_filter(const ObjectFrame & frame, std::span<const PixelBox> boxes,
                              const RegionMask & mask);

/// Lower-midpoint test used by the filter: pixel ((x0 + x1) / 2, y1) must be in the mask.
bool keeps_vehicle(const PixelBox & box, const RegionMask & mask);

}  // namespace vru::sim

#endif  // VRU_SIM_RENDER_HPP_
