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

#include "vru/sim/render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vru/core/error.hpp"

namespace vru::sim
{

PixelBox pixel_box(AgentClass cls, Vec2 center, Vec2 extent, int width, int height)
{
  PixelBox b;
  b.agent_class = cls;
  b.x0 = std::max(0, static_cast<int>(std::ceil(center.x - extent.x / 2.0)));
  b.x1 = std::min(width - 1, static_cast<int>(std::floor(center.x + extent.x / 2.0)));
  b.y0 = std::max(0, static_cast<int>(std::ceil(center.y - extent.y / 2.0)));
  b.y1 = std::min(height - 1, static_cast<int>(std::floor(center.y + extent.y / 2.0)));
  return b;
}

std::array<float, 3> encode_flow(Vec2 velocity, double v_cap)
{
  const double mag = velocity.norm();
  if (mag == 0.0) {
    return {0.0f, 0.0f, 0.0f};
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double angle = std::atan2(velocity.y, velocity.x);
  if (angle < 0.0) {
    angle += two_pi;
  }
  double hue = angle / two_pi;
  if (hue >= 1.0) {
    hue = 0.0;
  }
  auto h = static_cast<float>(hue);
  if (h >= 1.0f) {
    h = 0.0f;
  }
  return {h, 1.0f, static_cast<float>(std::min(mag / v_cap, 1.0))};
}

namespace
{

void check_step(const Scenario & s, int t)
{
  if (t < 0 || t >= s.steps) {
    throw BoundsError("step " + std::to_string(t) + " outside [0, " + std::to_string(s.steps) + ")");
  }
}

}  // namespace

std::vector<PixelBox> frame_boxes(const Scenario & s, int t)
{
  check_step(s, t);
  std::vector<PixelBox> boxes;
  boxes.reserve(s.agents.size());
  for (const auto & a : s.agents) {
    const auto & st = a.states.at(static_cast<std::size_t>(t));
    boxes.push_back(pixel_box(a.agent_class, st.center, st.box_extent, s.width(), s.height()));
  }
  return boxes;
}

ObjectFrame render_object_frame(const Scenario & s, int t)
{
  ObjectFrame f(s.width(), s.height(), kObjectChannels);
  for (const auto & b : frame_boxes(s, t)) {
    const int c = object_channel(b.agent_class);
    for (int y = b.y0; y <= b.y1; ++y) {
      for (int x = b.x0; x <= b.x1; ++x) {
        f.at(x, y, c) = 1;
      }
    }
  }
  return f;
}

FlowFrame render_flow_frame(const Scenario & s, int t, const RenderConfig & cfg)
{
  check_step(s, t);
  if (!(cfg.v_cap > 0.0)) {
    throw ConfigError("v_cap must be positive");
  }
  FlowFrame f(s.width(), s.height(), kFlowChannels);
  // Later agents overwrite earlier ones where boxes overlap.
  for (const auto & a : s.agents) {
    const auto & st = a.states.at(static_cast<std::size_t>(t));
    const auto enc = encode_flow(st.velocity, cfg.v_cap);
    if (enc[1] == 0.0f) {
      continue;
    }
    const auto b = pixel_box(a.agent_class, st.center, st.box_extent, s.width(), s.height());
    for (int y = b.y0; y <= b.y1; ++y) {
      for (int x = b.x0; x <= b.x1; ++x) {
        for (int c = 0; c < kFlowChannels; ++c) {
          f.at(x, y, c) = enc[c];
        }
      }
    }
  }
  return f;
}

bool keeps_vehicle(const PixelBox & box, const RegionMask & mask)
{
  if (box.empty()) {
    return false;
  }
  return mask.contains((box.x0 + box.x1) / 2, box.y1);
}

ObjectFrame apply_lane_filter(const ObjectFrame & frame, std::span<const PixelBox> boxes, const RegionMask & mask)
{
  ObjectFrame out = frame;
  std::vector<const PixelBox *> kept;
  std::vector<const PixelBox *> dropped;
  for (const auto & b : boxes) {
    if (!is_vehicle(b.agent_class) || b.empty()) {
      continue;
    }
    (keeps_vehicle(b, mask) ? kept : dropped).push_back(&b);
  }
  for (const auto * d : dropped) {
    const int c = object_channel(d->agent_class);
    for (int y = d->y0; y <= d->y1; ++y) {
      for (int x = d->x0; x <= d->x1; ++x) {
        const bool still_covered = std::any_of(kept.begin(), kept.end(), [&](const PixelBox * k) {
          return k->agent_class == d->agent_class && k->contains(x, y);
        });
        if (!still_covered) {
          out.at(x, y, c) = 0;
        }
      }
    }
  }
  return out;
}

}  // namespace vru::sim
