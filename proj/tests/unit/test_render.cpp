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

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vru/core/error.hpp"
#include "vru/core/rng.hpp"
#include "vru/sim/render.hpp"

using namespace vru;
using namespace vru::sim;

namespace
{

AgentTrack track(AgentClass cls, Vec2 center, Vec2 extent, Vec2 velocity, int steps = 3)
{
  AgentTrack a;
  a.agent_class = cls;
  for (int t = 0; t < steps; ++t) {
    a.states.push_back({cls, center + velocity * t, extent, velocity});
  }
  return a;
}

Scenario scene(std::vector<AgentTrack> agents, int w = 64, int h = 48)
{
  Scenario s;
  s.region_mask = RegionMask(w, h);
  s.agents = std::move(agents);
  s.steps = s.agents.empty() ? 1 : static_cast<int>(s.agents.front().states.size());
  return s;
}

double hue_oracle(double vx, double vy)
{
  double a = std::atan2(vy, vx);
  if (a < 0) {
    a += 2 * std::numbers::pi;
  }
  const double h = a / (2 * std::numbers::pi);
  return h >= 1.0 ? 0.0 : h;
}

}  // namespace

TEST_CASE("single pedestrian box covers exactly 121 pixels of channel C1")
{
  const auto s = scene({track(AgentClass::pedestrian, {15, 15}, {10, 10}, {0, 0})});
  const auto f = render_object_frame(s, 0);
  int ones[4] = {0, 0, 0, 0};
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      for (int c = 0; c < 4; ++c) {
        ones[c] += f.at(x, y, c);
      }
    }
  }
  CHECK(ones[0] == 121);
  CHECK(ones[1] == 0);
  CHECK(ones[2] == 0);
  CHECK(ones[3] == 0);
  CHECK(f.at(10, 10, 0) == 1);
  CHECK(f.at(20, 20, 0) == 1);
  CHECK(f.at(21, 20, 0) == 0);
}

TEST_CASE("empty scene renders all-zero frames")
{
  auto s = scene({});
  s.steps = 2;
  const auto f = render_object_frame(s, 1);
  CHECK(std::all_of(f.data.begin(), f.data.end(), [](auto v) { return v == 0; }));
  const auto g = render_flow_frame(s, 1);
  CHECK(std::all_of(g.data.begin(), g.data.end(), [](auto v) { return v == 0.0f; }));
}

TEST_CASE("overlapping cars rasterize to the union of their boxes")
{
  const auto a = track(AgentClass::car_truck, {20, 20}, {10, 6}, {1, 0});
  const auto b = track(AgentClass::car_truck, {24, 22}, {10, 6}, {0, 1});
  const auto s = scene({a, b});
  const auto f = render_object_frame(s, 0);
  const auto ba = pixel_box(AgentClass::car_truck, {20, 20}, {10, 6}, 64, 48);
  const auto bb = pixel_box(AgentClass::car_truck, {24, 22}, {10, 6}, 64, 48);
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) {
      const int expect = (ba.contains(x, y) || bb.contains(x, y)) ? 1 : 0;
      CHECK(f.at(x, y, 2) == expect);
      CHECK(f.at(x, y, 0) == 0);
    }
  }
}

TEST_CASE("flow encoding examples")
{
  auto e = encode_flow({1, 0}, 8.0);
  CHECK(e[0] == 0.0f);
  CHECK(e[1] == 1.0f);
  CHECK(e[2] == doctest::Approx(0.125).epsilon(1e-7));
  e = encode_flow({0, 8}, 8.0);
  CHECK(e[0] == doctest::Approx(0.25).epsilon(1e-7));
  CHECK(e[2] == 1.0f);
  e = encode_flow({0, 0}, 8.0);
  CHECK(e[0] == 0.0f);
  CHECK(e[1] == 0.0f);
  CHECK(e[2] == 0.0f);
  // Angles just below 2 pi wrap to 0 rather than 1.
  e = encode_flow({1.0, -1e-12}, 8.0);
  CHECK(e[0] < 1.0f);
}

TEST_CASE("rendered flow matches the analytic oracle for random motions")
{
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec2 v{uniform(rng, -12, 12), uniform(rng, -12, 12)};
    const Vec2 c{uniform(rng, 0, 64), uniform(rng, 0, 48)};
    const Vec2 ext{uniform(rng, 1, 20), uniform(rng, 1, 20)};
    const auto s = scene({track(AgentClass::bike_motor, c, ext, v)});
    const auto f = render_flow_frame(s, 0, {8.0});
    const auto box = pixel_box(AgentClass::bike_motor, c, ext, 64, 48);
    const double h = hue_oracle(v.x, v.y);
    const double m = std::min(std::hypot(v.x, v.y) / 8.0, 1.0);
    for (int y = 0; y < 48; ++y) {
      for (int x = 0; x < 64; ++x) {
        if (box.contains(x, y)) {
          const double dh = std::abs(f.at(x, y, 0) - h);
          CHECK(std::min(dh, 1.0 - dh) < 1e-6);
          CHECK(f.at(x, y, 1) == 1.0f);
          CHECK(std::abs(f.at(x, y, 2) - m) < 1e-6);
        } else {
          CHECK(f.at(x, y, 0) == 0.0f);
          CHECK(f.at(x, y, 1) == 0.0f);
          CHECK(f.at(x, y, 2) == 0.0f);
        }
      }
    }
  }
}

TEST_CASE("stationary agents leave no flow")
{
  const auto s = scene({track(AgentClass::car_truck, {30, 30}, {10, 6}, {0, 0})});
  const auto f = render_flow_frame(s, 0);
  CHECK(std::all_of(f.data.begin(), f.data.end(), [](float v) { return v == 0.0f; }));
}

TEST_CASE("out-of-range steps raise bounds errors")
{
  const auto s = scene({track(AgentClass::pedestrian, {5, 5}, {2, 2}, {1, 0}, 4)});
  CHECK_THROWS_AS(render_object_frame(s, 4), BoundsError);
  CHECK_THROWS_AS(render_object_frame(s, -1), BoundsError);
  CHECK_THROWS_AS(render_flow_frame(s, 4), BoundsError);
  CHECK_NOTHROW(render_flow_frame(s, 3));
}

TEST_CASE("lane filter drops vehicles whose lower midpoint is outside the mask")
{
  RegionMask mask(64, 48);
  for (int y = 20; y < 48; ++y) {
    for (int x = 0; x < 32; ++x) {
      mask.set(x, y, true);
    }
  }
  const auto outside = track(AgentClass::car_truck, {48, 30}, {10, 6}, {0, 0});
  const auto inside = track(AgentClass::car_truck, {10, 30}, {10, 6}, {0, 0});
  const auto ped = track(AgentClass::pedestrian, {50, 5}, {4, 6}, {0, 0});
  auto s = scene({outside, inside, ped});
  s.region_mask = mask;
  const auto frame = render_object_frame(s, 0);
  const auto boxes = frame_boxes(s, 0);
  const auto out = apply_lane_filter(frame, boxes, mask);
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) {
      CHECK(out.at(x, y, 2) == (boxes[1].contains(x, y) ? 1 : 0));
      // VRU channels are left exactly as rendered.
      CHECK(out.at(x, y, 0) == frame.at(x, y, 0));
      CHECK(out.at(x, y, 1) == frame.at(x, y, 1));
    }
  }
  CHECK_FALSE(keeps_vehicle(boxes[0], mask));
  CHECK(keeps_vehicle(boxes[1], mask));
}

TEST_CASE("property: frames are binary and flow lies in the unit cube")
{
  ScenarioConfig c;
  c.ambiguity = 0.5;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = gen_scenario(c, seed);
    for (int t = 0; t < s.steps; t += 5) {
      const auto o = render_object_frame(s, t);
      CHECK(std::all_of(o.data.begin(), o.data.end(), [](auto v) { return v == 0 || v == 1; }));
      const auto f = render_flow_frame(s, t);
      CHECK(std::all_of(f.data.begin(), f.data.end(), [](float v) { return v >= 0.0f && v <= 1.0f; }));
    }
  }
}
