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

#include <algorithm>
#include <cmath>

#include "vru/core/error.hpp"
#include "vru/sim/scenario.hpp"

using namespace vru;
using namespace vru::sim;

namespace
{

// Independent restatement of the labeling rule: every (step, VRU) pair, with the path
// distance measured by dense resampling of the remaining vehicle polyline.
bool brute_force_interaction(const Scenario & s, const LabelRule & rule)
{
  const auto & veh = s.vehicle().states;
  double v_ref = 0.0;
  for (const auto & st : veh) {
    v_ref = std::max(v_ref, std::hypot(st.velocity.x, st.velocity.y));
  }
  if (v_ref == 0.0) {
    return false;
  }
  const double conflict = rule.conflict_fraction * s.region_mask.bbox_diagonal();
  for (std::size_t t = 0; t < veh.size(); ++t) {
    const double v = std::hypot(veh[t].velocity.x, veh[t].velocity.y);
    if (v >= (1.0 - rule.decel_threshold) * v_ref) {
      continue;
    }
    for (std::size_t a = 0; a < s.agents.size(); ++a) {
      const auto cls = s.agents[a].agent_class;
      if (cls == AgentClass::car_truck || cls == AgentClass::bus) {
        continue;
      }
      const auto p = s.agents[a].states[t].center;
      const int px = static_cast<int>(std::lround(p.x));
      const int py = static_cast<int>(std::lround(p.y));
      if (px < 0 || py < 0 || px >= s.width() || py >= s.height() ||
          s.region_mask.grid[static_cast<std::size_t>(py) * s.width() + px] == 0) {
        continue;
      }
      double best = 1e300;
      for (std::size_t k = t; k < veh.size(); ++k) {
        const auto a0 = veh[k].center;
        const auto a1 = k + 1 < veh.size() ? veh[k + 1].center : a0;
        for (int j = 0; j <= 64; ++j) {
          const double u = j / 64.0;
          best = std::min(best, std::hypot(a0.x + u * (a1.x - a0.x) - p.x, a0.y + u * (a1.y - a0.y) - p.y));
        }
      }
      // Resampling overestimates the segment distance by at most half a sample step.
      if (best < conflict - 1e-6) {
        return true;
      }
    }
  }
  return false;
}

ScenarioConfig vru_free()
{
  ScenarioConfig c;
  c.vru_min = 0;
  c.vru_max = 0;
  return c;
}

}  // namespace

TEST_CASE("zero-VRU scene is undisturbed and labeled non_interaction")
{
  const auto s = gen_scenario(vru_free(), 7);
  CHECK(label_scenario(s, {}).value == Interaction::non_interaction);
  // Per-step displacement is a chord of the arc, so it sits just under the free-flow speed.
  const auto v = vehicle_speed_profile(s);
  for (double x : v) {
    CHECK(x <= s.free_flow_speed + 1e-9);
    CHECK(x > 0.99 * s.free_flow_speed);
  }
}

TEST_CASE("generation is bit-identical for a fixed seed")
{
  ScenarioConfig c;
  c.ambiguity = 0.3;
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    CHECK(gen_scenario(c, seed) == gen_scenario(c, seed));
  }
  CHECK_FALSE(gen_scenario(c, 1) == gen_scenario(c, 2));
}

TEST_CASE("a blocking pedestrian forces the vehicle well below free flow")
{
  ScenarioConfig c;
  c.vru_min = 1;
  c.vru_max = 1;
  c.bike_fraction = 0.0;
  c.through_traffic = 0.0;
  c.target = ClassTarget::interaction;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = gen_scenario(c, seed);
    REQUIRE(s.agents.size() == 2);
    const auto v = vehicle_speed_profile(s);
    CHECK(*std::min_element(v.begin(), v.end()) < 0.5 * s.free_flow_speed);
    CHECK(label_scenario(s, c.label_rule).value == Interaction::interaction);
    // The trajectory is the integral of the per-step velocities.
    const auto & st = s.vehicle().states;
    for (std::size_t t = 0; t + 1 < st.size(); ++t) {
      CHECK(st[t + 1].center.x == doctest::Approx(st[t].center.x + st[t].velocity.x).epsilon(1e-9));
      CHECK(st[t + 1].center.y == doctest::Approx(st[t].center.y + st[t].velocity.y).epsilon(1e-9));
    }
  }
}

TEST_CASE("label_scenario agrees with a brute-force scan")
{
  ScenarioConfig c;
  c.ambiguity = 0.5;
  int positives = 0;
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const auto s = gen_scenario(c, seed);
    const bool expect = brute_force_interaction(s, c.label_rule);
    CHECK((label_scenario(s, c.label_rule).value == Interaction::interaction) == expect);
    positives += expect ? 1 : 0;
  }
  CHECK(positives > 20);
  CHECK(positives < 130);
}

TEST_CASE("constant vehicle speed is never an interaction")
{
  ScenarioConfig c;
  c.vru_min = 3;
  c.vru_max = 3;
  c.target = ClassTarget::non_interaction;
  auto s = gen_scenario(c, 11);
  for (auto & st : s.agents[s.vehicle_index].states) {
    const double n = st.velocity.norm();
    if (n > 0) {
      st.velocity = st.velocity * (s.free_flow_speed / n);
    }
  }
  CHECK(label_scenario(s, {}).value == Interaction::non_interaction);
}

TEST_CASE("scenes without VRUs inside the mask are non_interaction")
{
  ScenarioConfig c;
  c.target = ClassTarget::interaction;
  c.vru_min = 1;
  auto s = gen_scenario(c, 3);
  REQUIRE(label_scenario(s, {}).value == Interaction::interaction);
  for (auto & a : s.agents) {
    if (!is_vehicle(a.agent_class)) {
      for (auto & st : a.states) {
        st.center = {-50.0, -50.0};
      }
    }
  }
  CHECK(label_scenario(s, {}).value == Interaction::non_interaction);
}

TEST_CASE("property: zero VRUs always gives non_interaction")
{
  auto c = vru_free();
  c.through_traffic = 1.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    CHECK(label_scenario(gen_scenario(c, seed), {}).value == Interaction::non_interaction);
  }
}

TEST_CASE("requested classes are honored and ambiguity is tagged")
{
  ScenarioConfig c;
  c.ambiguity = 1.0;
  for (auto target : {ClassTarget::interaction, ClassTarget::non_interaction}) {
    c.target = target;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto s = gen_scenario(c, seed);
      const auto want = target == ClassTarget::interaction ? Interaction::interaction : Interaction::non_interaction;
      CHECK(label_scenario(s, c.label_rule).value == want);
      CHECK(s.ambiguous);
    }
  }
  c.ambiguity = 0.0;
  CHECK_FALSE(gen_scenario(c, 5).ambiguous);
}

TEST_CASE("structural invariants of generated scenes")
{
  ScenarioConfig c;
  c.ambiguity = 0.5;
  for (auto turn : {TurnDirection::right, TurnDirection::left}) {
    c.turn = turn;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const auto s = gen_scenario(c, seed);
      CHECK(s.steps >= 1);
      CHECK(s.region_mask.count() > 0);
      CHECK(s.region_mask.connected());
      int targets = 0;
      for (const auto & a : s.agents) {
        targets += a.role == AgentRole::target_vehicle ? 1 : 0;
        CHECK(a.states.size() == static_cast<std::size_t>(s.steps));
        for (const auto & st : a.states) {
          CHECK(st.box_extent.x > 0.0);
          CHECK(st.box_extent.y > 0.0);
        }
      }
      CHECK(targets == 1);
      // The vehicle passes through the turning region: outside, inside, outside.
      const auto & v = s.vehicle().states;
      auto inside = [&](const AgentState & st) {
        return s.region_mask.contains(static_cast<int>(std::lround(st.center.x)),
                                      static_cast<int>(std::lround(st.center.y)));
      };
      CHECK_FALSE(inside(v.front()));
      CHECK(std::any_of(v.begin(), v.end(), inside));
      CHECK_FALSE(inside(v.back()));
    }
  }
}

TEST_CASE("left turns mirror the right-turn layout")
{
  const auto r = IntersectionLayout::make(128, 96, TurnDirection::right).build_mask();
  const auto l = IntersectionLayout::make(128, 96, TurnDirection::left).build_mask();
  for (int y = 0; y < 96; ++y) {
    for (int x = 0; x < 128; ++x) {
      CHECK(r.contains(x, y) == l.contains(127 - x, y));
    }
  }
}

TEST_CASE("labels do not depend on frame resolution")
{
  ScenarioConfig lo;
  lo.ambiguity = 0.0;
  auto hi = lo;
  hi.width = 256;
  hi.height = 192;
  int agree = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto a = gen_scenario(lo, seed);
    const auto b = gen_scenario(hi, seed);
    agree += label_scenario(a, lo.label_rule) == label_scenario(b, hi.label_rule) ? 1 : 0;
  }
  CHECK(agree == 60);
}

TEST_CASE("invalid configurations are rejected")
{
  ScenarioConfig c;
  c.width = 0;
  CHECK_THROWS_AS(gen_scenario(c, 1), ConfigError);
  c = {};
  c.vru_min = 3;
  c.vru_max = 1;
  CHECK_THROWS_AS(gen_scenario(c, 1), ConfigError);
  c = {};
  c.ambiguity = 1.5;
  CHECK_THROWS_AS(validate(c), ConfigError);
}
