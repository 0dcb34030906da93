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

#ifndef VRU_SIM_SCENARIO_HPP_
#define VRU_SIM_SCENARIO_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vru::sim
{

struct Vec2
{
  double x{0.0};
  double y{0.0};

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  double norm() const;
  bool operator==(const Vec2 &) const = default;
};

double distance(Vec2 a, Vec2 b);
/// Euclidean distance from `p` to the closed segment [a, b].
double distance_to_segment(Vec2 p, Vec2 a, Vec2 b);

/// Road-user classes; the underlying value is the object-frame channel.
enum class AgentClass : std::uint8_t { pedestrian = 0, bike_motor = 1, car_truck = 2, bus = 3 };

int object_channel(AgentClass c);
bool is_vehicle(AgentClass c);
std::string_view to_string(AgentClass c);

struct AgentState
{
  AgentClass agent_class{AgentClass::pedestrian};
  Vec2 center;
  /// Full axis-aligned box width/height in pixels.
  Vec2 box_extent{1.0, 1.0};
  /// Displacement to the next step, pixels per step.
  Vec2 velocity;
  bool operator==(const AgentState &) const = default;
};

/// What an agent is doing in the scene. Kept as metadata; labeling never reads it.
enum class AgentRole : std::uint8_t {
  target_vehicle,
  through_vehicle,
  vru_blocker,
  vru_before,
  vru_after,
  vru_bypass,
  vru_static,
  vru_hesitant,
};

struct AgentTrack
{
  AgentClass agent_class{AgentClass::pedestrian};
  AgentRole role{AgentRole::vru_static};
  std::vector<AgentState> states;
  bool operator==(const AgentTrack &) const = default;
};

struct RegionMask
{
  int width{0};
  int height{0};
  std::vector<std::uint8_t> grid;

  RegionMask() = default;
  RegionMask(int w, int h) : width(w), height(h), grid(static_cast<std::size_t>(w) * h, 0) {}

  bool contains(int x, int y) const
  {
    return x >= 0 && y >= 0 && x < width && y < height && grid[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void set(int x, int y, bool v) { grid[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  std::size_t count() const;
  /// Diagonal of the bounding box of the set pixels (pixel counts), 0 for an empty mask.
  double bbox_diagonal() const;
  /// 4-connectivity check over set pixels.
  bool connected() const;
  bool operator==(const RegionMask &) const = default;
};

enum class Interaction : std::uint8_t { non_interaction = 0, interaction = 1 };

struct InteractionLabel
{
  Interaction value{Interaction::non_interaction};

  std::array<double, 2> one_hot() const
  {
    return value == Interaction::interaction ? std::array<double, 2>{0.0, 1.0}
                                             : std::array<double, 2>{1.0, 0.0};
  }
  bool operator==(const InteractionLabel &) const = default;
};

std::string_view to_string(Interaction v);
Interaction parse_interaction(std::string_view s);

/// Which modality carries the scene's evidence. Single-cue scenes drop the other modality.
enum class Cue : std::uint8_t { both, motion_only, occupancy_only };
std::string_view to_string(Cue c);
Cue parse_cue(std::string_view s);

enum class TurnDirection : std::uint8_t { right, left };
std::string_view to_string(TurnDirection d);
TurnDirection parse_turn(std::string_view s);

enum class ClassTarget : std::uint8_t { random, interaction, non_interaction };

/// Operational interaction criterion: the vehicle's speed drops more than
/// `decel_threshold` below its free-flow speed while some VRU lies within
/// `conflict_fraction` x (mask bounding-box diagonal) of the vehicle's remaining path.
struct LabelRule
{
  double conflict_fraction{0.25};
  double decel_threshold{0.30};
};

struct ScenarioConfig
{
  int width{128};
  int height{96};
  double step_rate{12.5};
  TurnDirection turn{TurnDirection::right};
  int vru_min{0};
  int vru_max{3};
  /// Speeds in reference pixels per step (reference frame is 128x96; scaled to the frame).
  double vehicle_speed_min{2.5};
  double vehicle_speed_max{3.5};
  double pedestrian_speed_min{0.8};
  double pedestrian_speed_max{1.2};
  double bike_speed_min{1.6};
  double bike_speed_max{2.4};
  double bike_fraction{0.4};
  /// Probability that a scene is drawn near the labeling thresholds (tagged ambiguous).
  double ambiguity{0.0};
  /// Probability that a scene keeps only one modality's evidence (motion or occupancy, 50/50).
  double cue_split{0.0};
  /// Probability that a through-lane vehicle passes during the episode.
  double through_traffic{0.5};
  ClassTarget target{ClassTarget::random};
  int max_steps{240};
  LabelRule label_rule;
};

void validate(const ScenarioConfig & cfg);

struct Scenario
{
  std::vector<AgentTrack> agents;
  std::size_t vehicle_index{0};
  RegionMask region_mask;
  int steps{0};
  double step_rate{12.5};
  std::uint64_t seed{0};
  TurnDirection turn{TurnDirection::right};
  Cue cue{Cue::both};
  bool ambiguous{false};
  /// Free-flow speed of the target vehicle in frame pixels per step.
  double free_flow_speed{0.0};
  bool operator==(const Scenario &) const = default;

  int width() const { return region_mask.width; }
  int height() const { return region_mask.height; }
  const AgentTrack & vehicle() const { return agents.at(vehicle_index); }
};

/// Deterministic for fixed (config, seed). With `ClassTarget::interaction` or
/// `non_interaction` the generator resamples internally until `label_scenario`
/// agrees with the requested class.
Scenario gen_scenario(const ScenarioConfig & config, std::uint64_t seed);

/// Pure function of the trajectories (and mask extent); never reads pixels or roles.
InteractionLabel label_scenario(const Scenario & s, const LabelRule & rule);

/// Speed of the target vehicle at each step, |velocity|.
std::vector<double> vehicle_speed_profile(const Scenario & s);

/// Turning-space geometry used by the generator, exposed for tests and tooling.
struct IntersectionLayout
{
  double scale{1.0};
  double offset_x{0.0};
  double offset_y{0.0};
  int width{128};
  int height{96};
  TurnDirection turn{TurnDirection::right};

  static IntersectionLayout make(int width, int height, TurnDirection turn);

  /// Reference (128x96, right-turn) coordinates to frame pixels.
  Vec2 to_frame(Vec2 ref) const;
  Vec2 velocity_to_frame(Vec2 ref) const;

  /// Target path in reference coordinates, parameterized by arc length.
  Vec2 path_point(double arc) const;
  double path_heading(double arc) const;

  static constexpr double approach_x = 78.0;
  static constexpr double arc_radius = 22.0;
  static constexpr double approach_length = 50.0;
  static constexpr double arc_length = 34.55751918948773;  // 11 pi
  static constexpr double exit_y = 28.0;
  static constexpr double crosswalk_x0 = 108.0;
  static constexpr double crosswalk_x1 = 116.0;
  static constexpr double crosswalk_y0 = 12.0;
  static constexpr double crosswalk_y1 = 44.0;
  static constexpr double through_lane_x = 67.0;
  static constexpr double mask_radius = 9.0;
  static constexpr double band_half = 9.0;

  /// Episode start and end lie just outside the masked stretch [mask_begin, mask_end].
  double s_enter() const { return 8.0; }
  double mask_begin() const { return 20.0; }
  double s_stop() const { return approach_length + arc_length + 2.0; }
  double s_conflict() const { return approach_length + arc_length + 12.0; }
  double mask_end() const { return approach_length + arc_length + 28.0; }
  double s_exit() const { return mask_end() + 3.0; }

  RegionMask build_mask() const;
};

}  // namespace vru::sim

#endif  // VRU_SIM_SCENARIO_HPP_
