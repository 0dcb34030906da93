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

#include "vru/sim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "vru/core/error.hpp"
#include "vru/core/rng.hpp"

namespace vru::sim
{

double Vec2::norm() const { return std::hypot(x, y); }

double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b)
{
  const Vec2 ab = b - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  if (len2 <= 0.0) {
    return distance(p, a);
  }
  const Vec2 ap = p - a;
  const double u = std::clamp((ap.x * ab.x + ap.y * ab.y) / len2, 0.0, 1.0);
  return distance(p, a + ab * u);
}

int object_channel(AgentClass c) { return static_cast<int>(c); }

bool is_vehicle(AgentClass c) { return c == AgentClass::car_truck || c == AgentClass::bus; }

std::string_view to_string(AgentClass c)
{
  switch (c) {
    case AgentClass::pedestrian:
      return "pedestrian";
    case AgentClass::bike_motor:
      return "bike_motor";
    case AgentClass::car_truck:
      return "car_truck";
    case AgentClass::bus:
      return "bus";
  }
  return "unknown";
}

std::string_view to_string(Interaction v)
{
  return v == Interaction::interaction ? "interaction" : "non_interaction";
}

Interaction parse_interaction(std::string_view s)
{
  if (s == "interaction" || s == "1") {
    return Interaction::interaction;
  }
  if (s == "non_interaction" || s == "0") {
    return Interaction::non_interaction;
  }
  throw DataError("unknown interaction label '" + std::string(s) + "'");
}

std::string_view to_string(Cue c)
{
  switch (c) {
    case Cue::both:
      return "both";
    case Cue::motion_only:
      return "motion_only";
    case Cue::occupancy_only:
      return "occupancy_only";
  }
  return "both";
}

Cue parse_cue(std::string_view s)
{
  if (s == "both") return Cue::both;
  if (s == "motion_only") return Cue::motion_only;
  if (s == "occupancy_only") return Cue::occupancy_only;
  throw DataError("unknown cue '" + std::string(s) + "'");
}

std::string_view to_string(TurnDirection d) { return d == TurnDirection::right ? "right" : "left"; }

TurnDirection parse_turn(std::string_view s)
{
  if (s == "right") return TurnDirection::right;
  if (s == "left") return TurnDirection::left;
  throw ConfigError("turn must be 'right' or 'left', got '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------------------
// RegionMask

std::size_t RegionMask::count() const
{
  return static_cast<std::size_t>(std::count_if(grid.begin(), grid.end(), [](auto v) { return v != 0; }));
}

double RegionMask::bbox_diagonal() const
{
  int x0 = width, y0 = height, x1 = -1, y1 = -1;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (contains(x, y)) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
  }
  if (x1 < 0) {
    return 0.0;
  }
  return std::hypot(static_cast<double>(x1 - x0 + 1), static_cast<double>(y1 - y0 + 1));
}

bool RegionMask::connected() const
{
  const auto total = count();
  if (total == 0) {
    return false;
  }
  std::vector<std::uint8_t> seen(grid.size(), 0);
  std::deque<std::pair<int, int>> queue;
  for (int i = 0; i < static_cast<int>(grid.size()); ++i) {
    if (grid[i] != 0) {
      queue.emplace_back(i % width, i / width);
      seen[i] = 1;
      break;
    }
  }
  std::size_t reached = 0;
  while (!queue.empty()) {
    auto [x, y] = queue.front();
    queue.pop_front();
    ++reached;
    constexpr int dx[4] = {1, -1, 0, 0};
    constexpr int dy[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int nx = x + dx[k];
      const int ny = y + dy[k];
      if (contains(nx, ny)) {
        const auto idx = static_cast<std::size_t>(ny) * width + nx;
        if (seen[idx] == 0) {
          seen[idx] = 1;
          queue.emplace_back(nx, ny);
        }
      }
    }
  }
  return reached == total;
}

// ---------------------------------------------------------------------------------------
// Layout

IntersectionLayout IntersectionLayout::make(int width, int height, TurnDirection turn)
{
  IntersectionLayout l;
  l.width = width;
  l.height = height;
  l.turn = turn;
  l.scale = std::min(width / 128.0, height / 96.0);
  l.offset_x = (width - 128.0 * l.scale) / 2.0;
  l.offset_y = (height - 96.0 * l.scale) / 2.0;
  return l;
}

Vec2 IntersectionLayout::to_frame(Vec2 ref) const
{
  const double x = offset_x + scale * ref.x;
  const double y = offset_y + scale * ref.y;
  return {turn == TurnDirection::right ? x : (width - 1) - x, y};
}

Vec2 IntersectionLayout::velocity_to_frame(Vec2 ref) const
{
  return {turn == TurnDirection::right ? scale * ref.x : -scale * ref.x, scale * ref.y};
}

Vec2 IntersectionLayout::path_point(double arc) const
{
  constexpr double cx = approach_x + arc_radius;
  constexpr double cy = approach_length;
  if (arc <= approach_length) {
    // Approach: driving up from y = 100 to y = 50.
    return {approach_x, 100.0 - arc};
  }
  if (arc <= approach_length + arc_length) {
    const double theta = std::numbers::pi + (arc - approach_length) / arc_radius;
    return {cx + arc_radius * std::cos(theta), cy + arc_radius * std::sin(theta)};
  }
  return {cx + (arc - approach_length - arc_length), exit_y};
}

double IntersectionLayout::path_heading(double arc) const
{
  if (arc <= approach_length) {
    return -std::numbers::pi / 2.0;
  }
  if (arc <= approach_length + arc_length) {
    const double theta = std::numbers::pi + (arc - approach_length) / arc_radius;
    return theta + std::numbers::pi / 2.0;
  }
  return 0.0;
}

RegionMask IntersectionLayout::build_mask() const
{
  // Polyline of the turning section in reference coordinates.
  std::vector<Vec2> poly;
  for (double a = mask_begin(); a <= mask_end() + 1e-9; a += 0.5) {
    poly.push_back(path_point(a));
  }
  RegionMask right(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Vec2 ref{(x - offset_x) / scale, (y - offset_y) / scale};
      bool inside = ref.x >= crosswalk_x0 - 2.0 && ref.x <= crosswalk_x1 + 2.0 &&
                    ref.y >= crosswalk_y0 && ref.y <= crosswalk_y1;
      for (std::size_t i = 0; !inside && i + 1 < poly.size(); ++i) {
        inside = distance_to_segment(ref, poly[i], poly[i + 1]) <= mask_radius;
      }
      right.set(x, y, inside);
    }
  }
  if (turn == TurnDirection::right) {
    return right;
  }
  RegionMask left(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      left.set(x, y, right.contains(width - 1 - x, y));
    }
  }
  return left;
}

// ---------------------------------------------------------------------------------------
// Generation

void validate(const ScenarioConfig & cfg)
{
  auto fail = [](const std::string & m) { throw ConfigError("scenario config: " + m); };
  if (cfg.width < 16 || cfg.height < 12) fail("frame must be at least 16x12 pixels");
  if (!(cfg.step_rate > 0.0)) fail("step_rate must be positive");
  if (cfg.vru_min < 0 || cfg.vru_max < cfg.vru_min) fail("need 0 <= vru_min <= vru_max");
  if (!(cfg.vehicle_speed_min > 0.0) || cfg.vehicle_speed_max < cfg.vehicle_speed_min) {
    fail("vehicle speed range must be positive and ordered");
  }
  if (!(cfg.pedestrian_speed_min > 0.0) || cfg.pedestrian_speed_max < cfg.pedestrian_speed_min) {
    fail("pedestrian speed range must be positive and ordered");
  }
  if (!(cfg.bike_speed_min > 0.0) || cfg.bike_speed_max < cfg.bike_speed_min) {
    fail("bike speed range must be positive and ordered");
  }
  auto prob = [&](double p, const char * name) {
    if (!(p >= 0.0 && p <= 1.0)) fail(std::string(name) + " must lie in [0, 1]");
  };
  prob(cfg.ambiguity, "ambiguity");
  prob(cfg.cue_split, "cue_split");
  prob(cfg.through_traffic, "through_traffic");
  prob(cfg.bike_fraction, "bike_fraction");
  if (cfg.max_steps < 2) fail("max_steps must be at least 2");
  if (!(cfg.label_rule.conflict_fraction > 0.0)) fail("conflict_fraction must be positive");
  if (!(cfg.label_rule.decel_threshold > 0.0 && cfg.label_rule.decel_threshold < 1.0)) {
    fail("decel_threshold must lie in (0, 1)");
  }
  if (cfg.target == ClassTarget::interaction && cfg.vru_max < 1) {
    fail("interaction scenes need vru_max >= 1");
  }
}

namespace
{

using L = IntersectionLayout;

// Constant-velocity walker in reference coordinates: p(t) = anchor + vel * (t - t_anchor).
struct VruPlan
{
  AgentClass cls{AgentClass::pedestrian};
  AgentRole role{AgentRole::vru_static};
  Vec2 anchor;
  Vec2 vel;
  double t_anchor{0.0};

  Vec2 at(double t) const { return anchor + vel * (t - t_anchor); }
};

struct ThroughPlan
{
  AgentClass cls{AgentClass::car_truck};
  Vec2 anchor;
  double speed{3.0};
  double t_anchor{0.0};
  Vec2 at(double t) const { return {anchor.x, anchor.y - speed * (t - t_anchor)}; }
};

constexpr double kBrakeMax = 0.6;
constexpr double kBrakeSoft = 0.25;
constexpr double kAccel = 0.2;
constexpr double kYieldMargin = 4.0;

bool in_band(Vec2 p)
{
  return p.x >= L::crosswalk_x0 - 2.0 && p.x <= L::crosswalk_x1 + 2.0 &&
         std::abs(p.y - L::exit_y) <= L::band_half;
}

bool in_caution_zone(Vec2 p)
{
  return p.x >= L::crosswalk_x0 - 8.0 && p.x <= L::crosswalk_x1 + 8.0 && p.y >= 4.0 && p.y <= 52.0;
}

Vec2 box_extent_for(AgentClass cls, double heading)
{
  double len = 3.0, wid = 5.0;
  switch (cls) {
    case AgentClass::pedestrian:
      return {3.0, 5.0};
    case AgentClass::bike_motor:
      len = 7.0;
      wid = 3.0;
      break;
    case AgentClass::car_truck:
      len = 10.0;
      wid = 6.0;
      break;
    case AgentClass::bus:
      len = 16.0;
      wid = 7.0;
      break;
  }
  const double c = std::abs(std::cos(heading));
  const double s = std::abs(std::sin(heading));
  return {len * c + wid * s, len * s + wid * c};
}

struct Attempt
{
  Interaction intended{Interaction::non_interaction};
  bool ambiguous{false};
  Cue cue{Cue::both};
  double free_flow{3.0};
  double caution{1.0};
  std::vector<VruPlan> vrus;
  std::vector<ThroughPlan> through;
};

double vru_speed(Rng & rng, const ScenarioConfig & cfg, AgentClass cls)
{
  return cls == AgentClass::pedestrian ? uniform(rng, cfg.pedestrian_speed_min, cfg.pedestrian_speed_max)
                                       : uniform(rng, cfg.bike_speed_min, cfg.bike_speed_max);
}

VruPlan crosser(Rng & rng, AgentClass cls, AgentRole role, double speed, double band_entry)
{
  const double dir = bernoulli(rng, 0.5) ? 1.0 : -1.0;
  VruPlan p;
  p.cls = cls;
  p.role = role;
  p.anchor = {uniform(rng, 110.0, 114.0), L::exit_y - dir * L::band_half};
  p.vel = {0.0, dir * speed};
  p.t_anchor = band_entry;
  return p;
}

VruPlan background_vru(Rng & rng, const ScenarioConfig & cfg, const L & layout, double free_flow,
                       bool allow_after)
{
  const AgentClass cls = bernoulli(rng, cfg.bike_fraction) ? AgentClass::bike_motor : AgentClass::pedestrian;
  const double speed = vru_speed(rng, cfg, cls);
  const int n_roles = allow_after ? 4 : 3;
  const int pick = uniform_int(rng, 0, n_roles - 1);
  const double band_time = 2.0 * L::band_half / speed;
  switch (pick) {
    case 0: {
      // Cleared the crossing before the episode starts.
      const double entry = -1.0 - band_time - uniform(rng, 0.0, 20.0);
      return crosser(rng, cls, AgentRole::vru_before, speed, entry);
    }
    case 1: {
      VruPlan p;
      p.cls = cls;
      p.role = AgentRole::vru_bypass;
      const bool top = bernoulli(rng, 0.5);
      p.anchor = {uniform(rng, 92.0, 126.0), top ? 6.0 : 50.0};
      p.vel = {bernoulli(rng, 0.5) ? speed : -speed, 0.0};
      return p;
    }
    case 2: {
      VruPlan p;
      p.cls = cls;
      p.role = AgentRole::vru_static;
      const bool top = bernoulli(rng, 0.5);
      p.anchor = {uniform(rng, 106.0, 118.0), top ? uniform(rng, 6.0, 9.0) : uniform(rng, 47.0, 50.0)};
      return p;
    }
    default: {
      // Starts crossing only after the vehicle has cleared the yield point.
      const double t_pass = std::ceil((layout.s_conflict() - kYieldMargin - layout.s_enter()) / free_flow);
      return crosser(rng, cls, AgentRole::vru_after, speed, t_pass + uniform(rng, 1.5, 12.0));
    }
  }
}

Attempt plan_attempt(Rng & rng, const ScenarioConfig & cfg, const L & layout)
{
  Attempt a;
  switch (cfg.target) {
    case ClassTarget::interaction:
      a.intended = Interaction::interaction;
      break;
    case ClassTarget::non_interaction:
      a.intended = Interaction::non_interaction;
      break;
    case ClassTarget::random:
      a.intended = bernoulli(rng, 0.5) ? Interaction::interaction : Interaction::non_interaction;
      break;
  }
  if (cfg.vru_max == 0) {
    a.intended = Interaction::non_interaction;
  }
  a.free_flow = uniform(rng, cfg.vehicle_speed_min, cfg.vehicle_speed_max);
  a.ambiguous = cfg.vru_max > 0 && bernoulli(rng, cfg.ambiguity);
  if (bernoulli(rng, cfg.cue_split)) {
    a.cue = bernoulli(rng, 0.5) ? Cue::motion_only : Cue::occupancy_only;
  }

  if (a.ambiguous) {
    // A VRU lingering at the crossing curb; the driver slows down by a factor near the
    // deceleration threshold and the VRU sits near the edge of the area of interest.
    const double thr = 1.0 - cfg.label_rule.decel_threshold;
    double offset = 0.0;
    if (a.intended == Interaction::interaction) {
      a.caution = uniform(rng, thr - 0.2, thr - 0.04);
      offset = uniform(rng, 10.0, 15.0);
    } else if (bernoulli(rng, 0.5)) {
      a.caution = uniform(rng, thr + 0.04, thr + 0.22);
      offset = uniform(rng, 10.0, 15.0);
    } else {
      a.caution = uniform(rng, thr - 0.2, thr - 0.04);
      offset = uniform(rng, 17.5, 22.0);
    }
    a.caution = std::clamp(a.caution, 0.05, 0.99);
    VruPlan p;
    p.cls = bernoulli(rng, cfg.bike_fraction) ? AgentClass::bike_motor : AgentClass::pedestrian;
    p.role = AgentRole::vru_hesitant;
    const double side = bernoulli(rng, 0.5) ? 1.0 : -1.0;
    p.anchor = {uniform(rng, 110.0, 114.0), L::exit_y + side * offset};
    p.vel = {(bernoulli(rng, 0.5) ? 1.0 : -1.0) * uniform(rng, 0.02, 0.08), 0.0};
    a.vrus.push_back(p);
  } else {
    const int lo = a.intended == Interaction::interaction ? std::max(1, cfg.vru_min) : cfg.vru_min;
    const int n = uniform_int(rng, lo, std::max(lo, cfg.vru_max));
    int first_background = 0;
    if (a.intended == Interaction::interaction) {
      const AgentClass cls = bernoulli(rng, cfg.bike_fraction) ? AgentClass::bike_motor : AgentClass::pedestrian;
      const double speed = vru_speed(rng, cfg, cls);
      const double band_time = 2.0 * L::band_half / speed;
      const double t_arrive = (layout.s_stop() - layout.s_enter()) / a.free_flow;
      const double lead = uniform(rng, 0.3, 0.7) * band_time;
      a.vrus.push_back(crosser(rng, cls, AgentRole::vru_blocker, speed, t_arrive - lead));
      first_background = 1;
    }
    for (int i = first_background; i < n; ++i) {
      a.vrus.push_back(background_vru(rng, cfg, layout, a.free_flow, a.intended == Interaction::non_interaction));
    }
  }

  if (bernoulli(rng, cfg.through_traffic)) {
    ThroughPlan tp;
    tp.cls = bernoulli(rng, 0.15) ? AgentClass::bus : AgentClass::car_truck;
    tp.speed = uniform(rng, 2.5, 4.0);
    tp.anchor = {L::through_lane_x, uniform(rng, 10.0, 90.0)};
    tp.t_anchor = uniform(rng, 0.0, 25.0);
    a.through.push_back(tp);
  }
  return a;
}

Scenario simulate(const Attempt & a, const ScenarioConfig & cfg, const L & layout, std::uint64_t seed)
{
  Scenario s;
  s.seed = seed;
  s.step_rate = cfg.step_rate;
  s.turn = cfg.turn;
  s.cue = a.cue;
  s.ambiguous = a.ambiguous;
  s.region_mask = layout.build_mask();
  s.free_flow_speed = a.free_flow * layout.scale;

  // Vehicle kinematics in reference arc length; one extra state closes the last velocity.
  std::vector<double> arcs;
  double arc = layout.s_enter();
  double v = a.free_flow;
  int steps = 0;
  for (int t = 0;; ++t) {
    arcs.push_back(arc);
    const bool done = arc >= layout.s_exit() || t + 1 >= cfg.max_steps;
    if (done && steps == 0) {
      steps = t + 1;
    }
    if (steps != 0 && static_cast<int>(arcs.size()) > steps) {
      break;
    }
    bool yield = false;
    bool caution = false;
    for (const auto & p : a.vrus) {
      const Vec2 q = p.at(t);
      yield = yield || in_band(q);
      caution = caution || in_caution_zone(q);
    }
    yield = yield && arc < layout.s_conflict() - kYieldMargin;
    caution = caution && a.caution < 1.0 && arc < layout.s_conflict();
    if (yield) {
      const double dist = std::max(layout.s_stop() - arc, 0.5);
      const double need = v * v / (2.0 * dist);
      v = std::max(v - std::min(need, kBrakeMax), 0.0);
    } else if (caution) {
      const double target = a.caution * a.free_flow;
      v = v > target ? std::max(v - kBrakeSoft, target) : std::min(v + kAccel, target);
    } else {
      v = std::min(v + kAccel, a.free_flow);
    }
    arc += v;
  }

  AgentTrack vehicle;
  vehicle.agent_class = AgentClass::car_truck;
  vehicle.role = AgentRole::target_vehicle;
  for (int t = 0; t < steps; ++t) {
    AgentState st;
    st.agent_class = vehicle.agent_class;
    st.center = layout.to_frame(layout.path_point(arcs[t]));
    const Vec2 next = layout.to_frame(layout.path_point(arcs[t + 1]));
    st.velocity = next - st.center;
    const double heading = layout.path_heading(arcs[t]);
    st.box_extent = box_extent_for(vehicle.agent_class, heading) * layout.scale;
    vehicle.states.push_back(st);
  }
  s.agents.push_back(std::move(vehicle));
  s.vehicle_index = 0;

  auto add_track = [&](AgentClass cls, AgentRole role, auto && position) {
    AgentTrack tr;
    tr.agent_class = cls;
    tr.role = role;
    for (int t = 0; t < steps; ++t) {
      const Vec2 p = position(static_cast<double>(t));
      const Vec2 q = position(static_cast<double>(t + 1));
      AgentState st;
      st.agent_class = cls;
      st.center = layout.to_frame(p);
      st.velocity = layout.to_frame(q) - st.center;
      const Vec2 d = q - p;
      const double heading = d.norm() > 0.0 ? std::atan2(d.y, d.x) : std::numbers::pi / 2.0;
      st.box_extent = box_extent_for(cls, heading) * layout.scale;
      tr.states.push_back(st);
    }
    s.agents.push_back(std::move(tr));
  };
  for (const auto & p : a.vrus) {
    add_track(p.cls, p.role, [&p](double t) { return p.at(t); });
  }
  for (const auto & tp : a.through) {
    add_track(tp.cls, AgentRole::through_vehicle, [&tp](double t) { return tp.at(t); });
  }
  s.steps = steps;
  return s;
}

}  // namespace

Scenario gen_scenario(const ScenarioConfig & config, std::uint64_t seed)
{
  validate(config);
  const auto layout = IntersectionLayout::make(config.width, config.height, config.turn);
  if (layout.build_mask().count() == 0) {
    throw ConfigError("scenario config: region mask is empty at this frame size");
  }
  constexpr int kMaxAttempts = 256;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(attempt)}));
    const Attempt plan = plan_attempt(rng, config, layout);
    Scenario s = simulate(plan, config, layout, seed);
    if (label_scenario(s, config.label_rule).value == plan.intended) {
      return s;
    }
  }
  throw DataError("could not generate a scenario matching the requested class for seed " +
                  std::to_string(seed));
}

std::vector<double> vehicle_speed_profile(const Scenario & s)
{
  std::vector<double> out;
  for (const auto & st : s.vehicle().states) {
    out.push_back(st.velocity.norm());
  }
  return out;
}

InteractionLabel label_scenario(const Scenario & s, const LabelRule & rule)
{
  const auto speeds = vehicle_speed_profile(s);
  if (speeds.empty()) {
    return {};
  }
  const double v_ref = *std::max_element(speeds.begin(), speeds.end());
  if (v_ref <= 0.0) {
    return {};
  }
  const double conflict = rule.conflict_fraction * s.region_mask.bbox_diagonal();
  const auto & path = s.vehicle().states;
  const double slow = (1.0 - rule.decel_threshold) * v_ref;
  for (std::size_t t = 0; t < speeds.size(); ++t) {
    if (!(speeds[t] < slow)) {
      continue;
    }
    for (std::size_t a = 0; a < s.agents.size(); ++a) {
      if (a == s.vehicle_index || is_vehicle(s.agents[a].agent_class)) {
        continue;
      }
      const Vec2 p = s.agents[a].states.at(t).center;
      if (!s.region_mask.contains(static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y)))) {
        continue;
      }
      double best = distance(p, path[t].center);
      for (std::size_t k = t; k + 1 < path.size(); ++k) {
        best = std::min(best, distance_to_segment(p, path[k].center, path[k + 1].center));
      }
      if (best < conflict) {
        return {Interaction::interaction};
      }
    }
  }
  return {Interaction::non_interaction};
}

}  // namespace vru::sim
