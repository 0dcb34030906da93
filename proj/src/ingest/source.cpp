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

#include "vru/ingest/source.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "vru/core/error.hpp"

namespace vru::ingest
{

std::vector<SequenceInfo> SequenceSource::infos() const
{
  std::vector<SequenceInfo> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    out.push_back(info(i));
  }
  return out;
}

std::size_t SequenceSource::index_of(const std::string & id) const
{
  if (index_.size() != size()) {
    index_.clear();
    for (std::size_t i = 0; i < size(); ++i) {
      index_.emplace(info(i).id, i);
    }
  }
  const auto it = index_.find(id);
  if (it == index_.end()) {
    throw DataError("unknown sequence id '" + id + "'");
  }
  return it->second;
}

std::vector<std::size_t> SequenceSource::indices_of(std::span<const std::string> ids) const
{
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  for (const auto & id : ids) {
    out.push_back(index_of(id));
  }
  return out;
}

MemorySource::MemorySource(std::vector<TurningSequence> sequences) : sequences_(std::move(sequences))
{
  for (const auto & s : sequences_) {
    check_consistent(s);
    if (s.width() != sequences_.front().width() || s.height() != sequences_.front().height()) {
      throw DimensionError("MemorySource: sequences differ in frame size");
    }
  }
}

int MemorySource::width() const { return sequences_.empty() ? 0 : sequences_.front().width(); }
int MemorySource::height() const { return sequences_.empty() ? 0 : sequences_.front().height(); }

ScenarioSource::ScenarioSource(std::vector<sim::Scenario> scenarios, std::vector<std::string> ids,
                               sim::RenderConfig render, sim::LabelRule rule)
  : scenarios_(std::move(scenarios)), render_(render), rule_(rule)
{
  if (ids.size() != scenarios_.size()) {
    throw ConfigError("ScenarioSource: one id per scenario required");
  }
  infos_.reserve(scenarios_.size());
  for (std::size_t i = 0; i < scenarios_.size(); ++i) {
    const auto & s = scenarios_[i];
    SequenceInfo info;
    info.id = std::move(ids[i]);
    info.label = sim::label_scenario(s, rule_);
    info.length = s.steps;
    info.frame_rate = s.step_rate;
    info.seed = s.seed;
    info.ambiguous = s.ambiguous;
    info.cue = s.cue;
    infos_.push_back(std::move(info));
  }
}

TurningSequence ScenarioSource::load(std::size_t i) const
{
  return make_sequence(scenarios_.at(i), infos_.at(i).id, render_, rule_);
}

int ScenarioSource::width() const { return scenarios_.empty() ? 0 : scenarios_.front().width(); }
int ScenarioSource::height() const { return scenarios_.empty() ? 0 : scenarios_.front().height(); }

SubsetSource::SubsetSource(const SequenceSource & parent, std::vector<std::size_t> indices)
  : parent_(parent), indices_(std::move(indices))
{
  for (auto i : indices_) {
    if (i >= parent_.size()) {
      throw BoundsError("SubsetSource: index out of range");
    }
  }
}

namespace
{

template <typename T>
Frame<T> resize_nearest(const Frame<T> & f, int width, int height)
{
  if (width < 1 || height < 1) {
    throw ConfigError("resize target must be positive");
  }
  Frame<T> out(width, height, f.channels);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(f.height - 1, static_cast<int>((y + 0.5) * f.height / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(f.width - 1, static_cast<int>((x + 0.5) * f.width / width));
      for (int c = 0; c < f.channels; ++c) {
        out.at(x, y, c) = f.at(sx, sy, c);
      }
    }
  }
  return out;
}

template <typename T>
Frame<T> flip_x(const Frame<T> & f)
{
  Frame<T> out(f.width, f.height, f.channels);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      for (int c = 0; c < f.channels; ++c) {
        out.at(f.width - 1 - x, y, c) = f.at(x, y, c);
      }
    }
  }
  return out;
}

}  // namespace

ObjectFrame resize(const ObjectFrame & f, int width, int height) { return resize_nearest(f, width, height); }
FlowFrame resize(const FlowFrame & f, int width, int height) { return resize_nearest(f, width, height); }
ObjectFrame mirror(const ObjectFrame & f) { return flip_x(f); }

FlowFrame mirror(const FlowFrame & f)
{
  auto out = flip_x(f);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      if (out.at(x, y, 1) > 0.0f) {
        float h = 0.5f - out.at(x, y, 0);
        h -= std::floor(h);
        out.at(x, y, 0) = h >= 1.0f ? 0.0f : h;
      }
    }
  }
  return out;
}

TurningSequence apply_transform(const TurningSequence & seq, const FrameTransform & t)
{
  TurningSequence out;
  out.info = seq.info;
  const int w = t.width.value_or(seq.width());
  const int h = t.height.value_or(seq.height());
  const bool do_resize = w != seq.width() || h != seq.height();
  out.object_frames.reserve(seq.object_frames.size());
  out.flow_frames.reserve(seq.flow_frames.size());
  for (std::size_t i = 0; i < seq.object_frames.size(); ++i) {
    auto o = do_resize ? resize(seq.object_frames[i], w, h) : seq.object_frames[i];
    auto f = do_resize ? resize(seq.flow_frames[i], w, h) : seq.flow_frames[i];
    if (t.mirror) {
      o = mirror(o);
      f = mirror(f);
    }
    out.object_frames.push_back(std::move(o));
    out.flow_frames.push_back(std::move(f));
  }
  return out;
}

TransformSource::TransformSource(const SequenceSource & parent, FrameTransform transform)
  : parent_(parent), transform_(transform)
{
}

TurningSequence TransformSource::load(std::size_t i) const { return apply_transform(parent_.load(i), transform_); }
int TransformSource::width() const { return transform_.width.value_or(parent_.width()); }
int TransformSource::height() const { return transform_.height.value_or(parent_.height()); }

}  // namespace vru::ingest
