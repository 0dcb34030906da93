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

#ifndef VRU_INGEST_SOURCE_HPP_
#define VRU_INGEST_SOURCE_HPP_

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vru/ingest/sequence.hpp"

namespace vru::ingest
{

/// Random access to sequences whose frames are materialized on demand. Training and
/// evaluation only hold the frames of the current batch in memory.
class SequenceSource
{
public:
  virtual ~SequenceSource() = default;
  virtual std::size_t size() const = 0;
  virtual const SequenceInfo & info(std::size_t i) const = 0;
  virtual TurningSequence load(std::size_t i) const = 0;
  virtual int width() const = 0;
  virtual int height() const = 0;

  std::vector<SequenceInfo> infos() const;
  /// Index of the sequence with the given id; throws DataError if absent.
  std::size_t index_of(const std::string & id) const;
  std::vector<std::size_t> indices_of(std::span<const std::string> ids) const;

private:
  mutable std::unordered_map<std::string, std::size_t> index_;
};

class MemorySource : public SequenceSource
{
public:
  explicit MemorySource(std::vector<TurningSequence> sequences);
  std::size_t size() const override { return sequences_.size(); }
  const SequenceInfo & info(std::size_t i) const override { return sequences_.at(i).info; }
  TurningSequence load(std::size_t i) const override { return sequences_.at(i); }
  int width() const override;
  int height() const override;

private:
  std::vector<TurningSequence> sequences_;
};

/// Renders simulated scenarios lazily.
class ScenarioSource : public SequenceSource
{
public:
  ScenarioSource(std::vector<sim::Scenario> scenarios, std::vector<std::string> ids,
                 sim::RenderConfig render = {}, sim::LabelRule rule = {});
  std::size_t size() const override { return scenarios_.size(); }
  const SequenceInfo & info(std::size_t i) const override { return infos_.at(i); }
  TurningSequence load(std::size_t i) const override;
  int width() const override;
  int height() const override;
  const sim::Scenario & scenario(std::size_t i) const { return scenarios_.at(i); }

private:
  std::vector<sim::Scenario> scenarios_;
  std::vector<SequenceInfo> infos_;
  sim::RenderConfig render_;
  sim::LabelRule rule_;
};

/// A subset of another source, in the given order. The parent must outlive the view.
class SubsetSource : public SequenceSource
{
public:
  SubsetSource(const SequenceSource & parent, std::vector<std::size_t> indices);
  std::size_t size() const override { return indices_.size(); }
  const SequenceInfo & info(std::size_t i) const override { return parent_.info(indices_.at(i)); }
  TurningSequence load(std::size_t i) const override { return parent_.load(indices_.at(i)); }
  int width() const override { return parent_.width(); }
  int height() const override { return parent_.height(); }

private:
  const SequenceSource & parent_;
  std::vector<std::size_t> indices_;
};

/// Geometry transform applied at load time (cross-dataset evaluation).
struct FrameTransform
{
  std::optional<int> width;
  std::optional<int> height;
  bool mirror{false};
};

/// Nearest-neighbour resize of every channel; object frames stay binary, flow values are
/// copied unchanged.
ObjectFrame resize(const ObjectFrame & f, int width, int height);
FlowFrame resize(const FlowFrame & f, int width, int height);
/// Flips the x-axis. Flow orientation is mirrored as well: hue h -> (0.5 - h) mod 1 at
/// moving pixels, which negates the x component of the encoded direction.
ObjectFrame mirror(const ObjectFrame & f);
FlowFrame mirror(const FlowFrame & f);
TurningSequence apply_transform(const TurningSequence & seq, const FrameTransform & t);

class TransformSource : public SequenceSource
{
public:
  TransformSource(const SequenceSource & parent, FrameTransform transform);
  std::size_t size() const override { return parent_.size(); }
  const SequenceInfo & info(std::size_t i) const override { return parent_.info(i); }
  TurningSequence load(std::size_t i) const override;
  int width() const override;
  int height() const override;

private:
  const SequenceSource & parent_;
  FrameTransform transform_;
};

}  // namespace vru::ingest

#endif  // VRU_INGEST_SOURCE_HPP_
