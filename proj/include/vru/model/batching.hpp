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

#ifndef VRU_MODEL_BATCHING_HPP_
#define VRU_MODEL_BATCHING_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vru/ingest/sequence.hpp"
#include "vru/model/network.hpp"

namespace vru::model
{

enum class ParsingMode : std::uint8_t { sliding, padding };
std::string to_string(ParsingMode m);
ParsingMode parse_parsing_mode(const std::string & s);

struct ParsingConfig
{
  ParsingMode mode{ParsingMode::sliding};
  int window{8};
  int stride{8};
  /// Padding length T*.
  int t_star{100};
  void validate() const;
  bool operator==(const ParsingConfig &) const = default;
};

/// One training or inference item: a window of a sequence, or the whole sequence padded.
struct BatchUnit
{
  const ingest::TurningSequence * seq{nullptr};
  int start{0};
  int valid{0};
  /// Nominal item length (window size or T*).
  int length{0};
};

/// Items of one sequence under the parsing mode. Padding throws SequenceTooLongError
/// when the sequence exceeds T*.
std::vector<BatchUnit> make_units(const ingest::TurningSequence & seq, const ParsingConfig & p);

/// Stacks units into a time-major batch carrying only the modalities the model uses.
/// The common length is the longest valid span in the batch; trailing steps that are
/// padding for every item cannot change any valid output (masked recurrent steps hold
/// their state and padded keys get no attention), so they are dropped.
SequenceBatch assemble_batch(std::span<const BatchUnit> units, const ModelConfig & cfg);

}  // namespace vru::model

#endif  // VRU_MODEL_BATCHING_HPP_
