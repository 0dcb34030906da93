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

#ifndef VRU_CLI_CONFIG_HPP_
#define VRU_CLI_CONFIG_HPP_

// Experiment configuration: a flat text file of `key = value` lines ('#' starts a
// comment). Keys are grouped by prefix:
//
//   data.*      dir, n_per_class, seed
//   scenario.*  width, height, turn, ambiguity, cue_split, through_traffic, vru_min,
//               vru_max, bike_fraction, max_steps
//   render.*    v_cap
//   split.*     train_ratio, val_fraction, seed, max_length (0 disables the filter)
//   model.*     row (one of the five ablation rows) and any model hyper-parameter
//   train.*     epochs, batch_size, learning_rate, beta1, beta2, epsilon, parsing,
//               window, stride, t_star, seed, group_sequences
//   eval.*      samples, repeats, seed, max_items
//   output.*    root, run_dir
//   threads, free_form
//
// Precedence: defaults, then the file, then VRU_OUTPUT_ROOT / VRU_THREADS, then
// command-line overrides.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "vru/ingest/splits.hpp"
#include "vru/model/network.hpp"
#include "vru/model/trainer.hpp"
#include "vru/sim/render.hpp"
#include "vru/sim/scenario.hpp"

namespace vru::cli
{

using KeyValues = std::map<std::string, std::string>;

/// The ablation rows, in table order.
inline constexpr std::array<std::string_view, 5> kAblationRows{"S+ob+op+att", "C+op+att", "C+ob+att", "C+ob+op",
                                                               "C+ob+op+att"};

/// Sets variant, modality and attention flags from a row tag such as "C+ob+att".
void apply_row(model::ModelConfig & mc, std::string_view row);
bool is_ablation_row(std::string_view tag);

struct EvalConfig
{
  int samples{100};
  /// Repeated sampled evaluations; std is reported across them.
  int repeats{10};
  std::uint64_t seed{0};
  int max_items{512};
};

struct ExperimentConfig
{
  std::filesystem::path data_dir;
  int n_per_class{100};
  std::uint64_t data_seed{1};
  sim::ScenarioConfig scenario;
  sim::RenderConfig render;
  ingest::SplitConfig split{0.7, 0.2, 0, 100};
  /// Raw model.* entries other than `row`; applied at build time on top of the frame size.
  KeyValues model_overrides;
  std::string row{"C+ob+op+att"};
  model::TrainConfig train;
  EvalConfig eval;
  std::filesystem::path output_root{"runs"};
  std::filesystem::path run_dir;
  int threads{1};
  /// Allows model flag combinations outside the ablation rows.
  bool free_form{false};

  /// Model for frames of the given size.
  model::ModelConfig model_config(int width, int height) const;

  /// Throws ConfigError on any inconsistency.
  void validate() const;
  KeyValues to_map() const;
  /// Unknown keys throw ConfigError.
  static ExperimentConfig from_map(const KeyValues & kv);
};

/// Parses `key = value` lines. Throws ConfigError on malformed lines or duplicate keys.
KeyValues parse_key_values(std::string_view text, const std::string & origin = "config");
KeyValues read_key_values(const std::filesystem::path & path);
/// Sorted `key = value` lines.
std::string format_key_values(const KeyValues & kv);
void write_key_values(const std::filesystem::path & path, const KeyValues & kv);

/// "key=value" -> (key, value).
std::pair<std::string, std::string> parse_override(std::string_view s);

/// Applies the precedence chain described above. `getenv` is injectable for tests.
ExperimentConfig resolve_config(const std::filesystem::path & file, const std::vector<std::string> & overrides,
                                const std::function<const char *(const char *)> & getenv = nullptr);

}  // namespace vru::cli

#endif  // VRU_CLI_CONFIG_HPP_
