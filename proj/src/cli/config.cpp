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

#include "vru/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "vru/core/error.hpp"

namespace vru::cli
{

namespace
{

std::string trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v)
{
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename T>
T num(const std::string & key, const std::string & s)
{
  T v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ConfigError("'" + key + "': cannot parse '" + s + "'");
  }
  return v;
}

bool flag(const std::string & key, const std::string & s)
{
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("'" + key + "': expected a boolean, got '" + s + "'");
}

const char * kModelFlagKeys[] = {"variant", "attention", "use_object", "use_flow"};

}  // namespace

void apply_row(model::ModelConfig & mc, std::string_view row)
{
  std::vector<std::string> parts;
  std::string cur;
  for (char c : row) {
    if (c == '+') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  if (parts.empty() || (parts[0] != "C" && parts[0] != "S")) {
    throw ConfigError("model row '" + std::string(row) + "' must start with C or S");
  }
  mc.variant = parts[0] == "C" ? model::Variant::cvae : model::Variant::s2s;
  mc.use_object = mc.use_flow = mc.attention = false;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (parts[i] == "ob") mc.use_object = true;
    else if (parts[i] == "op") mc.use_flow = true;
    else if (parts[i] == "att") mc.attention = true;
    else throw ConfigError("model row '" + std::string(row) + "': unknown part '" + parts[i] + "'");
  }
  if (mc.tag() != row) {
    throw ConfigError("model row '" + std::string(row) + "' is not in canonical order (" + mc.tag() + ")");
  }
}

bool is_ablation_row(std::string_view tag)
{
  return std::find(kAblationRows.begin(), kAblationRows.end(), tag) != kAblationRows.end();
}

model::ModelConfig ExperimentConfig::model_config(int width, int height) const
{
  KeyValues kv = model::ModelConfig{}.to_map();
  for (const auto & [k, v] : model_overrides) {
    kv[k] = v;
  }
  kv["width"] = std::to_string(width);
  kv["height"] = std::to_string(height);
  model::ModelConfig mc = model::ModelConfig::from_map(kv);
  apply_row(mc, row);
  mc.validate();
  return mc;
}

void ExperimentConfig::validate() const
{
  sim::validate(scenario);
  if (n_per_class < 0) {
    throw ConfigError("data.n_per_class must be nonnegative (got " + std::to_string(n_per_class) + ")");
  }
  if (!(render.v_cap > 0.0)) {
    throw ConfigError("render.v_cap must be positive");
  }
  if (!(split.train_ratio > 0.0 && split.train_ratio < 1.0)) {
    throw ConfigError("split.train_ratio must lie in (0, 1)");
  }
  if (!(split.val_fraction >= 0.0 && split.val_fraction < 1.0)) {
    throw ConfigError("split.val_fraction must lie in [0, 1)");
  }
  for (const auto & [k, v] : model_overrides) {
    for (const char * f : kModelFlagKeys) {
      if (k == f) {
        throw ConfigError("model." + k + " is set through model.row");
      }
    }
  }
  model_config(scenario.width, scenario.height);
  if (!free_form && !is_ablation_row(row)) {
    throw ConfigError("model.row '" + row + "' is not one of the ablation rows; set free_form = true to allow it");
  }
  train.validate();
  if (eval.samples < 1 || eval.repeats < 1 || eval.max_items < 1) {
    throw ConfigError("eval.samples, eval.repeats and eval.max_items must be positive");
  }
  if (threads < 1) {
    throw ConfigError("threads must be positive");
  }
}

KeyValues ExperimentConfig::to_map() const
{
  KeyValues kv;
  kv["data.dir"] = data_dir.string();
  kv["data.n_per_class"] = std::to_string(n_per_class);
  kv["data.seed"] = std::to_string(data_seed);
  kv["scenario.width"] = std::to_string(scenario.width);
  kv["scenario.height"] = std::to_string(scenario.height);
  kv["scenario.turn"] = std::string(sim::to_string(scenario.turn));
  kv["scenario.ambiguity"] = fmt(scenario.ambiguity);
  kv["scenario.cue_split"] = fmt(scenario.cue_split);
  kv["scenario.through_traffic"] = fmt(scenario.through_traffic);
  kv["scenario.vru_min"] = std::to_string(scenario.vru_min);
  kv["scenario.vru_max"] = std::to_string(scenario.vru_max);
  kv["scenario.bike_fraction"] = fmt(scenario.bike_fraction);
  kv["scenario.max_steps"] = std::to_string(scenario.max_steps);
  kv["render.v_cap"] = fmt(render.v_cap);
  kv["split.train_ratio"] = fmt(split.train_ratio);
  kv["split.val_fraction"] = fmt(split.val_fraction);
  kv["split.seed"] = std::to_string(split.seed);
  kv["split.max_length"] = std::to_string(split.max_length.value_or(0));
  kv["model.row"] = row;
  for (const auto & [k, v] : model_overrides) {
    kv["model." + k] = v;
  }
  for (const auto & [k, v] : train.to_map()) {
    kv["train." + k] = v;
  }
  kv["eval.samples"] = std::to_string(eval.samples);
  kv["eval.repeats"] = std::to_string(eval.repeats);
  kv["eval.seed"] = std::to_string(eval.seed);
  kv["eval.max_items"] = std::to_string(eval.max_items);
  kv["output.root"] = output_root.string();
  kv["output.run_dir"] = run_dir.string();
  kv["threads"] = std::to_string(threads);
  kv["free_form"] = free_form ? "true" : "false";
  return kv;
}

ExperimentConfig ExperimentConfig::from_map(const KeyValues & kv)
{
  ExperimentConfig c;
  KeyValues train_kv;
  for (const auto & [k, v] : kv) {
    if (k == "data.dir") c.data_dir = v;
    else if (k == "data.n_per_class") c.n_per_class = num<int>(k, v);
    else if (k == "data.seed") c.data_seed = num<std::uint64_t>(k, v);
    else if (k == "scenario.width") c.scenario.width = num<int>(k, v);
    else if (k == "scenario.height") c.scenario.height = num<int>(k, v);
    else if (k == "scenario.turn") c.scenario.turn = sim::parse_turn(v);
    else if (k == "scenario.ambiguity") c.scenario.ambiguity = num<double>(k, v);
    else if (k == "scenario.cue_split") c.scenario.cue_split = num<double>(k, v);
    else if (k == "scenario.through_traffic") c.scenario.through_traffic = num<double>(k, v);
    else if (k == "scenario.vru_min") c.scenario.vru_min = num<int>(k, v);
    else if (k == "scenario.vru_max") c.scenario.vru_max = num<int>(k, v);
    else if (k == "scenario.bike_fraction") c.scenario.bike_fraction = num<double>(k, v);
    else if (k == "scenario.max_steps") c.scenario.max_steps = num<int>(k, v);
    else if (k == "render.v_cap") c.render.v_cap = num<double>(k, v);
    else if (k == "split.train_ratio") c.split.train_ratio = num<double>(k, v);
    else if (k == "split.val_fraction") c.split.val_fraction = num<double>(k, v);
    else if (k == "split.seed") c.split.seed = num<std::uint64_t>(k, v);
    else if (k == "split.max_length") {
      const int m = num<int>(k, v);
      c.split.max_length = m > 0 ? std::optional<int>(m) : std::nullopt;
    } else if (k == "model.row") c.row = v;
    else if (k.rfind("model.", 0) == 0) {
      const std::string sub = k.substr(6);
      if (sub == "width" || sub == "height") {
        throw ConfigError("model." + sub + " follows the dataset; set scenario." + sub + " instead");
      }
      c.model_overrides[sub] = v;
    } else if (k.rfind("train.", 0) == 0) train_kv[k.substr(6)] = v;
    else if (k == "eval.samples") c.eval.samples = num<int>(k, v);
    else if (k == "eval.repeats") c.eval.repeats = num<int>(k, v);
    else if (k == "eval.seed") c.eval.seed = num<std::uint64_t>(k, v);
    else if (k == "eval.max_items") c.eval.max_items = num<int>(k, v);
    else if (k == "output.root") c.output_root = v;
    else if (k == "output.run_dir") c.run_dir = v;
    else if (k == "threads") c.threads = num<int>(k, v);
    else if (k == "free_form") c.free_form = flag(k, v);
    else throw ConfigError("unknown config key '" + k + "'");
  }
  c.train = model::TrainConfig::from_map(train_kv);
  c.validate();
  return c;
}

KeyValues parse_key_values(std::string_view text, const std::string & origin)
{
  KeyValues kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) {
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    if (!kv.emplace(key, value).second) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read config " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str(), path.string());
}

std::string format_key_values(const KeyValues & kv)
{
  std::string out;
  for (const auto & [k, v] : kv) {
    out += k + " = " + v + "\n";
  }
  return out;
}

void write_key_values(const std::filesystem::path & path, const KeyValues & kv)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << format_key_values(kv);
}

std::pair<std::string, std::string> parse_override(std::string_view s)
{
  const auto eq = s.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(s) + "' is not key=value");
  }
  return {trim(s.substr(0, eq)), trim(s.substr(eq + 1))};
}

ExperimentConfig resolve_config(const std::filesystem::path & file, const std::vector<std::string> & overrides,
                                const std::function<const char *(const char *)> & getenv)
{
  const auto env = getenv ? getenv : [](const char * name) -> const char * { return std::getenv(name); };
  KeyValues kv;
  if (!file.empty()) {
    kv = read_key_values(file);
  }
  if (const char * root = env("VRU_OUTPUT_ROOT"); root && *root) {
    kv["output.root"] = root;
  }
  if (const char * threads = env("VRU_THREADS"); threads && *threads) {
    kv["threads"] = threads;
  }
  for (const auto & o : overrides) {
    const auto [k, v] = parse_override(o);
    kv[k] = v;
  }
  return ExperimentConfig::from_map(kv);
}

}  // namespace vru::cli
