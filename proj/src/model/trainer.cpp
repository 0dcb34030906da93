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

#include "vru/model/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "vru/core/error.hpp"
#include "vru/model/checkpoint.hpp"

namespace vru::model
{

namespace
{

constexpr std::uint64_t kOrderTag = 0xe90c;
constexpr std::uint64_t kNoiseTag = 0x4015e;
constexpr std::uint64_t kValTag = 0x7a1;

std::string fmt(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Mat normal_noise(int rows, int cols, Rng & rng)
{
  std::normal_distribution<double> n;
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = n(rng);
  }
  return m;
}

template <typename T>
T parse_num(const std::string & key, const std::string & s)
{
  try {
    std::size_t pos = 0;
    T v{};
    if constexpr (std::is_same_v<T, double>) {
      v = std::stod(s, &pos);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!s.empty() && s[0] == '-') {
        throw std::invalid_argument(s);
      }
      v = std::stoull(s, &pos);
    } else {
      v = std::stoi(s, &pos);
    }
    if (pos != s.size()) {
      throw std::invalid_argument(s);
    }
    return v;
  } catch (const std::exception &) {
    throw ConfigError("train." + key + ": cannot parse '" + s + "'");
  }
}

[[noreturn]] void diverged(TrainState & state, const std::string & what)
{
  std::string dump;
  if (!state.train_config.dump_dir.empty()) {
    std::filesystem::create_directories(state.train_config.dump_dir);
    const auto path = state.train_config.dump_dir / ("diverged_epoch" + std::to_string(state.epoch) + ".ckpt");
    write_checkpoint(path, state);
    dump = path.string();
  }
  throw TrainingError("training diverged at epoch " + std::to_string(state.epoch + 1) + ", step " +
                          std::to_string(state.step_losses.size()) + ": " + what,
                      dump);
}

}  // namespace

void TrainConfig::validate() const
{
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (group_sequences < 1) throw ConfigError("group_sequences must be >= 1");
  parsing.validate();
}

std::map<std::string, std::string> TrainConfig::to_map() const
{
  return {{"epochs", std::to_string(epochs)},
          {"batch_size", std::to_string(batch_size)},
          {"learning_rate", fmt(adam.learning_rate)},
          {"beta1", fmt(adam.beta1)},
          {"beta2", fmt(adam.beta2)},
          {"epsilon", fmt(adam.epsilon)},
          {"parsing", to_string(parsing.mode)},
          {"window", std::to_string(parsing.window)},
          {"stride", std::to_string(parsing.stride)},
          {"t_star", std::to_string(parsing.t_star)},
          {"seed", std::to_string(seed)},
          {"group_sequences", std::to_string(group_sequences)}};
}

TrainConfig TrainConfig::from_map(const std::map<std::string, std::string> & kv)
{
  TrainConfig c;
  for (const auto & [k, v] : kv) {
    if (k == "epochs") c.epochs = parse_num<int>(k, v);
    else if (k == "batch_size") c.batch_size = parse_num<int>(k, v);
    else if (k == "learning_rate") c.adam.learning_rate = parse_num<double>(k, v);
    else if (k == "beta1") c.adam.beta1 = parse_num<double>(k, v);
    else if (k == "beta2") c.adam.beta2 = parse_num<double>(k, v);
    else if (k == "epsilon") c.adam.epsilon = parse_num<double>(k, v);
    else if (k == "parsing") c.parsing.mode = parse_parsing_mode(v);
    else if (k == "window") c.parsing.window = parse_num<int>(k, v);
    else if (k == "stride") c.parsing.stride = parse_num<int>(k, v);
    else if (k == "t_star") c.parsing.t_star = parse_num<int>(k, v);
    else if (k == "seed") c.seed = parse_num<std::uint64_t>(k, v);
    else if (k == "group_sequences") c.group_sequences = parse_num<int>(k, v);
    else throw ConfigError("unknown training key '" + k + "'");
  }
  c.validate();
  return c;
}

TrainState init_state(const ModelConfig & mc, const TrainConfig & tc)
{
  tc.validate();
  TrainState s;
  s.model = std::make_unique<SeqModel>(mc, tc.seed);
  s.optimizer = Adam(tc.adam, s.model->params());
  s.train_config = tc;
  s.seed = tc.seed;
  return s;
}

void train_epochs(TrainState & state, const ingest::SequenceSource & train, const ingest::SequenceSource * val,
                  const EpochCallback & on_epoch)
{
  const TrainConfig & tc = state.train_config;
  tc.validate();
  if (train.size() == 0) {
    throw DataError("training split is empty");
  }
  SeqModel & model = *state.model;
  const ModelConfig & mc = model.config();
  const bool cvae = mc.variant == Variant::cvae;
  const auto bs = static_cast<std::size_t>(tc.batch_size);

  while (state.epoch < tc.epochs) {
    const int epoch = state.epoch;
    Rng order_rng(derive_seed(state.seed, {kOrderTag, static_cast<std::uint64_t>(epoch)}));
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), order_rng);

    EpochRecord rec;
    rec.epoch = epoch + 1;
    std::size_t steps = 0;
    for (std::size_t g0 = 0; g0 < order.size(); g0 += static_cast<std::size_t>(tc.group_sequences)) {
      const std::size_t g1 = std::min(order.size(), g0 + static_cast<std::size_t>(tc.group_sequences));
      std::vector<ingest::TurningSequence> group;
      group.reserve(g1 - g0);
      for (std::size_t i = g0; i < g1; ++i) {
        group.push_back(train.load(order[i]));
      }
      std::vector<BatchUnit> units;
      for (const auto & seq : group) {
        const auto u = make_units(seq, tc.parsing);
        units.insert(units.end(), u.begin(), u.end());
      }
      std::shuffle(units.begin(), units.end(), order_rng);
      for (std::size_t b0 = 0; b0 < units.size(); b0 += bs) {
        const std::size_t n = std::min(bs, units.size() - b0);
        const SequenceBatch batch = assemble_batch(std::span<const BatchUnit>(units.data() + b0, n), mc);
        Rng noise_rng(derive_seed(state.seed, {kNoiseTag, state.step_losses.size()}));
        const Mat noise = cvae ? normal_noise(batch.batch, mc.latent_dim, noise_rng) : Mat();
        model.params().zero_grad();
        ForwardResult r;
        try {
          r = model.forward(batch, noise, true);
        } catch (const NumericError & e) {
          diverged(state, e.what());
        }
        model.backward();
        state.optimizer.step(model.params());
        state.step_losses.push_back(r.loss);
        rec.kl += r.loss.kl;
        rec.recon += r.loss.recon;
        rec.total += r.loss.total;
        ++steps;
      }
    }
    rec.kl /= static_cast<double>(steps);
    rec.recon /= static_cast<double>(steps);
    rec.total /= static_cast<double>(steps);
    if (!std::isfinite(rec.total)) {
      diverged(state, "non-finite epoch loss");
    }
    rec.val_total = (val != nullptr && val->size() > 0)
                        ? evaluate_loss(model, *val, tc.parsing, tc.batch_size, derive_seed(state.seed, {kValTag}))
                        : std::numeric_limits<double>::quiet_NaN();
    state.epochs.push_back(rec);
    state.epoch = epoch + 1;
    if (on_epoch) {
      on_epoch(rec);
    }
  }
}

TrainState train(const ingest::SequenceSource & train, const ingest::SequenceSource * val, const ModelConfig & mc,
                 const TrainConfig & tc, const EpochCallback & on_epoch)
{
  TrainState s = init_state(mc, tc);
  train_epochs(s, train, val, on_epoch);
  return s;
}

double evaluate_loss(SeqModel & model, const ingest::SequenceSource & source, const ParsingConfig & parsing,
                     int batch_size, std::uint64_t seed)
{
  const ModelConfig & mc = model.config();
  Rng rng(seed);
  double sum = 0.0;
  std::size_t count = 0;
  std::vector<ingest::TurningSequence> group;
  std::vector<BatchUnit> units;
  auto flush = [&]() {
    for (std::size_t b0 = 0; b0 < units.size(); b0 += static_cast<std::size_t>(batch_size)) {
      const std::size_t n = std::min(static_cast<std::size_t>(batch_size), units.size() - b0);
      const SequenceBatch batch = assemble_batch(std::span<const BatchUnit>(units.data() + b0, n), mc);
      const Mat noise = mc.variant == Variant::cvae ? normal_noise(batch.batch, mc.latent_dim, rng) : Mat();
      sum += model.forward(batch, noise, false).loss.total * static_cast<double>(n);
      count += n;
    }
    units.clear();
    group.clear();
  };
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (group.empty()) {
      group.reserve(64);
    }
    group.push_back(source.load(i));
    if (group.size() == 64 || i + 1 == source.size()) {
      for (const auto & seq : group) {
        const auto u = make_units(seq, parsing);
        units.insert(units.end(), u.begin(), u.end());
      }
      flush();
    }
  }
  return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

void write_loss_csv(const std::filesystem::path & path, const std::vector<EpochRecord> & epochs)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << "epoch,kl,recon,total,val_total\n";
  for (const auto & e : epochs) {
    out << e.epoch << ',' << fmt(e.kl) << ',' << fmt(e.recon) << ',' << fmt(e.total) << ',' << fmt(e.val_total)
        << '\n';
  }
}

}  // namespace vru::model
