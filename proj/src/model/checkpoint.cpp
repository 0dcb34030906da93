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

#include "vru/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <map>

#include "vru/core/error.hpp"

namespace vru::model
{

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace
{

constexpr char kMagic[8] = {'V', 'R', 'U', 'C', 'K', 'P', 'T', '\0'};
// Dimension sanity bound for corrupted headers.
constexpr std::uint32_t kMaxDim = 1u << 26;

template <typename T>
void put(std::ostream & out, T v)
{
  out.write(reinterpret_cast<const char *>(&v), sizeof v);
}

template <typename T>
T get(std::istream & in, const std::string & what)
{
  T v{};
  if (!in.read(reinterpret_cast<char *>(&v), sizeof v)) {
    throw DataError("checkpoint truncated while reading " + what);
  }
  return v;
}

void put_tensor(std::ostream & out, const std::string & name, const Mat & m)
{
  put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  // Row-major on disk regardless of the in-memory layout.
  const RMat r = m;
  out.write(reinterpret_cast<const char *>(r.data()), static_cast<std::streamsize>(r.size() * sizeof(double)));
}

Mat history_steps(const std::vector<ElboTerms> & s)
{
  Mat m(static_cast<Eigen::Index>(s.size()), 3);
  for (std::size_t i = 0; i < s.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) << s[i].kl, s[i].recon, s[i].total;
  }
  return m;
}

Mat history_epochs(const std::vector<EpochRecord> & e)
{
  Mat m(static_cast<Eigen::Index>(e.size()), 5);
  for (std::size_t i = 0; i < e.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) << e[i].epoch, e[i].kl, e[i].recon, e[i].total, e[i].val_total;
  }
  return m;
}

}  // namespace

void write_checkpoint(const std::filesystem::path & path, const TrainState & state)
{
  if (!state.model) {
    throw ConfigError("write_checkpoint: state has no model");
  }
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write checkpoint " + path.string());
  }
  nlohmann::json header;
  header["model"] = state.model->config().to_map();
  header["train"] = state.train_config.to_map();
  header["seed"] = state.seed;
  header["epoch"] = state.epoch;
  header["adam_steps"] = state.optimizer.steps();
  const std::string js = header.dump();

  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(js.size()));
  out.write(js.data(), static_cast<std::streamsize>(js.size()));

  const ParamSet & params = state.model->params();
  const auto all = params.all();
  const auto & m = state.optimizer.first_moments();
  const auto & v = state.optimizer.second_moments();
  std::vector<std::string> trainable;
  for (const Param * p : all) {
    if (p->trainable) {
      trainable.push_back(p->name);
    }
  }
  const bool has_moments = m.size() == trainable.size();
  const std::size_t count = all.size() + (has_moments ? 2 * m.size() : 0) + 2;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(count));
  for (const Param * p : all) {
    put_tensor(out, p->name, p->value);
  }
  if (has_moments) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      put_tensor(out, "adam.m/" + trainable[i], m[i]);
      put_tensor(out, "adam.v/" + trainable[i], v[i]);
    }
  }
  put_tensor(out, "history.steps", history_steps(state.step_losses));
  put_tensor(out, "history.epochs", history_epochs(state.epochs));
  if (!out) {
    throw IoError("failed writing checkpoint " + path.string());
  }
}

TrainState read_checkpoint(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open checkpoint " + path.string());
  }
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw DataError(path.string() + " is not a vrudetect checkpoint");
  }
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto jlen = get<std::uint32_t>(in, "header length");
  if (jlen > kMaxDim) {
    throw DataError("checkpoint header is implausibly large");
  }
  std::string js(jlen, '\0');
  if (!in.read(js.data(), jlen)) {
    throw DataError("checkpoint truncated in header");
  }
  TrainState s;
  try {
    const auto header = nlohmann::json::parse(js);
    const auto mc = ModelConfig::from_map(header.at("model").get<std::map<std::string, std::string>>());
    s.train_config = TrainConfig::from_map(header.at("train").get<std::map<std::string, std::string>>());
    s.seed = header.at("seed").get<std::uint64_t>();
    s.epoch = header.at("epoch").get<int>();
    s.model = std::make_unique<SeqModel>(mc, s.seed);
    s.optimizer = Adam(s.train_config.adam, s.model->params());
    s.optimizer.set_steps(header.at("adam_steps").get<long long>());
  } catch (const nlohmann::json::exception & e) {
    throw DataError("malformed checkpoint header: " + std::string(e.what()));
  }

  std::map<std::string, Mat> tensors;
  const auto count = get<std::uint32_t>(in, "tensor count");
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto nlen = get<std::uint32_t>(in, "tensor name");
    if (nlen > 4096) {
      throw DataError("checkpoint tensor name is implausibly long");
    }
    std::string name(nlen, '\0');
    if (!in.read(name.data(), nlen)) {
      throw DataError("checkpoint truncated in tensor name");
    }
    const auto rows = get<std::uint32_t>(in, name);
    const auto cols = get<std::uint32_t>(in, name);
    if (rows > kMaxDim || cols > kMaxDim || static_cast<std::uint64_t>(rows) * cols > kMaxDim) {
      throw DataError("checkpoint tensor " + name + " has implausible shape");
    }
    RMat r(rows, cols);
    if (!in.read(reinterpret_cast<char *>(r.data()), static_cast<std::streamsize>(r.size() * sizeof(double)))) {
      throw DataError("checkpoint truncated in tensor " + name);
    }
    tensors[name] = r;
  }

  auto take = [&](const std::string & name, Eigen::Index rows, Eigen::Index cols) -> Mat {
    auto it = tensors.find(name);
    if (it == tensors.end()) {
      throw DataError("checkpoint lacks tensor " + name);
    }
    if ((rows >= 0 && it->second.rows() != rows) || it->second.cols() != cols) {
      throw DataError("checkpoint tensor " + name + " has the wrong shape");
    }
    return it->second;
  };
  std::size_t ti = 0;
  for (Param * p : s.model->params().all()) {
    p->value = take(p->name, p->value.rows(), p->value.cols());
    if (p->trainable) {
      const std::string mn = "adam.m/" + p->name;
      if (tensors.count(mn)) {
        s.optimizer.first_moments()[ti] = take(mn, p->value.rows(), p->value.cols());
        s.optimizer.second_moments()[ti] = take("adam.v/" + p->name, p->value.rows(), p->value.cols());
      }
      ++ti;
    }
  }
  const Mat steps = take("history.steps", -1, 3);
  for (Eigen::Index i = 0; i < steps.rows(); ++i) {
    s.step_losses.push_back({steps(i, 2), steps(i, 0), steps(i, 1)});
  }
  const Mat epochs = take("history.epochs", -1, 5);
  for (Eigen::Index i = 0; i < epochs.rows(); ++i) {
    s.epochs.push_back({static_cast<int>(epochs(i, 0)), epochs(i, 1), epochs(i, 2), epochs(i, 3), epochs(i, 4)});
  }
  return s;
}

}  // namespace vru::model
