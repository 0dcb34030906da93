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

#include "vru/cli/commands.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "vru/core/error.hpp"
#include "vru/core/rng.hpp"
#include "vru/ingest/container.hpp"
#include "vru/model/checkpoint.hpp"
#include "vru/model/infer.hpp"

namespace vru::cli
{

namespace
{

constexpr std::uint64_t kEvalTag = 0xe7a1;

std::string dataset_id(int i)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "seq_%05d", i);
  return buf;
}

ingest::DatasetSplit load_split(const fs::path & root, const ingest::SequenceSource & data,
                                const ingest::SplitConfig & fallback)
{
  if (fs::exists(root / kSplitFile)) {
    return ingest::read_split_manifest(root / kSplitFile);
  }
  const auto infos = data.infos();
  return ingest::build_splits(infos, fallback);
}

fs::path require_data_dir(const ExperimentConfig & cfg)
{
  if (cfg.data_dir.empty()) {
    throw ConfigError("data.dir is not set; pass --data or data.dir=<dataset>");
  }
  if (!fs::exists(cfg.data_dir / "dataset.json")) {
    throw IoError("no dataset at " + cfg.data_dir.string() + " (dataset.json missing)");
  }
  return cfg.data_dir;
}

void write_text(const fs::path & path, const std::string & text)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << text;
}

std::string g(double v, int digits = 17)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace

fs::path make_run_dir(const ExperimentConfig & cfg, std::string_view command)
{
  fs::path dir = cfg.run_dir;
  if (dir.empty()) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    localtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
    const fs::path base = cfg.output_root / (std::string(stamp) + "-" + std::string(command));
    dir = base;
    for (int k = 2; fs::exists(dir); ++k) {
      dir = base.string() + "-" + std::to_string(k);
    }
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create run directory " + dir.string() + ": " + ec.message());
  }
  write_key_values(dir / "config.txt", cfg.to_map());
  return dir;
}

GenerateResult cmd_generate(const ExperimentConfig & cfg, const fs::path & run_dir)
{
  if (cfg.n_per_class < 1) {
    throw DataError("refusing to generate an empty dataset (data.n_per_class = " + std::to_string(cfg.n_per_class) +
                    ")");
  }
  GenerateResult r;
  r.dataset = cfg.data_dir.empty() ? run_dir / "dataset" : cfg.data_dir;
  std::error_code ec;
  fs::create_directories(r.dataset, ec);
  if (ec) {
    throw IoError("cannot create dataset directory " + r.dataset.string() + ": " + ec.message());
  }

  std::vector<sim::Scenario> scenarios;
  std::vector<std::string> ids;
  sim::ScenarioConfig sc = cfg.scenario;
  for (int i = 0; i < 2 * cfg.n_per_class; ++i) {
    sc.target = i % 2 == 0 ? sim::ClassTarget::interaction : sim::ClassTarget::non_interaction;
    scenarios.push_back(sim::gen_scenario(sc, derive_seed(cfg.data_seed, {static_cast<std::uint64_t>(i)})));
    ids.push_back(dataset_id(i));
  }
  const ingest::ScenarioSource source(scenarios, ids, cfg.render, cfg.scenario.label_rule);

  ingest::DatasetHeader header;
  header.width = cfg.scenario.width;
  header.height = cfg.scenario.height;
  header.frame_rate = cfg.scenario.step_rate;
  header.ids = ids;
  for (const auto & [k, v] : cfg.to_map()) {
    if (k.rfind("scenario.", 0) == 0 || k.rfind("render.", 0) == 0 || k == "data.n_per_class" || k == "data.seed") {
      header.meta[k] = v;
    }
  }
  ingest::write_dataset_header(r.dataset, header);
  ingest::write_mask(r.dataset / "mask.bin", source.scenario(0).region_mask);
  for (std::size_t i = 0; i < source.size(); ++i) {
    ingest::write_sequence(r.dataset / ids[i], source.load(i));
  }
  const auto infos = source.infos();
  r.split = ingest::build_splits(infos, cfg.split);
  ingest::write_split_manifest(r.dataset / kSplitFile, r.split);
  r.sequences = static_cast<int>(source.size());
  return r;
}

TrainResult cmd_train(const ExperimentConfig & cfg, const fs::path & run_dir, const model::EpochCallback & on_epoch)
{
  const fs::path root = require_data_dir(cfg);
  const ingest::ContainerSource data(root);
  const auto split = load_split(root, data, cfg.split);
  const ingest::SubsetSource train(data, data.indices_of(split.train));
  const ingest::SubsetSource val(data, data.indices_of(split.validation));
  if (train.size() == 0) {
    throw DataError("the train split of " + root.string() + " is empty");
  }
  const model::ModelConfig mc = cfg.model_config(data.width(), data.height());
  model::TrainConfig tc = cfg.train;
  tc.dump_dir = run_dir;
  const model::TrainState state = model::train(train, val.size() > 0 ? &val : nullptr, mc, tc, on_epoch);
  TrainResult r;
  r.checkpoint = run_dir / "model.ckpt";
  model::write_checkpoint(r.checkpoint, state);
  model::write_loss_csv(run_dir / "loss.csv", state.epochs);
  r.epochs = state.epochs;
  return r;
}

EvalOutcome evaluate(model::SeqModel & model, const ingest::SequenceSource & test, const model::ParsingConfig & parsing,
                     const EvalConfig & cfg)
{
  if (test.size() == 0) {
    throw DataError("nothing to evaluate: the test set is empty");
  }
  const bool stochastic = model.config().variant == model::Variant::cvae;
  const int repeats = stochastic ? cfg.repeats : 1;
  EvalOutcome out;
  out.model_tag = model.config().tag();
  out.parsing = model::to_string(parsing.mode);
  out.infos = test.infos();
  std::vector<std::vector<sim::Interaction>> votes(static_cast<std::size_t>(repeats));
  std::vector<sim::Interaction> truths;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const ingest::TurningSequence seq = test.load(i);
    truths.push_back(seq.info.label.value);
    for (int r = 0; r < repeats; ++r) {
      model::InferConfig ic;
      ic.samples = cfg.samples;
      ic.seed = derive_seed(cfg.seed, {kEvalTag, static_cast<std::uint64_t>(r)});
      ic.max_items = cfg.max_items;
      auto ens = model::infer(model, seq, parsing, ic);
      votes[static_cast<std::size_t>(r)].push_back(eval::vote(ens));
      if (r == 0) {
        out.ensembles.push_back(std::move(ens));
      }
    }
  }
  std::vector<eval::MetricsReport> reports;
  for (const auto & v : votes) {
    out.runs.push_back(eval::confusion(v, truths));
    reports.push_back(eval::metrics(out.runs.back()));
  }
  out.summary = eval::summarize(reports);
  out.predictions = votes.front();
  out.gamma = uncertainty::uncertainty_batch(out.ensembles);
  return out;
}

void write_eval_artifacts(const fs::path & dir, const EvalOutcome & o)
{
  fs::create_directories(dir);
  const std::vector<eval::MetricsRow> rows{{o.model_tag, o.parsing, o.summary}};
  eval::write_metrics_csv(dir / "metrics.csv", rows);
  eval::write_runs_csv(dir / "runs.csv", o.runs);
  write_text(dir / "table.txt", eval::format_table(rows));

  std::ofstream gamma(dir / "gamma.csv");
  if (!gamma) {
    throw IoError("cannot write " + (dir / "gamma.csv").string());
  }
  gamma << "id,label,prediction,ambiguous,cue,gamma\n";
  for (std::size_t i = 0; i < o.infos.size(); ++i) {
    const auto & info = o.infos[i];
    gamma << info.id << ',' << sim::to_string(info.label.value) << ',' << sim::to_string(o.predictions[i]) << ','
          << (info.ambiguous ? 1 : 0) << ',' << sim::to_string(info.cue) << ',' << g(o.gamma[i].gamma) << '\n';
  }

  std::ofstream ens(dir / "ensembles.csv");
  if (!ens) {
    throw IoError("cannot write " + (dir / "ensembles.csv").string());
  }
  const int n = o.ensembles.empty() ? 0 : o.ensembles.front().samples();
  ens << "id,step,valid";
  for (int s = 0; s < n; ++s) {
    ens << ",p" << s;
  }
  ens << '\n';
  for (const auto & e : o.ensembles) {
    for (int t = 0; t < e.steps(); ++t) {
      ens << e.id << ',' << t << ',' << int(e.valid[static_cast<std::size_t>(t)]);
      for (int s = 0; s < e.samples(); ++s) {
        ens << ',' << g(e.interaction(s, t), 9);
      }
      ens << '\n';
    }
  }
}

EvalOutcome cmd_eval(const ExperimentConfig & cfg, const fs::path & checkpoint, const fs::path & run_dir)
{
  const fs::path root = require_data_dir(cfg);
  model::TrainState state = model::read_checkpoint(checkpoint);
  const ingest::ContainerSource data(root);
  const auto split = load_split(root, data, cfg.split);
  const ingest::SubsetSource test(data, data.indices_of(split.test));
  EvalOutcome o = evaluate(*state.model, test, state.train_config.parsing, cfg.eval);
  write_eval_artifacts(run_dir, o);
  return o;
}

AblationResult cmd_ablate(const ExperimentConfig & cfg, const fs::path & run_dir)
{
  struct Cell
  {
    std::string row;
    model::ParsingMode mode;
    std::optional<eval::MetricsRow> result;
    std::string error;
  };
  std::vector<Cell> cells;
  for (auto mode : {model::ParsingMode::sliding, model::ParsingMode::padding}) {
    for (auto row : kAblationRows) {
      cells.push_back({std::string(row), mode, std::nullopt, {}});
    }
  }
  const fs::path root = require_data_dir(cfg);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      Cell & c = cells[i];
      try {
        ExperimentConfig sub = cfg;
        sub.row = c.row;
        sub.train.parsing.mode = c.mode;
        sub.run_dir = run_dir / (c.row + "_" + model::to_string(c.mode));
        sub.data_dir = root;
        const fs::path dir = make_run_dir(sub, "cell");
        const TrainResult tr = cmd_train(sub, dir);
        const EvalOutcome o = cmd_eval(sub, tr.checkpoint, dir);
        c.result = eval::MetricsRow{o.model_tag, o.parsing, o.summary};
      } catch (const std::exception & e) {
        c.error = e.what();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto & t : pool) {
    t.join();
  }

  AblationResult r;
  nlohmann::json failures = nlohmann::json::array();
  for (const auto & c : cells) {
    if (c.result) {
      r.rows.push_back(*c.result);
    } else {
      r.failures.push_back(c.row + " " + model::to_string(c.mode) + ": " + c.error);
      failures.push_back({{"row", c.row}, {"parsing", model::to_string(c.mode)}, {"error", c.error}});
    }
  }
  eval::write_metrics_csv(run_dir / "metrics.csv", r.rows);
  write_text(run_dir / "table.txt", eval::format_table(r.rows));
  write_text(run_dir / "failures.json", failures.dump(2) + "\n");
  return r;
}

EvalOutcome cmd_crosseval(const ExperimentConfig & cfg, const fs::path & checkpoint, const fs::path & dataset,
                          const ingest::FrameTransform & transform, const fs::path & run_dir)
{
  model::TrainState state = model::read_checkpoint(checkpoint);
  const model::ModelConfig & mc = state.model->config();
  const ingest::ContainerSource data(dataset);
  std::vector<std::size_t> idx;
  if (fs::exists(dataset / kSplitFile)) {
    idx = data.indices_of(ingest::read_split_manifest(dataset / kSplitFile).test);
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) idx.push_back(i);
  }
  const ingest::SubsetSource subset(data, idx);
  const ingest::TransformSource moved(subset, transform);
  if (moved.width() != mc.width || moved.height() != mc.height) {
    throw DimensionError("transformed frames are " + std::to_string(moved.width()) + "x" +
                         std::to_string(moved.height()) + " but the model expects " + std::to_string(mc.width) +
                         "x" + std::to_string(mc.height) + "; pass --resize");
  }
  EvalOutcome o = evaluate(*state.model, moved, state.train_config.parsing, cfg.eval);
  write_eval_artifacts(run_dir, o);
  return o;
}

}  // namespace vru::cli
