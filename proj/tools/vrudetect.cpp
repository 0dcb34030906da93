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

// vrudetect: generate | train | eval | ablate | crosseval | report
//
// Prints one JSON object describing the result on stdout and exits 0. On failure prints
// {"error": {"kind": ..., "message": ...}} on stderr and exits nonzero (2 for usage
// errors, 1 otherwise).

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vru/cli/commands.hpp"
#include "vru/cli/config.hpp"
#include "vru/cli/report.hpp"
#include "vru/core/error.hpp"

namespace
{

using nlohmann::json;
using namespace vru;
using namespace vru::cli;

void fail_json(const std::string & kind, const std::string & message)
{
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << std::endl;
}

json metrics_json(const eval::MetricsSummary & s)
{
  auto one = [](const eval::MetricsReport & m) {
    auto v = [](double x) { return std::isnan(x) ? json(nullptr) : json(x); };
    return json{{"accuracy", v(m.accuracy)}, {"precision", v(m.precision)}, {"recall", v(m.recall)}, {"f1", v(m.f1)}};
  };
  json j{{"runs", s.runs}, {"mean", one(s.mean)}};
  if (s.stddev) {
    j["std"] = one(*s.stddev);
  }
  return j;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Vehicle / vulnerable road user interaction detection experiments"};
  app.require_subcommand(1);

  std::string config_file;
  std::vector<std::string> sets;
  std::string data_dir;
  std::string run_dir;
  std::string row;
  std::string parsing;
  int n_per_class = -1;
  int epochs = -1;
  long long seed = -1;
  int samples = -1;
  int repeats = -1;

  auto common = [&](CLI::App * sub) {
    sub->add_option("-c,--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("-s,--set", sets, "override, key=value (repeatable)");
    sub->add_option("--run-dir", run_dir, "write into this directory instead of a timestamped one");
  };
  auto data_opt = [&](CLI::App * sub) { sub->add_option("-d,--data", data_dir, "dataset directory (data.dir)"); };
  auto train_opts = [&](CLI::App * sub) {
    sub->add_option("--row", row, "model row, e.g. C+ob+op+att (model.row)");
    sub->add_option("--parsing", parsing, "sliding or padding (train.parsing)");
    sub->add_option("--epochs", epochs, "training epochs (train.epochs)");
    sub->add_option("--seed", seed, "training seed (train.seed)");
  };
  auto eval_opts = [&](CLI::App * sub) {
    sub->add_option("--samples", samples, "latent samples per sequence (eval.samples)");
    sub->add_option("--repeats", repeats, "repeated sampled evaluations (eval.repeats)");
  };

  auto * gen = app.add_subcommand("generate", "simulate a labelled dataset");
  common(gen);
  data_opt(gen);
  gen->add_option("-n,--n-per-class", n_per_class, "sequences per class (data.n_per_class)");

  auto * train = app.add_subcommand("train", "train a model on a dataset's train split");
  common(train);
  data_opt(train);
  train_opts(train);

  std::string checkpoint;
  auto * ev = app.add_subcommand("eval", "evaluate a checkpoint on a dataset's test split");
  common(ev);
  data_opt(ev);
  eval_opts(ev);
  ev->add_option("--checkpoint", checkpoint, "model.ckpt from train")->required()->check(CLI::ExistingFile);

  auto * ablate = app.add_subcommand("ablate", "train and evaluate the five model rows in both parsing modes");
  common(ablate);
  data_opt(ablate);
  train_opts(ablate);
  eval_opts(ablate);

  std::string target;
  std::string resize;
  bool mirror = false;
  auto * cross = app.add_subcommand("crosseval", "evaluate a checkpoint on another dataset");
  common(cross);
  eval_opts(cross);
  cross->add_option("--checkpoint", checkpoint, "model.ckpt from train")->required()->check(CLI::ExistingFile);
  cross->add_option("--target", target, "dataset to evaluate on")->required();
  cross->add_option("--resize", resize, "WxH applied to the target frames");
  cross->add_flag("--mirror", mirror, "mirror the target frames along x");

  std::string report_dir;
  auto * report = app.add_subcommand("report", "render figures and tables from a run directory");
  report->add_option("run_dir", report_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    fail_json("usage", e.what());
    return 2;
  }

  try {
    if (report->parsed()) {
      const auto dirs = cmd_report(report_dir);
      json j{{"command", "report"}, {"report", (std::filesystem::path(report_dir) / "report").string()}};
      for (const auto & d : dirs) j["sections"].push_back(d.string());
      std::cout << j.dump(2) << std::endl;
      return 0;
    }

    // Flags are the last layer of the precedence chain.
    std::vector<std::string> overrides = sets;
    if (!data_dir.empty()) overrides.push_back("data.dir=" + data_dir);
    if (!run_dir.empty()) overrides.push_back("output.run_dir=" + run_dir);
    if (!row.empty()) overrides.push_back("model.row=" + row);
    if (!parsing.empty()) overrides.push_back("train.parsing=" + parsing);
    if (n_per_class >= 0) overrides.push_back("data.n_per_class=" + std::to_string(n_per_class));
    if (epochs >= 0) overrides.push_back("train.epochs=" + std::to_string(epochs));
    if (seed >= 0) overrides.push_back("train.seed=" + std::to_string(seed));
    if (samples >= 0) overrides.push_back("eval.samples=" + std::to_string(samples));
    if (repeats >= 0) overrides.push_back("eval.repeats=" + std::to_string(repeats));
    const ExperimentConfig cfg = resolve_config(config_file, overrides);

    json out;
    if (gen->parsed()) {
      const auto dir = make_run_dir(cfg, "generate");
      const auto r = cmd_generate(cfg, dir);
      out = {{"command", "generate"},
             {"run_dir", dir.string()},
             {"dataset", r.dataset.string()},
             {"sequences", r.sequences},
             {"train", r.split.train.size()},
             {"validation", r.split.validation.size()},
             {"test", r.split.test.size()}};
    } else if (train->parsed()) {
      const auto dir = make_run_dir(cfg, "train");
      const auto r = cmd_train(cfg, dir, [](const model::EpochRecord & e) {
        std::fprintf(stderr, "epoch %d  kl %.4f  recon %.4f  total %.4f  val %.4f\n", e.epoch, e.kl, e.recon, e.total,
                     e.val_total);
      });
      out = {{"command", "train"}, {"run_dir", dir.string()}, {"checkpoint", r.checkpoint.string()}};
      if (!r.epochs.empty()) out["final_total"] = r.epochs.back().total;
    } else if (ev->parsed()) {
      const auto dir = make_run_dir(cfg, "eval");
      const auto o = cmd_eval(cfg, checkpoint, dir);
      out = {{"command", "eval"}, {"run_dir", dir.string()}, {"model", o.model_tag}, {"parsing", o.parsing},
             {"metrics", metrics_json(o.summary)}};
      std::cerr << eval::format_table(std::vector<eval::MetricsRow>{{o.model_tag, o.parsing, o.summary}});
    } else if (ablate->parsed()) {
      const auto dir = make_run_dir(cfg, "ablate");
      const auto r = cmd_ablate(cfg, dir);
      out = {{"command", "ablate"}, {"run_dir", dir.string()}, {"failures", r.failures}};
      for (const auto & row_result : r.rows) {
        out["rows"].push_back(
            {{"model", row_result.model}, {"parsing", row_result.parsing}, {"metrics", metrics_json(row_result.summary)}});
      }
      std::cerr << eval::format_table(r.rows);
      if (!r.failures.empty()) {
        std::cout << out.dump(2) << std::endl;
        fail_json("ablation", std::to_string(r.failures.size()) + " cell(s) failed; see failures.json");
        return 1;
      }
    } else if (cross->parsed()) {
      ingest::FrameTransform t;
      t.mirror = mirror;
      if (!resize.empty()) {
        int w = 0, h = 0;
        char x = 0;
        if (std::sscanf(resize.c_str(), "%d%c%d", &w, &x, &h) != 3 || (x != 'x' && x != 'X') || w < 1 || h < 1) {
          throw ConfigError("--resize expects WxH, got '" + resize + "'");
        }
        t.width = w;
        t.height = h;
      }
      const auto dir = make_run_dir(cfg, "crosseval");
      const auto o = cmd_crosseval(cfg, checkpoint, target, t, dir);
      out = {{"command", "crosseval"}, {"run_dir", dir.string()}, {"model", o.model_tag},
             {"metrics", metrics_json(o.summary)}};
    }
    std::cout << out.dump(2) << std::endl;
    return 0;
  } catch (const TrainingError & e) {
    std::cerr << json{{"error", {{"kind", e.kind()}, {"message", e.what()}, {"dump", e.dump_path()}}}}.dump()
              << std::endl;
    return 1;
  } catch (const Error & e) {
    fail_json(e.kind(), e.what());
    return 1;
  } catch (const std::exception & e) {
    fail_json("internal", e.what());
    return 1;
  }
}
