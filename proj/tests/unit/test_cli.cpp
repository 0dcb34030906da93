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


#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "vru/cli/commands.hpp"
#include "vru/cli/config.hpp"
#include "vru/cli/report.hpp"
#include "vru/core/error.hpp"
#include "vru/ingest/container.hpp"

using namespace vru;
using namespace vru::cli;
namespace fs = std::filesystem;

namespace
{

fs::path scratch(const std::string & name)
{
  const auto d = fs::temp_directory_path() / ("vru_test_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path & p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Small frames and a small network keep every command under a second.
ExperimentConfig tiny(const fs::path & root, const std::vector<std::string> & extra = {})
{
  std::vector<std::string> o{"scenario.width=32",      "scenario.height=24",  "render.v_cap=1",
                             "data.n_per_class=6",     "model.conv_filters=4,6,8", "model.feature_dim=12",
                             "model.recurrent_hidden=8,6", "model.latent_dim=2", "train.epochs=1",
                             "eval.samples=5",         "eval.repeats=3",      "output.root=" + root.string()};
  o.insert(o.end(), extra.begin(), extra.end());
  return resolve_config({}, o, [](const char *) -> const char * { return nullptr; });
}

std::map<std::string, std::string> dir_bytes(const fs::path & root)
{
  std::map<std::string, std::string> m;
  for (const auto & e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      m[fs::relative(e.path(), root).string()] = slurp(e.path());
    }
  }
  return m;
}

}  // namespace

TEST_CASE("key-value files: comments, whitespace and errors")
{
  const auto kv = parse_key_values("# header\n a = 1 \nb=two # trailing\n\nc =\n");
  CHECK(kv.at("a") == "1");
  CHECK(kv.at("b") == "two");
  CHECK(kv.at("c").empty());
  CHECK_THROWS_AS(parse_key_values("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_key_values("just words\n"), ConfigError);
  CHECK_THROWS_AS(parse_key_values("= 3\n"), ConfigError);
  CHECK(parse_key_values(format_key_values(kv)) == kv);
  CHECK_THROWS_AS(parse_override("novalue"), ConfigError);
  CHECK(parse_override("train.epochs = 3") == std::pair<std::string, std::string>{"train.epochs", "3"});
}

TEST_CASE("experiment config round-trips and rejects unknown or inconsistent keys")
{
  const ExperimentConfig c = tiny("/tmp/x", {"train.parsing=padding", "model.row=C+ob+att", "split.max_length=0"});
  const ExperimentConfig back = ExperimentConfig::from_map(c.to_map());
  CHECK(back.to_map() == c.to_map());
  CHECK(back.train.parsing.mode == model::ParsingMode::padding);
  CHECK_FALSE(back.split.max_length.has_value());
  CHECK(c.model_config(32, 24).tag() == "C+ob+att");

  auto kv = c.to_map();
  kv["no.such.key"] = "1";
  CHECK_THROWS_AS(ExperimentConfig::from_map(kv), ConfigError);
  kv = c.to_map();
  kv["model.row"] = "S+op";
  CHECK_THROWS_AS(ExperimentConfig::from_map(kv), ConfigError);
  kv["free_form"] = "true";
  CHECK(ExperimentConfig::from_map(kv).model_config(32, 24).tag() == "S+op");
  kv = c.to_map();
  kv["model.attention"] = "false";
  CHECK_THROWS_AS(ExperimentConfig::from_map(kv), ConfigError);
  kv = c.to_map();
  kv["model.width"] = "64";
  CHECK_THROWS_AS(ExperimentConfig::from_map(kv), ConfigError);
  kv = c.to_map();
  kv["train.epochs"] = "many";
  CHECK_THROWS_AS(ExperimentConfig::from_map(kv), ConfigError);
}

TEST_CASE("every ablation row parses back to its own tag")
{
  for (auto row : kAblationRows) {
    model::ModelConfig mc;
    apply_row(mc, row);
    CHECK(mc.tag() == row);
    CHECK(is_ablation_row(row));
  }
  model::ModelConfig mc;
  CHECK_THROWS_AS(apply_row(mc, "C+att+ob"), ConfigError);
  CHECK_THROWS_AS(apply_row(mc, "X+ob"), ConfigError);
  CHECK_THROWS_AS(apply_row(mc, "C+ob+zz"), ConfigError);
}

TEST_CASE("config precedence: file, then environment, then overrides")
{
  const auto dir = scratch("precedence");
  {
    std::ofstream f(dir / "exp.cfg");
    f << "train.epochs = 4\noutput.root = from_file\nthreads = 1\neval.samples = 7\n";
  }
  auto env = [](const char * name) -> const char * {
    const std::string n = name;
    if (n == "VRU_OUTPUT_ROOT") return "from_env";
    if (n == "VRU_THREADS") return "3";
    return nullptr;
  };
  const ExperimentConfig a = resolve_config(dir / "exp.cfg", {}, env);
  CHECK(a.train.epochs == 4);
  CHECK(a.eval.samples == 7);
  CHECK(a.output_root == "from_env");
  CHECK(a.threads == 3);
  const ExperimentConfig b = resolve_config(dir / "exp.cfg", {"output.root=from_flag", "train.epochs=2"}, env);
  CHECK(b.output_root == "from_flag");
  CHECK(b.train.epochs == 2);
  CHECK_THROWS_AS(resolve_config(dir / "missing.cfg", {}, env), IoError);
  fs::remove_all(dir);
}

TEST_CASE("run directories are timestamped and echo the resolved config")
{
  const auto root = scratch("rundir");
  const ExperimentConfig c = tiny(root);
  const fs::path a = make_run_dir(c, "train");
  const fs::path b = make_run_dir(c, "train");
  CHECK(a != b);
  CHECK(a.parent_path() == root);
  CHECK(a.filename().string().find("-train") != std::string::npos);
  CHECK(read_key_values(a / "config.txt") == c.to_map());
  fs::remove_all(root);
}

TEST_CASE("generate writes a balanced dataset reproducibly and refuses empty ones")
{
  const auto root = scratch("generate");
  ExperimentConfig c = tiny(root);
  c.n_per_class = 5;
  c.data_dir = root / "d1";
  const auto r = cmd_generate(c, make_run_dir(c, "generate"));
  CHECK(r.sequences == 10);
  const ingest::ContainerSource data(r.dataset);
  int positives = 0;
  for (const auto & info : data.infos()) positives += info.label.value == sim::Interaction::interaction ? 1 : 0;
  CHECK(positives == 5);
  CHECK(fs::exists(r.dataset / kSplitFile));

  c.data_dir = root / "d2";
  cmd_generate(c, make_run_dir(c, "generate"));
  CHECK(dir_bytes(root / "d1") == dir_bytes(root / "d2"));

  c.n_per_class = 0;
  CHECK_THROWS_AS(cmd_generate(c, root), DataError);
  fs::remove_all(root);
}

TEST_CASE("train, eval, crosseval and report on a tiny dataset")
{
  const auto root = scratch("pipeline");
  ExperimentConfig c = tiny(root);
  c.data_dir = root / "data";
  cmd_generate(c, make_run_dir(c, "generate"));

  ExperimentConfig missing = c;
  missing.data_dir = root / "nowhere";
  CHECK_THROWS_AS(cmd_train(missing, root), IoError);
  missing.data_dir.clear();
  CHECK_THROWS_AS(cmd_train(missing, root), ConfigError);

  const fs::path train_dir = make_run_dir(c, "train");
  const TrainResult tr = cmd_train(c, train_dir);
  CHECK(fs::exists(tr.checkpoint));
  CHECK(fs::exists(train_dir / "loss.csv"));

  const fs::path eval_dir = make_run_dir(c, "eval");
  const EvalOutcome o = cmd_eval(c, tr.checkpoint, eval_dir);
  REQUIRE(o.runs.size() == 3);

  // The reported std is recomputable from the per-run CSV.
  const CsvTable runs = read_csv(eval_dir / "runs.csv");
  std::vector<double> f1;
  for (const auto & row : runs.rows) f1.push_back(std::stod(row[runs.column("f1")]));
  double mean = 0.0;
  for (double v : f1) mean += v / static_cast<double>(f1.size());
  double ss = 0.0;
  for (double v : f1) ss += (v - mean) * (v - mean);
  const auto grid = eval::read_metrics_csv(eval_dir / "metrics.csv");
  REQUIRE(grid.size() == 1);
  CHECK(grid[0].summary.mean.f1 == doctest::Approx(mean).epsilon(1e-12));
  REQUIRE(grid[0].summary.stddev.has_value());
  CHECK(grid[0].summary.stddev->f1 == doctest::Approx(std::sqrt(ss / (f1.size() - 1))).epsilon(1e-12));

  // Identity and same-size transforms reproduce the plain evaluation.
  const EvalOutcome same = cmd_crosseval(c, tr.checkpoint, c.data_dir, {}, make_run_dir(c, "crosseval"));
  CHECK(same.runs == o.runs);
  ingest::FrameTransform resize;
  resize.width = 32;
  resize.height = 24;
  const fs::path cross_dir = make_run_dir(c, "crosseval");
  cmd_crosseval(c, tr.checkpoint, c.data_dir, resize, cross_dir);
  CHECK(slurp(cross_dir / "ensembles.csv") == slurp(eval_dir / "ensembles.csv"));
  resize.width = 40;
  CHECK_THROWS_AS(cmd_crosseval(c, tr.checkpoint, c.data_dir, resize, root / "bad"), DimensionError);

  // Report: curves cover exactly the valid frames, bands are mean +- 1 std of the stored
  // samples, and regeneration is byte-identical.
  CHECK_THROWS_AS(cmd_report(train_dir), DataError);
  cmd_report(eval_dir);
  const auto ensembles = read_ensembles_csv(eval_dir / "ensembles.csv");
  const CsvTable curves = read_csv(eval_dir / "report" / "run" / "curves.csv");
  std::size_t valid = 0;
  for (const auto & e : ensembles) {
    for (auto v : e.valid) valid += v;
  }
  CHECK(curves.rows.size() == valid);
  std::size_t row = 0;
  for (const auto & e : ensembles) {
    const Eigen::RowVectorXd m = e.mean();
    const Eigen::RowVectorXd s = e.stddev();
    for (int t = 0; t < e.steps(); ++t) {
      if (!e.valid[static_cast<std::size_t>(t)]) continue;
      const auto & r = curves.rows[row++];
      CHECK(r[0] == e.id);
      CHECK(std::stod(r[2]) == doctest::Approx(m(t)).epsilon(1e-14));
      CHECK(std::stod(r[3]) == doctest::Approx(m(t) - s(t)).epsilon(1e-14));
      CHECK(std::stod(r[4]) == doctest::Approx(m(t) + s(t)).epsilon(1e-14));
    }
  }
  const auto before = dir_bytes(eval_dir / "report");
  cmd_report(eval_dir);
  CHECK(dir_bytes(eval_dir / "report") == before);

  // Numbers shown in report.md are the CSV strings.
  const std::string md = slurp(eval_dir / "report" / "report.md");
  const CsvTable box = read_csv(eval_dir / "report" / "run" / "gamma_box.csv");
  for (const auto & r : box.rows) {
    CHECK(md.find("| " + r[0] + " | " + r[1] + " | " + r[4] + " | " + r[7] + " |") != std::string::npos);
  }
  const CsvTable cm = read_csv(eval_dir / "report" / "run" / "confusion.csv");
  long long total = 0;
  for (const auto & r : cm.rows) total += std::stoll(r[2]);
  CHECK(total == static_cast<long long>(3 * o.infos.size()));
  fs::remove_all(root);
}

TEST_CASE("ablation grid covers five rows in two parsing modes")
{
  const auto root = scratch("ablate");
  ExperimentConfig c = tiny(root, {"eval.repeats=2", "eval.samples=3", "threads=2"});
  c.data_dir = root / "data";
  cmd_generate(c, make_run_dir(c, "generate"));
  const fs::path dir = make_run_dir(c, "ablate");
  const AblationResult r = cmd_ablate(c, dir);
  CHECK(r.failures.empty());
  REQUIRE(r.rows.size() == 10);
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    CHECK(r.rows[i].model == kAblationRows[i % 5]);
    CHECK(r.rows[i].parsing == (i < 5 ? "sliding" : "padding"));
    CHECK(r.rows[i].summary.stddev.has_value() == (r.rows[i].model[0] == 'C'));
  }
  const auto back = eval::read_metrics_csv(dir / "metrics.csv");
  CHECK(back.size() == 10);
  // Each cell is reproducible from its own echoed config.
  const auto cell_cfg = ExperimentConfig::from_map(read_key_values(dir / "C+ob+op_sliding" / "config.txt"));
  CHECK(cell_cfg.row == "C+ob+op");
  CHECK(cell_cfg.train.parsing.mode == model::ParsingMode::sliding);
  const fs::path again = root / "again";
  fs::create_directories(again);
  const TrainResult tr = cmd_train(cell_cfg, again);
  CHECK(slurp(tr.checkpoint) == slurp(dir / "C+ob+op_sliding" / "model.ckpt"));
  CHECK(cmd_report(dir).size() == 10);
  fs::remove_all(root);
}
