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

#include "vru/core/error.hpp"
#include "vru/ingest/source.hpp"
#include "vru/model/checkpoint.hpp"
#include "vru/model/infer.hpp"
#include "vru/model/trainer.hpp"

using namespace vru;
using namespace vru::model;

namespace
{

constexpr int kW = 32;
constexpr int kH = 24;

ModelConfig small_config(Variant v = Variant::cvae)
{
  ModelConfig c;
  c.width = kW;
  c.height = kH;
  c.conv_kernels = {3, 3, 2};
  c.conv_filters = {4, 6, 8};
  c.feature_dim = 12;
  c.label_embed_dim = 4;
  c.fusion_dim = 10;
  c.recurrent_hidden = {8, 6};
  c.latent_fc = 6;
  c.latent_dim = 2;
  c.decoder_fc = 6;
  c.variant = v;
  return c;
}

ingest::ScenarioSource toy_source(int n, std::uint64_t seed)
{
  sim::ScenarioConfig sc;
  sc.width = kW;
  sc.height = kH;
  std::vector<sim::Scenario> scs;
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) {
    sc.target = i % 2 ? sim::ClassTarget::interaction : sim::ClassTarget::non_interaction;
    scs.push_back(sim::gen_scenario(sc, seed + static_cast<std::uint64_t>(i)));
    ids.push_back("toy" + std::to_string(seed) + "_" + std::to_string(i));
  }
  sim::RenderConfig rc;
  rc.v_cap = 4.0 * kW / 128.0;
  return ingest::ScenarioSource(std::move(scs), std::move(ids), rc);
}

std::string slurp(const std::filesystem::path & p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path scratch_dir(const std::string & name)
{
  const auto d = std::filesystem::temp_directory_path() / ("vru_test_training_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

void check_same_params(SeqModel & a, SeqModel & b)
{
  const auto pa = a.params().all();
  const auto pb = b.params().all();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    INFO(pa[i]->name);
    CHECK(pa[i]->name == pb[i]->name);
    CHECK(pa[i]->value == pb[i]->value);
  }
}

}  // namespace

TEST_CASE("train config round-trips through its key-value form")
{
  TrainConfig tc;
  tc.epochs = 7;
  tc.adam.learning_rate = 3e-4;
  tc.parsing.mode = ParsingMode::padding;
  tc.parsing.t_star = 80;
  tc.seed = 99;
  const TrainConfig back = TrainConfig::from_map(tc.to_map());
  CHECK(back.to_map() == tc.to_map());
  CHECK(back.parsing == tc.parsing);
  tc.batch_size = 0;
  CHECK_THROWS_AS(tc.validate(), ConfigError);
}

TEST_CASE("assembled batches drop steps that are padding for every item")
{
  const auto src = toy_source(2, 40);
  const auto seq = src.load(0);
  ParsingConfig p;
  p.mode = ParsingMode::padding;
  p.t_star = seq.length() + 30;
  const auto units = make_units(seq, p);
  REQUIRE(units.size() == 1);
  const ModelConfig c = small_config();
  const SequenceBatch b = assemble_batch(units, c);
  CHECK(b.length == seq.length());
  CHECK(b.mask.sum() == seq.length());
  p.t_star = seq.length() - 1;
  CHECK_THROWS_AS(make_units(seq, p), SequenceTooLongError);
}

TEST_CASE("one epoch on one batch lowers the training loss for most seeds")
{
  const auto src = toy_source(4, 70);
  const ModelConfig mc = small_config();
  int improved = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    TrainConfig tc;
    tc.epochs = 1;
    tc.batch_size = 64;
    tc.seed = seed;
    TrainState st = init_state(mc, tc);
    std::vector<ingest::TurningSequence> seqs;
    std::vector<BatchUnit> units;
    for (std::size_t i = 0; i < src.size(); ++i) seqs.push_back(src.load(i));
    for (const auto & s : seqs) {
      const auto u = make_units(s, tc.parsing);
      units.insert(units.end(), u.begin(), u.end());
    }
    REQUIRE(static_cast<int>(units.size()) <= tc.batch_size);
    const SequenceBatch batch = assemble_batch(units, mc);
    Rng rng(seed);
    std::normal_distribution<double> normal;
    Mat noise(batch.batch, mc.latent_dim);
    for (Eigen::Index k = 0; k < noise.size(); ++k) noise.data()[k] = normal(rng);
    const double before = st.model->forward(batch, noise, true).loss.total;
    train_epochs(st, src, nullptr);
    REQUIRE(st.step_losses.size() == 1);
    const double after = st.model->forward(batch, noise, true).loss.total;
    improved += after < before ? 1 : 0;
  }
  CHECK(improved >= 19);
}

TEST_CASE("identical training runs write byte-identical checkpoints")
{
  const auto train_src = toy_source(6, 100);
  const auto val_src = toy_source(2, 200);
  const auto dir = scratch_dir("det");
  TrainConfig tc;
  tc.epochs = 2;
  tc.seed = 5;
  const TrainState a = train(train_src, &val_src, small_config(), tc);
  const TrainState b = train(train_src, &val_src, small_config(), tc);
  write_checkpoint(dir / "a.ckpt", a);
  write_checkpoint(dir / "b.ckpt", b);
  const std::string bytes = slurp(dir / "a.ckpt");
  CHECK(!bytes.empty());
  CHECK(bytes == slurp(dir / "b.ckpt"));
  REQUIRE(a.epochs.size() == 2);
  CHECK(std::isfinite(a.epochs[1].val_total));
  tc.seed = 6;
  const TrainState c = train(train_src, &val_src, small_config(), tc);
  write_checkpoint(dir / "c.ckpt", c);
  CHECK(bytes != slurp(dir / "c.ckpt"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("resuming from a checkpoint continues the same trajectory")
{
  const auto src = toy_source(6, 300);
  const auto dir = scratch_dir("resume");
  TrainConfig tc;
  tc.epochs = 2;
  tc.seed = 8;
  TrainState full = train(src, nullptr, small_config(), tc);

  tc.epochs = 1;
  TrainState half = train(src, nullptr, small_config(), tc);
  write_checkpoint(dir / "half.ckpt", half);
  TrainState resumed = read_checkpoint(dir / "half.ckpt");
  CHECK(resumed.epoch == 1);
  CHECK(resumed.optimizer.steps() == half.optimizer.steps());
  CHECK(resumed.step_losses.size() == half.step_losses.size());
  check_same_params(*resumed.model, *half.model);
  resumed.train_config.epochs = 2;
  train_epochs(resumed, src, nullptr);
  check_same_params(*resumed.model, *full.model);
  REQUIRE(resumed.epochs.size() == full.epochs.size());
  CHECK(resumed.epochs[1].total == full.epochs[1].total);

  write_loss_csv(dir / "loss.csv", full.epochs);
  std::ifstream in(dir / "loss.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "epoch,kl,recon,total,val_total");
  std::filesystem::remove_all(dir);
}

TEST_CASE("malformed checkpoints are rejected")
{
  const auto dir = scratch_dir("bad");
  CHECK_THROWS_AS(read_checkpoint(dir / "missing.ckpt"), IoError);
  {
    std::ofstream out(dir / "junk.ckpt", std::ios::binary);
    out << "not a checkpoint at all";
  }
  CHECK_THROWS_AS(read_checkpoint(dir / "junk.ckpt"), DataError);
  TrainConfig tc;
  tc.epochs = 0;
  const TrainState st = init_state(small_config(), tc);
  write_checkpoint(dir / "ok.ckpt", st);
  std::string bytes = slurp(dir / "ok.ckpt");
  bytes.resize(bytes.size() / 2);
  {
    std::ofstream out(dir / "cut.ckpt", std::ios::binary);
    out << bytes;
  }
  CHECK_THROWS_AS(read_checkpoint(dir / "cut.ckpt"), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("inference ensembles")
{
  const auto src = toy_source(4, 500);
  TrainConfig tc;
  tc.epochs = 1;
  TrainState cvae = train(src, nullptr, small_config(Variant::cvae), tc);
  TrainState s2s = train(src, nullptr, small_config(Variant::s2s), tc);
  const auto seq = src.load(1);
  ParsingConfig p;

  InferConfig ic;
  ic.samples = 1;
  CHECK(infer(*cvae.model, seq, p, ic).samples() == 1);

  ic.samples = 30;
  const auto e1 = infer(*cvae.model, seq, p, ic);
  CHECK(e1.samples() == 30);
  CHECK(e1.steps() == seq.length());
  CHECK(e1.stddev().maxCoeff() > 0.0);
  CHECK(infer(*cvae.model, seq, p, ic).interaction.isApprox(e1.interaction, 0.0));
  // Chunking keeps the draws; only GEMM rounding may differ with the pass size.
  ic.max_items = 7;
  CHECK((infer(*cvae.model, seq, p, ic).interaction - e1.interaction).cwiseAbs().maxCoeff() < 1e-12);

  ic.zero_noise = true;
  const auto z1 = infer(*cvae.model, seq, p, ic);
  ic.seed = 77;
  CHECK(infer(*cvae.model, seq, p, ic).interaction.isApprox(z1.interaction, 0.0));
  CHECK(z1.stddev().maxCoeff() < 1e-12);

  ic.zero_noise = false;
  const auto s = infer(*s2s.model, seq, p, ic);
  CHECK(s.samples() == 1);
  CHECK(s.stddev().maxCoeff() == 0.0);

  ic.samples = 0;
  CHECK_THROWS_AS(infer(*cvae.model, seq, p, ic), ConfigError);

  // Padding mode covers every frame with one item.
  p.mode = ParsingMode::padding;
  p.t_star = seq.length();
  ic.samples = 3;
  const auto pe = infer(*cvae.model, seq, p, ic);
  for (auto v : pe.valid) CHECK(v == 1);
}
