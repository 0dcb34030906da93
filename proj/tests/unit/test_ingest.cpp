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
#include <numbers>
#include <set>
#include <sstream>

#include "vru/core/error.hpp"
#include "vru/core/rng.hpp"
#include "vru/ingest/container.hpp"
#include "vru/ingest/detections.hpp"
#include "vru/ingest/source.hpp"
#include "vru/ingest/splits.hpp"
#include "vru/ingest/windowing.hpp"

using namespace vru;
using namespace vru::ingest;

namespace fs = std::filesystem;

namespace
{

// Frames whose pixels encode their own index, so reorderings are visible.
TurningSequence numbered(int length, int w = 4, int h = 3, double fps = 30.0)
{
  TurningSequence s;
  s.info.id = "seq" + std::to_string(length);
  s.info.length = length;
  s.info.frame_rate = fps;
  for (int t = 0; t < length; ++t) {
    ObjectFrame o(w, h, kObjectChannels);
    FlowFrame f(w, h, kFlowChannels);
    for (std::size_t i = 0; i < o.data.size(); ++i) {
      o.data[i] = static_cast<std::uint8_t>((t + i) % 2);
    }
    for (std::size_t i = 0; i < f.data.size(); ++i) {
      f.data[i] = static_cast<float>(t + 1) / 1000.0f + static_cast<float>(i) * 1e-6f;
    }
    s.object_frames.push_back(o);
    s.flow_frames.push_back(f);
  }
  return s;
}

std::vector<SequenceInfo> pool(int neg, int pos, int len = 10)
{
  std::vector<SequenceInfo> out;
  for (int i = 0; i < neg + pos; ++i) {
    SequenceInfo s;
    s.id = "s" + std::to_string(1000 + i);
    s.label.value = i < neg ? sim::Interaction::non_interaction : sim::Interaction::interaction;
    s.length = len;
    out.push_back(s);
  }
  return out;
}

fs::path temp_dir(const std::string & name)
{
  auto p = fs::temp_directory_path() / ("vru_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("align_rates examples")
{
  const auto s = numbered(30);
  const auto half = align_rates(s, 2);
  CHECK(half.length() == 15);
  CHECK(half.info.length == 15);
  CHECK(half.info.frame_rate == doctest::Approx(15.0));
  CHECK(align_rates(s, 1) == s);
  const auto seven = align_rates(numbered(7), 2);
  REQUIRE(seven.length() == 4);
  const auto src = numbered(7);
  for (int k = 0; k < 4; ++k) {
    CHECK(seven.object_frames[k] == src.object_frames[2 * k]);
    CHECK(seven.flow_frames[k] == src.flow_frames[2 * k]);
  }
  CHECK_THROWS_AS(align_rates(s, 0), ConfigError);
}

TEST_CASE("property: align_rates composes multiplicatively")
{
  for (int a = 1; a <= 4; ++a) {
    for (int b = 1; b <= 4; ++b) {
      const int len = a * b * 5;
      const auto s = numbered(len);
      CHECK(align_rates(align_rates(s, a), b) == align_rates(s, a * b));
    }
  }
}

TEST_CASE("slide_windows examples")
{
  auto b = slide_windows(numbered(16), 8, 8);
  CHECK(b.count() == 2);
  for (const auto & v : b.per_frame_valid) {
    CHECK(std::count(v.begin(), v.end(), 1) == 8);
  }
  b = slide_windows(numbered(8), 8, 8);
  CHECK(b.count() == 1);
  CHECK(b.object_windows[0] == numbered(8).object_frames);
  b = slide_windows(numbered(10), 8, 8);
  REQUIRE(b.count() == 2);
  CHECK(std::count(b.per_frame_valid[1].begin(), b.per_frame_valid[1].end(), 1) == 2);
  for (int i = 2; i < 8; ++i) {
    CHECK(b.per_frame_valid[1][i] == 0);
    const auto & o = b.object_windows[1][i].data;
    CHECK(std::all_of(o.begin(), o.end(), [](auto v) { return v == 0; }));
  }
  CHECK_THROWS_AS(slide_windows(numbered(10), 0, 1), ConfigError);
  CHECK_THROWS_AS(slide_windows(numbered(10), 4, 5), ConfigError);
  CHECK_THROWS_AS(slide_windows(numbered(10), 4, 0), ConfigError);
}

TEST_CASE("window spans partition the index range")
{
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int len = uniform_int(rng, 1, 60);
    const int w = uniform_int(rng, 1, 12);
    const int stride = uniform_int(rng, 1, w);
    const auto spans = window_spans(len, w, stride);
    if (stride == w) {
      CHECK(spans.size() == static_cast<std::size_t>((len + w - 1) / w));
    }
    CHECK(spans.front().start == 0);
    CHECK(spans.back().start + spans.back().valid == len);
    for (std::size_t k = 1; k < spans.size(); ++k) {
      CHECK(spans[k].start == spans[k - 1].start + stride);
    }
  }
}

TEST_CASE("pad_to examples")
{
  auto p = pad_to(numbered(5), 8);
  CHECK(p.mask == std::vector<std::uint8_t>{1, 1, 1, 1, 1, 0, 0, 0});
  for (int t = 5; t < 8; ++t) {
    CHECK(std::all_of(p.flow_frames[t].data.begin(), p.flow_frames[t].data.end(), [](float v) { return v == 0; }));
  }
  p = pad_to(numbered(8), 8);
  CHECK(std::count(p.mask.begin(), p.mask.end(), 1) == 8);
  CHECK(p.object_frames == numbered(8).object_frames);
  CHECK_THROWS_AS(pad_to(numbered(101), 100), SequenceTooLongError);
}

TEST_CASE("property: window and padding round trips are bit-exact")
{
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const int len = uniform_int(rng, 1, 40);
    const int w = uniform_int(rng, 1, 10);
    const int stride = uniform_int(rng, 1, w);
    const auto seq = numbered(len, 3, 2);
    const auto wb = slide_windows(seq, w, stride);
    std::vector<ObjectFrame> o;
    std::vector<FlowFrame> f;
    reconstruct(wb, o, f);
    CHECK(o == seq.object_frames);
    CHECK(f == seq.flow_frames);
    int valid = 0;
    for (const auto & v : wb.per_frame_new) {
      valid += static_cast<int>(std::count(v.begin(), v.end(), 1));
    }
    CHECK(valid == len);
    const int t_star = len + uniform_int(rng, 0, 10);
    const auto pb = pad_to(seq, t_star);
    CHECK(std::count(pb.mask.begin(), pb.mask.end(), 1) == pb.true_length);
    unpad(pb, o, f);
    CHECK(o == seq.object_frames);
    CHECK(f == seq.flow_frames);
  }
}

TEST_CASE("split sizes under floor rounding")
{
  auto s = split_sizes(642, 0.7, 0.2);
  CHECK(s.train == 360);
  CHECK(s.validation == 90);
  CHECK(s.test == 192);
  s = split_sizes(10, 0.7, 0.2);
  CHECK(s.test == 3);
  CHECK(s.validation == 1);
  CHECK(s.train == 6);
}

TEST_CASE("build_splits balances, partitions and is seed-deterministic")
{
  const auto p = pool(700, 642);
  SplitConfig cfg;
  cfg.seed = 9;
  const auto a = build_splits(p, cfg);
  CHECK(a.train_counts == ClassCounts{360, 360});
  CHECK(a.validation_counts == ClassCounts{90, 90});
  CHECK(a.test_counts == ClassCounts{192, 192});
  CHECK(a.dropped_for_balance == 58);
  CHECK(a == build_splits(p, cfg));
  std::set<std::string> all;
  for (const auto * part : {&a.train, &a.validation, &a.test}) {
    for (const auto & id : *part) {
      CHECK(all.insert(id).second);
    }
  }
  CHECK(all.size() == 2 * 642);
  cfg.seed = 10;
  CHECK_FALSE(a == build_splits(p, cfg));
}

TEST_CASE("build_splits excludes overlong sequences and rejects empty classes")
{
  auto p = pool(5, 5);
  p[0].length = 150;
  p[7].length = 101;
  SplitConfig cfg;
  cfg.max_length = 100;
  const auto s = build_splits(p, cfg);
  CHECK(s.excluded_too_long == 2);
  CHECK(s.train.size() + s.validation.size() + s.test.size() == 8);
  CHECK_THROWS_AS(build_splits(pool(4, 0), {}), DataError);
}

TEST_CASE("split manifest round trip")
{
  const auto dir = temp_dir("split");
  SplitConfig cfg;
  cfg.seed = 4;
  const auto s = build_splits(pool(10, 12), cfg);
  write_split_manifest(dir / "splits.json", s);
  CHECK(read_split_manifest(dir / "splits.json") == s);
  CHECK_THROWS_AS(read_split_manifest(dir / "missing.json"), IoError);
}

TEST_CASE("container round trip preserves frames bit-exactly")
{
  const auto dir = temp_dir("container");
  sim::ScenarioConfig c;
  c.width = 64;
  c.height = 48;
  DatasetHeader header{64, 48, 12.5, {}, {{"origin", "unit"}}};
  std::vector<TurningSequence> seqs;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto sc = sim::gen_scenario(c, seed);
    seqs.push_back(make_sequence(sc, "s" + std::to_string(seed)));
    write_sequence(dir / seqs.back().info.id, seqs.back());
    header.ids.push_back(seqs.back().info.id);
    if (seed == 0) {
      write_mask(dir / "mask.bin", sc.region_mask);
    }
  }
  write_dataset_header(dir, header);
  const ContainerSource src(dir);
  REQUIRE(src.size() == 3);
  CHECK(src.header().meta.at("origin") == "unit");
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(src.load(i) == seqs[i]);
  }
  CHECK(src.index_of("s2") == 2);
  CHECK_THROWS_AS(src.index_of("nope"), DataError);
  // A truncated tensor is a dimension error, not a silent short read.
  fs::resize_file(dir / "s1" / "flow.bin", fs::file_size(dir / "s1" / "flow.bin") - 4);
  CHECK_THROWS_AS(src.load(1), DimensionError);
}

TEST_CASE("scenario source renders lazily with labels known up front")
{
  sim::ScenarioConfig c;
  c.width = 64;
  c.height = 48;
  std::vector<sim::Scenario> sc;
  std::vector<std::string> ids;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    sc.push_back(sim::gen_scenario(c, seed));
    ids.push_back("x" + std::to_string(seed));
  }
  const ScenarioSource src(sc, ids);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto seq = src.load(i);
    CHECK(seq.info == src.info(i));
    CHECK(seq.length() == sc[i].steps);
  }
  const SubsetSource sub(src, {3, 1});
  CHECK(sub.info(0).id == "x3");
  CHECK(sub.load(1) == src.load(1));
}

TEST_CASE("cue dropout zeroes exactly one modality")
{
  sim::ScenarioConfig c;
  c.cue_split = 1.0;
  int motion = 0;
  int occupancy = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = make_sequence(sim::gen_scenario(c, seed), "c");
    bool obj_zero = true;
    bool flow_zero = true;
    for (int t = 0; t < s.length(); ++t) {
      for (auto v : s.object_frames[t].data) obj_zero = obj_zero && v == 0;
      for (auto v : s.flow_frames[t].data) flow_zero = flow_zero && v == 0.0f;
    }
    if (s.info.cue == sim::Cue::motion_only) {
      ++motion;
      CHECK(obj_zero);
      CHECK_FALSE(flow_zero);
    } else {
      REQUIRE(s.info.cue == sim::Cue::occupancy_only);
      ++occupancy;
      CHECK(flow_zero);
      CHECK_FALSE(obj_zero);
    }
  }
  CHECK(motion > 0);
  CHECK(occupancy > 0);
}

TEST_CASE("mirror flips x and negates the flow x-orientation")
{
  sim::ScenarioConfig c;
  c.turn = sim::TurnDirection::left;
  c.width = 64;
  c.height = 48;
  const auto seq = make_sequence(sim::gen_scenario(c, 3), "m");
  const auto m = apply_transform(seq, {std::nullopt, std::nullopt, true});
  for (int t = 0; t < seq.length(); t += 7) {
    const auto & f = seq.flow_frames[t];
    const auto & g = m.flow_frames[t];
    for (int y = 0; y < 48; ++y) {
      for (int x = 0; x < 64; ++x) {
        for (int ch = 0; ch < 4; ++ch) {
          CHECK(m.object_frames[t].at(63 - x, y, ch) == seq.object_frames[t].at(x, y, ch));
        }
        CHECK(g.at(63 - x, y, 1) == f.at(x, y, 1));
        CHECK(g.at(63 - x, y, 2) == f.at(x, y, 2));
        if (f.at(x, y, 1) > 0) {
          // Oracle: decode the angle, reflect (dx, dy) -> (-dx, dy), re-encode.
          const double a = 2 * std::numbers::pi * f.at(x, y, 0);
          double r = std::atan2(std::sin(a), -std::cos(a));
          if (r < 0) r += 2 * std::numbers::pi;
          double h = r / (2 * std::numbers::pi);
          if (h >= 1.0) h = 0.0;
          const double d = std::abs(g.at(63 - x, y, 0) - h);
          CHECK(std::min(d, 1.0 - d) < 1e-6);
        } else {
          CHECK(g.at(63 - x, y, 0) == 0.0f);
        }
      }
    }
  }
  // Mirroring twice is the identity up to float rounding of the hue.
  const auto mm = apply_transform(m, {std::nullopt, std::nullopt, true});
  CHECK(mm.object_frames == seq.object_frames);
}

TEST_CASE("resize to the native size is a no-op and nearest-neighbour otherwise")
{
  const auto seq = numbered(3, 8, 6);
  CHECK(apply_transform(seq, {8, 6, false}) == seq);
  const auto big = apply_transform(seq, {16, 12, false});
  CHECK(big.width() == 16);
  for (int y = 0; y < 12; ++y) {
    for (int x = 0; x < 16; ++x) {
      CHECK(big.flow_frames[1].at(x, y, 2) == seq.flow_frames[1].at(x / 2, y / 2, 2));
    }
  }
}

TEST_CASE("detection records rasterize through the lane filter")
{
  std::istringstream in(
      "{\"sequence_id\": \"a\", \"frame_idx\": 0, \"class\": \"person\", \"bbox\": [0.25, 0.25, 0.25, 0.25]}\n"
      "\n"
      "{\"sequence_id\": \"a\", \"frame_idx\": 1, \"class\": \"car\", \"bbox\": [0.5, 0.0, 0.5, 0.5]}\n");
  const auto recs = parse_detection_records(in);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].agent_class == sim::AgentClass::pedestrian);
  const auto b = to_pixel_box(recs[0], 8, 8);
  CHECK(b.x0 == 2);
  CHECK(b.x1 == 3);
  CHECK(b.area() == 4);
  sim::RegionMask mask(8, 8);
  mask.set(0, 7, true);
  const auto frames = rasterize_detections(recs, 8, 8, mask);
  REQUIRE(frames.size() == 2);
  CHECK(frames[0].at(2, 2, 0) == 1);
  // The car's lower midpoint (5, 3) is outside the mask.
  CHECK(std::all_of(frames[1].data.begin(), frames[1].data.end(), [](auto v) { return v == 0; }));
  std::istringstream bad("{\"sequence_id\": \"a\", \"frame_idx\": 0, \"class\": \"tram\", \"bbox\": [0,0,1,1]}\n");
  CHECK_THROWS_AS(parse_detection_records(bad), DataError);
}

TEST_CASE("detection import pairs records with flow tensors and labels")
{
  const auto dir = temp_dir("detections");
  {
    std::ofstream(dir / "rec.jsonl") << "{\"sequence_id\": \"k1\", \"frame_idx\": 1, \"class\": \"bus\", "
                                         "\"bbox\": [0.0, 0.0, 1.0, 1.0]}\n";
    std::ofstream(dir / "labels.csv") << "id,label\nk1,interaction\nk2,non_interaction\n";
  }
  write_flow_frames(dir / "k1.flow.bin", std::vector<FlowFrame>(3, FlowFrame(4, 4, 3)));
  sim::RegionMask mask(4, 4);
  for (auto & v : mask.grid) v = 1;
  const auto seqs = import_detections(dir / "rec.jsonl", dir, dir / "labels.csv", mask, 12.5);
  REQUIRE(seqs.size() == 1);
  CHECK(seqs[0].length() == 3);
  CHECK(seqs[0].info.label.value == sim::Interaction::interaction);
  CHECK(seqs[0].object_frames[1].at(2, 2, 3) == 1);
}
