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

#include "vru/model/infer.hpp"

#include <algorithm>

#include "vru/core/error.hpp"

namespace vru::model
{

std::uint64_t fnv1a(std::string_view s)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uncertainty::PredictionEnsemble infer(SeqModel & model, const ingest::TurningSequence & seq,
                                      const ParsingConfig & parsing, const InferConfig & cfg)
{
  if (cfg.samples < 1) {
    throw ConfigError("infer: samples must be >= 1");
  }
  const ModelConfig & mc = model.config();
  const bool cvae = mc.variant == Variant::cvae;
  const int n_samples = cvae ? cfg.samples : 1;

  const auto units = make_units(seq, parsing);
  const SequenceBatch batch = assemble_batch(units, mc);
  const Mat x = model.x_encode(batch, false);
  const int w = batch.batch;
  const int len = batch.length;

  uncertainty::PredictionEnsemble ens;
  ens.id = seq.info.id;
  const int T = seq.length();
  ens.interaction = Eigen::MatrixXd::Zero(n_samples, T);
  ens.valid.assign(static_cast<std::size_t>(T), 0);
  // Owner window and slot of each frame: the first window that covers it.
  std::vector<std::pair<int, int>> owner(static_cast<std::size_t>(T), {-1, -1});
  for (int b = 0; b < w; ++b) {
    const auto & u = units[static_cast<std::size_t>(b)];
    for (int j = 0; j < u.valid; ++j) {
      auto & o = owner[static_cast<std::size_t>(u.start + j)];
      if (o.first < 0) {
        o = {b, j};
      }
    }
  }
  for (int f = 0; f < T; ++f) {
    ens.valid[static_cast<std::size_t>(f)] = owner[static_cast<std::size_t>(f)].first >= 0 ? 1 : 0;
  }

  Rng rng(derive_seed(cfg.seed, {fnv1a(seq.info.id)}));
  std::normal_distribution<double> normal;
  const int per_pass = std::max(1, cfg.max_items / std::max(1, w));
  for (int s0 = 0; s0 < n_samples; s0 += per_pass) {
    const int ns = std::min(per_pass, n_samples - s0);
    const int bt = ns * w;
    Mat xt(static_cast<Eigen::Index>(bt) * len, x.cols());
    Mat mask(bt, len);
    for (int s = 0; s < ns; ++s) {
      mask.middleRows(s * w, w) = batch.mask;
    }
    for (int t = 0; t < len; ++t) {
      for (int s = 0; s < ns; ++s) {
        xt.middleRows(static_cast<Eigen::Index>(t) * bt + s * w, w) = x.middleRows(static_cast<Eigen::Index>(t) * w, w);
      }
    }
    Mat z;
    if (cvae) {
      z = Mat::Zero(bt, mc.latent_dim);
      if (!cfg.zero_noise) {
        // Row by row, so the draws do not depend on how samples are chunked.
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
          for (Eigen::Index d = 0; d < z.cols(); ++d) {
            z(r, d) = normal(rng);
          }
        }
      }
    }
    const Mat probs = model.decode(xt, z, mask);
    for (int f = 0; f < T; ++f) {
      const auto [b, j] = owner[static_cast<std::size_t>(f)];
      if (b < 0) {
        continue;
      }
      for (int s = 0; s < ns; ++s) {
        ens.interaction(s0 + s, f) = probs(static_cast<Eigen::Index>(j) * bt + s * w + b, 1);
      }
    }
  }
  return ens;
}

}  // namespace vru::model
