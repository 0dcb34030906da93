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

#ifndef VRU_MODEL_NETWORK_HPP_
#define VRU_MODEL_NETWORK_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vru/model/layers.hpp"
#include "vru/model/loss.hpp"

namespace vru::model
{

enum class Variant : std::uint8_t { cvae, s2s };
std::string to_string(Variant v);
Variant parse_variant(const std::string & s);

struct ModelConfig
{
  int width{128};
  int height{96};
  std::vector<int> conv_kernels{8, 4, 2};
  int conv_stride{2};
  std::vector<int> conv_filters{16, 32, 64};
  /// Width of the per-modality feature vector after the CNN.
  int feature_dim{128};
  int label_embed_dim{32};
  /// FC width applied to the concatenated inputs of the recognition branch and decoder.
  int fusion_dim{64};
  std::vector<int> recurrent_hidden{64, 32};
  int latent_fc{32};
  int latent_dim{64};
  int decoder_fc{16};
  bool attention{true};
  bool use_object{true};
  bool use_flow{true};
  Variant variant{Variant::cvae};
  double kl_weight{1.0};
  double bn_momentum{0.99};
  double bn_eps{1e-3};

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
  /// Flat key/value echo used in checkpoints and run directories.
  std::map<std::string, std::string> to_map() const;
  static ModelConfig from_map(const std::map<std::string, std::string> & kv);
  /// Short tag such as "C+ob+op+att" or "S+ob+op+att".
  std::string tag() const;
  bool operator==(const ModelConfig &) const = default;
};

/// A batch of B sequences of common length L (window size or padding length). Feature
/// frames are stored only for valid steps; `frame_rows[k]` is the time-major row
/// (t * B + b) of frame k.
struct SequenceBatch
{
  int batch{0};
  int length{0};
  Mat mask;  // B x L
  std::vector<int> frame_rows;
  RMat object;  // valid frames x (H * W * 4)
  RMat flow;    // valid frames x (H * W * 3)
  Vec labels;   // B, 0/1 interaction
  /// Per-frame targets, (L * B) x 1: the sequence label duplicated to every step.
  Mat targets;
};

/// CNN for one modality: three Conv -> ReLU -> MaxPool -> BatchNorm stages, then a
/// flattening FC layer with ReLU.
class FrameEncoder
{
public:
  FrameEncoder() = default;
  FrameEncoder(ParamSet & params, const std::string & name, const ModelConfig & cfg, int channels, Rng & rng);
  /// One row per frame in, one feature row per frame out.
  Mat forward(const RMat & frames, bool training);
  /// Parameter gradients only (the frames are data).
  void backward(const Mat & dfeatures);
  int feature_dim() const { return fc_.out(); }

private:
  std::vector<Conv2D> conv_;
  std::vector<MaxPool2> pool_;
  std::vector<BatchNorm> bn_;
  Linear fc_;
  const RMat * input_{nullptr};
  std::vector<RMat> conv_out_;  // post-ReLU
  std::vector<RMat> bn_out_;
  Mat features_;
};

/// Intermediate values of one forward pass, exposed for tests and inference.
struct ForwardResult
{
  Mat x;      // (L * B) x Fx
  GaussianLatent latent;  // empty for s2s
  Mat z;      // B x Dz, empty for s2s
  Mat logits; // (L * B) x 2
  Mat probs;  // (L * B) x 2
  ElboTerms loss;
};

/// The sequence-to-sequence CVAE and its deterministic encoder-decoder baseline.
class SeqModel
{
public:
  SeqModel(const ModelConfig & cfg, std::uint64_t seed);
  SeqModel(const SeqModel &) = delete;
  SeqModel & operator=(const SeqModel &) = delete;

  const ModelConfig & config() const { return cfg_; }
  ParamSet & params() { return params_; }
  const ParamSet & params() const { return params_; }

  /// Per-step features of the enabled modalities, zero rows at invalid steps.
  Mat x_encode(const SequenceBatch & batch, bool training);
  /// Label embedding duplicated over `length` steps, time-major.
  Mat y_encode(const Vec & labels, int length);
  /// Posterior parameters from the recognition branch (CVAE only).
  GaussianLatent encode_latent(const Mat & x, const Mat & y_embed, const Mat & mask);
  /// Frame-wise class probabilities given features and one latent row per item (ignored
  /// for s2s). Writes the logits when `logits` is non-null.
  Mat decode(const Mat & x, const Mat & z, const Mat & mask, Mat * logits = nullptr);

  /// Full forward pass with the ELBO. `noise` is B x Dz (ignored for s2s).
  ForwardResult forward(const SequenceBatch & batch, const Mat & noise, bool training);
  /// Backward pass for the most recent forward call; accumulates parameter gradients.
  void backward();

  /// Attention weights of the most recent attention pass.
  const std::vector<Mat> & attention_weights() const { return attention_.weights(); }

private:
  ModelConfig cfg_;
  ParamSet params_;
  FrameEncoder object_cnn_;
  FrameEncoder flow_cnn_;
  // Recognition branch.
  Linear y_fc_;
  Linear enc_fc_;
  SelfAttention attention_;
  std::vector<Lstm> enc_lstm_;
  Linear latent_fc_;
  Linear mean_fc_;
  Linear logvar_fc_;
  // Decoder.
  Linear dec_fc_;
  std::vector<Lstm> dec_lstm_;
  Linear dec_mid_fc_;
  Linear out_fc_;

  // Cache of the last forward pass.
  const SequenceBatch * batch_{nullptr};
  int x_dim_{0};
  Mat y_embed_;
  Mat enc_fc_out_;
  Mat enc_last_;
  Mat latent_hidden_;
  Mat noise_;
  Mat dec_fc_out_;
  Mat dec_mid_out_;
  ForwardResult last_;
};

}  // namespace vru::model

#endif  // VRU_MODEL_NETWORK_HPP_
