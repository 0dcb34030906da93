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

#include "vru/model/network.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "vru/core/error.hpp"
#include "vru/core/frame.hpp"

namespace vru::model
{

namespace
{

std::string join(const std::vector<int> & v)
{
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s += (i ? "," : "") + std::to_string(v[i]);
  }
  return s;
}

std::vector<int> split_ints(const std::string & s)
{
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
    if (r.ec != std::errc() || r.ptr != item.data() + item.size()) {
      throw ConfigError("expected a comma-separated integer list, got '" + s + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::string fmt_double(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int to_int(const std::string & key, const std::string & s)
{
  int v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ConfigError("model." + key + ": expected an integer, got '" + s + "'");
  }
  return v;
}

double to_double(const std::string & key, const std::string & s)
{
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) {
      throw std::invalid_argument(s);
    }
    return v;
  } catch (const std::exception &) {
    throw ConfigError("model." + key + ": expected a number, got '" + s + "'");
  }
}

bool to_bool(const std::string & key, const std::string & s)
{
  if (s == "1" || s == "true" || s == "on") {
    return true;
  }
  if (s == "0" || s == "false" || s == "off") {
    return false;
  }
  throw ConfigError("model." + key + ": expected a boolean, got '" + s + "'");
}

Mat broadcast_rows(const Mat & z, int length)
{
  const Eigen::Index b = z.rows();
  Mat out(b * length, z.cols());
  for (int t = 0; t < length; ++t) {
    out.middleRows(t * b, b) = z;
  }
  return out;
}

Mat hcat(const Mat & a, const Mat & b)
{
  Mat out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace

std::string to_string(Variant v) { return v == Variant::cvae ? "cvae" : "s2s"; }

Variant parse_variant(const std::string & s)
{
  if (s == "cvae" || s == "C") {
    return Variant::cvae;
  }
  if (s == "s2s" || s == "S") {
    return Variant::s2s;
  }
  throw ConfigError("unknown model variant '" + s + "'");
}

void ModelConfig::validate() const
{
  auto fail = [](const std::string & m) { throw ConfigError("model config: " + m); };
  if (width < 1 || height < 1) fail("frame size must be positive");
  if (conv_kernels.empty() || conv_kernels.size() != conv_filters.size()) {
    fail("conv_kernels and conv_filters need the same nonzero length");
  }
  for (std::size_t i = 0; i < conv_kernels.size(); ++i) {
    if (conv_kernels[i] < 1 || conv_filters[i] < 1) fail("conv kernels and filters must be positive");
  }
  if (conv_stride < 1) fail("conv_stride must be positive");
  if (feature_dim < 1 || label_embed_dim < 1 || fusion_dim < 1 || latent_fc < 1 || decoder_fc < 1) {
    fail("layer widths must be positive");
  }
  if (latent_dim < 1) fail("latent_dim must be positive");
  if (recurrent_hidden.empty()) fail("recurrent_hidden needs at least one layer");
  for (int h : recurrent_hidden) {
    if (h < 1) fail("recurrent widths must be positive");
  }
  if (!use_object && !use_flow) fail("at least one modality (ob, op) must be enabled");
  if (!(kl_weight >= 0.0)) fail("kl_weight must be nonnegative");
  if (!(bn_momentum >= 0.0 && bn_momentum < 1.0)) fail("bn_momentum must lie in [0, 1)");
  if (!(bn_eps > 0.0)) fail("bn_eps must be positive");
}

std::map<std::string, std::string> ModelConfig::to_map() const
{
  return {{"width", std::to_string(width)},
          {"height", std::to_string(height)},
          {"conv_kernels", join(conv_kernels)},
          {"conv_stride", std::to_string(conv_stride)},
          {"conv_filters", join(conv_filters)},
          {"feature_dim", std::to_string(feature_dim)},
          {"label_embed_dim", std::to_string(label_embed_dim)},
          {"fusion_dim", std::to_string(fusion_dim)},
          {"recurrent_hidden", join(recurrent_hidden)},
          {"latent_fc", std::to_string(latent_fc)},
          {"latent_dim", std::to_string(latent_dim)},
          {"decoder_fc", std::to_string(decoder_fc)},
          {"attention", attention ? "1" : "0"},
          {"use_object", use_object ? "1" : "0"},
          {"use_flow", use_flow ? "1" : "0"},
          {"variant", to_string(variant)},
          {"kl_weight", fmt_double(kl_weight)},
          {"bn_momentum", fmt_double(bn_momentum)},
          {"bn_eps", fmt_double(bn_eps)}};
}

ModelConfig ModelConfig::from_map(const std::map<std::string, std::string> & kv)
{
  ModelConfig c;
  for (const auto & [k, v] : kv) {
    if (k == "width") c.width = to_int(k, v);
    else if (k == "height") c.height = to_int(k, v);
    else if (k == "conv_kernels") c.conv_kernels = split_ints(v);
    else if (k == "conv_stride") c.conv_stride = to_int(k, v);
    else if (k == "conv_filters") c.conv_filters = split_ints(v);
    else if (k == "feature_dim") c.feature_dim = to_int(k, v);
    else if (k == "label_embed_dim") c.label_embed_dim = to_int(k, v);
    else if (k == "fusion_dim") c.fusion_dim = to_int(k, v);
    else if (k == "recurrent_hidden") c.recurrent_hidden = split_ints(v);
    else if (k == "latent_fc") c.latent_fc = to_int(k, v);
    else if (k == "latent_dim") c.latent_dim = to_int(k, v);
    else if (k == "decoder_fc") c.decoder_fc = to_int(k, v);
    else if (k == "attention") c.attention = to_bool(k, v);
    else if (k == "use_object") c.use_object = to_bool(k, v);
    else if (k == "use_flow") c.use_flow = to_bool(k, v);
    else if (k == "variant") c.variant = parse_variant(v);
    else if (k == "kl_weight") c.kl_weight = to_double(k, v);
    else if (k == "bn_momentum") c.bn_momentum = to_double(k, v);
    else if (k == "bn_eps") c.bn_eps = to_double(k, v);
    else throw ConfigError("unknown model key '" + k + "'");
  }
  c.validate();
  return c;
}

std::string ModelConfig::tag() const
{
  std::string t = variant == Variant::cvae ? "C" : "S";
  if (use_object) t += "+ob";
  if (use_flow) t += "+op";
  if (attention) t += "+att";
  return t;
}

// ---------------------------------------------------------------------------- FrameEncoder

FrameEncoder::FrameEncoder(ParamSet & params, const std::string & name, const ModelConfig & cfg, int channels,
                           Rng & rng)
{
  MapShape shape{cfg.height, cfg.width, channels};
  for (std::size_t i = 0; i < cfg.conv_kernels.size(); ++i) {
    const auto id = std::to_string(i + 1);
    conv_.emplace_back(params, name + ".conv" + id, shape, cfg.conv_filters[i], cfg.conv_kernels[i],
                       cfg.conv_stride, rng);
    pool_.emplace_back(conv_.back().out_shape());
    shape = pool_.back().out_shape();
    bn_.emplace_back(params, name + ".bn" + id, shape, cfg.bn_momentum, cfg.bn_eps);
  }
  fc_ = Linear(params, name + ".fc", shape.size(), cfg.feature_dim, rng);
}

Mat FrameEncoder::forward(const RMat & frames, bool training)
{
  input_ = &frames;
  conv_out_.resize(conv_.size());
  bn_out_.resize(conv_.size());
  const RMat * in = &frames;
  for (std::size_t i = 0; i < conv_.size(); ++i) {
    RMat a = conv_[i].forward(*in, i == 0);
    relu_inplace(a);
    conv_out_[i] = std::move(a);
    bn_out_[i] = bn_[i].forward(pool_[i].forward(conv_out_[i]), training);
    in = &bn_out_[i];
  }
  features_ = fc_.forward(Mat(bn_out_.back()));
  relu_inplace(features_);
  return features_;
}

void FrameEncoder::backward(const Mat & dfeatures)
{
  const Mat dflat = fc_.backward(relu_backward(dfeatures, features_));
  RMat d = dflat;
  for (std::size_t k = conv_.size(); k-- > 0;) {
    d = bn_[k].backward(d);
    d = pool_[k].backward(d);
    d = relu_backward(d, conv_out_[k]);
    d = conv_[k].backward(k == 0 ? *input_ : bn_out_[k - 1], d);
  }
}

// -------------------------------------------------------------------------------- SeqModel

SeqModel::SeqModel(const ModelConfig & cfg, std::uint64_t seed) : cfg_(cfg)
{
  cfg_.validate();
  Rng rng(derive_seed(seed, {0x1417u}));
  if (cfg_.use_object) {
    object_cnn_ = FrameEncoder(params_, "x_enc.object", cfg_, kObjectChannels, rng);
    x_dim_ += cfg_.feature_dim;
  }
  if (cfg_.use_flow) {
    flow_cnn_ = FrameEncoder(params_, "x_enc.flow", cfg_, kFlowChannels, rng);
    x_dim_ += cfg_.feature_dim;
  }
  const auto & rh = cfg_.recurrent_hidden;
  if (cfg_.variant == Variant::cvae) {
    y_fc_ = Linear(params_, "y_enc.fc", 2, cfg_.label_embed_dim, rng);
    enc_fc_ = Linear(params_, "latent.fc_in", x_dim_ + cfg_.label_embed_dim, cfg_.fusion_dim, rng);
    if (cfg_.attention) {
      attention_ = SelfAttention(params_, "latent.attention", cfg_.fusion_dim, rng);
    }
    int in = cfg_.fusion_dim;
    for (std::size_t i = 0; i < rh.size(); ++i) {
      enc_lstm_.emplace_back(params_, "latent.lstm" + std::to_string(i + 1), in, rh[i], rng);
      in = rh[i];
    }
    latent_fc_ = Linear(params_, "latent.fc_hidden", in, cfg_.latent_fc, rng);
    mean_fc_ = Linear(params_, "latent.mean", cfg_.latent_fc, cfg_.latent_dim, rng);
    logvar_fc_ = Linear(params_, "latent.log_var", cfg_.latent_fc, cfg_.latent_dim, rng);
  }
  const int z_dim = cfg_.variant == Variant::cvae ? cfg_.latent_dim : 0;
  dec_fc_ = Linear(params_, "decoder.fc_in", x_dim_ + z_dim, cfg_.fusion_dim, rng);
  if (cfg_.variant == Variant::s2s && cfg_.attention) {
    attention_ = SelfAttention(params_, "decoder.attention", cfg_.fusion_dim, rng);
  }
  int in = cfg_.fusion_dim;
  for (std::size_t i = 0; i < rh.size(); ++i) {
    dec_lstm_.emplace_back(params_, "decoder.lstm" + std::to_string(i + 1), in, rh[i], rng);
    in = rh[i];
  }
  dec_mid_fc_ = Linear(params_, "decoder.fc_mid", in, cfg_.decoder_fc, rng);
  out_fc_ = Linear(params_, "decoder.fc_out", cfg_.decoder_fc, 2, rng);
}

Mat SeqModel::x_encode(const SequenceBatch & batch, bool training)
{
  const Eigen::Index rows = static_cast<Eigen::Index>(batch.batch) * batch.length;
  if (batch.mask.rows() != batch.batch || batch.mask.cols() != batch.length) {
    throw DimensionError("batch mask must be B x L");
  }
  const auto nframes = static_cast<Eigen::Index>(batch.frame_rows.size());
  Mat x = Mat::Zero(rows, x_dim_);
  int off = 0;
  auto place = [&](const Mat & f) {
    for (Eigen::Index k = 0; k < nframes; ++k) {
      x.block(batch.frame_rows[static_cast<std::size_t>(k)], off, 1, f.cols()) = f.row(k);
    }
    off += static_cast<int>(f.cols());
  };
  if (cfg_.use_object) {
    if (batch.object.rows() != nframes || batch.object.cols() != cfg_.width * cfg_.height * kObjectChannels) {
      throw DimensionError("object frames do not match the model geometry " + std::to_string(cfg_.width) + "x" +
                           std::to_string(cfg_.height));
    }
    place(object_cnn_.forward(batch.object, training));
  }
  if (cfg_.use_flow) {
    if (batch.flow.rows() != nframes || batch.flow.cols() != cfg_.width * cfg_.height * kFlowChannels) {
      throw DimensionError("flow frames do not match the model geometry " + std::to_string(cfg_.width) + "x" +
                           std::to_string(cfg_.height));
    }
    place(flow_cnn_.forward(batch.flow, training));
  }
  return x;
}

Mat SeqModel::y_encode(const Vec & labels, int length)
{
  if (cfg_.variant != Variant::cvae) {
    throw ConfigError("y_encode is only defined for the CVAE variant");
  }
  const Eigen::Index b = labels.size();
  Mat onehot(b * length, 2);
  for (int t = 0; t < length; ++t) {
    for (Eigen::Index i = 0; i < b; ++i) {
      onehot(t * b + i, 0) = 1.0 - labels(i);
      onehot(t * b + i, 1) = labels(i);
    }
  }
  y_embed_ = y_fc_.forward(onehot);
  relu_inplace(y_embed_);
  return y_embed_;
}

GaussianLatent SeqModel::encode_latent(const Mat & x, const Mat & y_embed, const Mat & mask)
{
  if (cfg_.variant != Variant::cvae) {
    throw ConfigError("encode_latent is only defined for the CVAE variant");
  }
  if (x.rows() != y_embed.rows()) {
    throw DimensionError("encode_latent: feature and label sequences differ in length");
  }
  enc_fc_out_ = enc_fc_.forward(hcat(x, y_embed));
  relu_inplace(enc_fc_out_);
  Mat h = cfg_.attention ? attention_.forward(enc_fc_out_, mask) : enc_fc_out_;
  for (auto & l : enc_lstm_) {
    h = l.forward(h, mask);
  }
  const Eigen::Index b = mask.rows();
  enc_last_ = h.bottomRows(b);
  latent_hidden_ = latent_fc_.forward(enc_last_);
  relu_inplace(latent_hidden_);
  return {mean_fc_.forward(latent_hidden_), logvar_fc_.forward(latent_hidden_)};
}

Mat SeqModel::decode(const Mat & x, const Mat & z, const Mat & mask, Mat * logits)
{
  const int length = static_cast<int>(mask.cols());
  Mat in;
  if (cfg_.variant == Variant::cvae) {
    if (z.cols() != cfg_.latent_dim || z.rows() != mask.rows()) {
      throw DimensionError("decode: latent must be B x " + std::to_string(cfg_.latent_dim));
    }
    in = hcat(x, broadcast_rows(z, length));
  } else {
    in = x;
  }
  dec_fc_out_ = dec_fc_.forward(in);
  relu_inplace(dec_fc_out_);
  Mat h = (cfg_.variant == Variant::s2s && cfg_.attention) ? attention_.forward(dec_fc_out_, mask) : dec_fc_out_;
  for (auto & l : dec_lstm_) {
    h = l.forward(h, mask);
  }
  dec_mid_out_ = dec_mid_fc_.forward(h);
  relu_inplace(dec_mid_out_);
  Mat lg = out_fc_.forward(dec_mid_out_);
  Mat p = softmax_rows(lg);
  if (logits != nullptr) {
    *logits = std::move(lg);
  }
  return p;
}

ForwardResult SeqModel::forward(const SequenceBatch & batch, const Mat & noise, bool training)
{
  batch_ = &batch;
  ForwardResult r;
  r.x = x_encode(batch, training);
  if (cfg_.variant == Variant::cvae) {
    const Mat ye = y_encode(batch.labels, batch.length);
    r.latent = encode_latent(r.x, ye, batch.mask);
    r.z = sample_latent(r.latent, noise);
    noise_ = noise;
  }
  r.probs = decode(r.x, r.z, batch.mask, &r.logits);
  r.loss = elbo_loss(batch.targets, r.probs, cfg_.variant == Variant::cvae ? &r.latent : nullptr, batch.mask,
                     cfg_.kl_weight);
  last_ = r;
  return r;
}

void SeqModel::backward()
{
  if (batch_ == nullptr) {
    throw ConfigError("backward called before forward");
  }
  const SequenceBatch & batch = *batch_;
  const bool cvae = cfg_.variant == Variant::cvae;
  ElboGrads g;
  elbo_loss(batch.targets, last_.probs, cvae ? &last_.latent : nullptr, batch.mask, cfg_.kl_weight, &g);

  // Decoder.
  Mat d = out_fc_.backward(g.dlogits);
  d = dec_mid_fc_.backward(relu_backward(d, dec_mid_out_));
  for (std::size_t i = dec_lstm_.size(); i-- > 0;) {
    d = dec_lstm_[i].backward(d);
  }
  if (!cvae && cfg_.attention) {
    d = attention_.backward(d);
  }
  const Mat din = dec_fc_.backward(relu_backward(d, dec_fc_out_));
  Mat dx = din.leftCols(x_dim_);

  if (cvae) {
    const Eigen::Index b = batch.batch;
    const Mat dzb = din.rightCols(cfg_.latent_dim);
    Mat dz = Mat::Zero(b, cfg_.latent_dim);
    for (int t = 0; t < batch.length; ++t) {
      dz += dzb.middleRows(t * b, b);
    }
    const Mat dmean = g.dmean + dz;
    const Mat dlogvar =
        g.dlog_var + (dz.array() * noise_.array() * (0.5 * last_.latent.log_var.array()).exp() * 0.5).matrix();
    Mat dh = mean_fc_.backward(dmean) + logvar_fc_.backward(dlogvar);
    dh = latent_fc_.backward(relu_backward(dh, latent_hidden_));
    Mat dseq = Mat::Zero(b * batch.length, dh.cols());
    dseq.bottomRows(b) = dh;
    for (std::size_t i = enc_lstm_.size(); i-- > 0;) {
      dseq = enc_lstm_[i].backward(dseq);
    }
    if (cfg_.attention) {
      dseq = attention_.backward(dseq);
    }
    const Mat denc = enc_fc_.backward(relu_backward(dseq, enc_fc_out_));
    dx += denc.leftCols(x_dim_);
    y_fc_.backward(relu_backward(denc.rightCols(cfg_.label_embed_dim), y_embed_), false);
  }

  // X-encoder: only valid frames went through the CNNs.
  const auto nframes = static_cast<Eigen::Index>(batch.frame_rows.size());
  int off = 0;
  auto take = [&](int width) {
    Mat df(nframes, width);
    for (Eigen::Index k = 0; k < nframes; ++k) {
      df.row(k) = dx.block(batch.frame_rows[static_cast<std::size_t>(k)], off, 1, width);
    }
    off += width;
    return df;
  };
  if (cfg_.use_object) {
    object_cnn_.backward(take(cfg_.feature_dim));
  }
  if (cfg_.use_flow) {
    flow_cnn_.backward(take(cfg_.feature_dim));
  }
}

}  // namespace vru::model
