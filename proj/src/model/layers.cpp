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

#include "vru/model/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vru/core/error.hpp"

namespace vru::model
{

namespace
{

using RMatMap = Eigen::Map<RMat>;
using ConstRMatMap = Eigen::Map<const RMat>;

Mat sigmoid(const Mat & z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

void check_cols(const Mat & x, int cols, const char * what)
{
  if (x.cols() != cols) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(cols) + " columns, got " +
                         std::to_string(x.cols()));
  }
}

// Column sums of a row-major (rows x c) block. Eigen's colwise() reductions walk
// row-major data with a stride; a plain row loop stays contiguous.
RowVec col_sums(const double * a, Eigen::Index rows, int c)
{
  RowVec s = RowVec::Zero(c);
  double * sp = s.data();
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double * row = a + r * c;
    for (int k = 0; k < c; ++k) {
      sp[k] += row[k];
    }
  }
  return s;
}

// Column sums of the elementwise product of two row-major (rows x c) blocks.
RowVec col_dots(const double * a, const double * b, Eigen::Index rows, int c)
{
  RowVec s = RowVec::Zero(c);
  double * sp = s.data();
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double * ra = a + r * c;
    const double * rb = b + r * c;
    for (int k = 0; k < c; ++k) {
      sp[k] += ra[k] * rb[k];
    }
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------------- Linear

Linear::Linear(ParamSet & params, const std::string & name, int in, int out, Rng & rng) : in_(in), out_(out)
{
  w_ = &params.add(name + ".w", glorot_uniform(in, out, in, out, rng));
  b_ = &params.add(name + ".b", Mat::Zero(1, out));
}

Mat Linear::forward(const Mat & x)
{
  check_cols(x, in_, "Linear");
  x_ = x;
  Mat y = x * w_->value;
  y.rowwise() += b_->value.row(0);
  return y;
}

Mat Linear::backward(const Mat & dy, bool need_dx)
{
  w_->grad.noalias() += x_.transpose() * dy;
  b_->grad += dy.colwise().sum();
  if (!need_dx) {
    return {};
  }
  return dy * w_->value.transpose();
}

void relu_inplace(Mat & x) { x = x.cwiseMax(0.0); }
void relu_inplace(RMat & x) { x = x.cwiseMax(0.0); }

Mat relu_backward(const Mat & dy, const Mat & y) { return (y.array() > 0.0).select(dy, 0.0); }
RMat relu_backward(const RMat & dy, const RMat & y) { return (y.array() > 0.0).select(dy, 0.0); }

Mat softmax_rows(const Mat & logits)
{
  Mat p = logits;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    const double m = p.row(r).maxCoeff();
    p.row(r) = (p.row(r).array() - m).exp().matrix();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

// ---------------------------------------------------------------------------------- Conv2D

Conv2D::Conv2D(ParamSet & params, const std::string & name, MapShape in, int filters, int kernel, int stride,
               Rng & rng)
  : in_(in), kernel_(kernel), stride_(stride)
{
  if (kernel < 1 || stride < 1 || filters < 1 || in.size() <= 0) {
    throw ConfigError("Conv2D: invalid geometry");
  }
  out_.h = (in.h + stride - 1) / stride;
  out_.w = (in.w + stride - 1) / stride;
  out_.c = filters;
  pad_top_ = std::max((out_.h - 1) * stride + kernel - in.h, 0) / 2;
  pad_left_ = std::max((out_.w - 1) * stride + kernel - in.w, 0) / 2;
  const int patch = kernel * kernel * in.c;
  w_ = &params.add(name + ".w", glorot_uniform(patch, filters, patch, kernel * kernel * filters, rng));
  b_ = &params.add(name + ".b", Mat::Zero(1, filters));
}

void Conv2D::patches(const double * frame, const std::vector<int> & positions, RMat & out) const
{
  const int c = in_.c;
  out.setZero(static_cast<Eigen::Index>(positions.size()), kernel_ * kernel_ * c);
  for (std::size_t r = 0; r < positions.size(); ++r) {
    const int oy = positions[r] / out_.w;
    const int ox = positions[r] % out_.w;
    double * row = out.row(static_cast<Eigen::Index>(r)).data();
    for (int ky = 0; ky < kernel_; ++ky) {
      const int iy = oy * stride_ - pad_top_ + ky;
      if (iy < 0 || iy >= in_.h) {
        continue;
      }
      for (int kx = 0; kx < kernel_; ++kx) {
        const int ix = ox * stride_ - pad_left_ + kx;
        if (ix < 0 || ix >= in_.w) {
          continue;
        }
        std::copy_n(frame + (static_cast<std::ptrdiff_t>(iy) * in_.w + ix) * c, c, row + (ky * kernel_ + kx) * c);
      }
    }
  }
}

template <typename Fn>
void Conv2D::for_each_reach(int iy, int ix, Fn && fn) const
{
  // Output oy sees input rows [oy * s - pad, oy * s - pad + k).
  const int ty = iy + pad_top_;
  const int tx = ix + pad_left_;
  const int oy0 = std::max(0, (ty - kernel_ + stride_) / stride_);
  const int oy1 = std::min(out_.h - 1, ty / stride_);
  const int ox0 = std::max(0, (tx - kernel_ + stride_) / stride_);
  const int ox1 = std::min(out_.w - 1, tx / stride_);
  for (int oy = oy0; oy <= oy1; ++oy) {
    const int ky = ty - oy * stride_;
    if (ky < 0 || ky >= kernel_) {
      continue;
    }
    for (int ox = ox0; ox <= ox1; ++ox) {
      const int kx = tx - ox * stride_;
      if (kx < 0 || kx >= kernel_) {
        continue;
      }
      fn(oy * out_.w + ox, (ky * kernel_ + kx) * in_.c);
    }
  }
}

RMat Conv2D::forward(const RMat & x, bool sparse)
{
  if (x.cols() != in_.size()) {
    throw DimensionError("Conv2D: input has " + std::to_string(x.cols()) + " values per frame, expected " +
                         std::to_string(in_.size()));
  }
  sparse_ = sparse;
  const Eigen::Index n = x.rows();
  const int positions = out_.h * out_.w;
  const int f_out = out_.c;
  RMat y(n, out_.size());
  if (sparse) {
    const RMat w = w_->value;  // row-major copy: one contiguous filter row per patch entry
    const RowVec bias = b_->value.row(0);
    for (Eigen::Index f = 0; f < n; ++f) {
      const double * frame = x.row(f).data();
      double * yf = y.row(f).data();
      for (int p = 0; p < positions; ++p) {
        std::copy_n(bias.data(), f_out, yf + static_cast<std::ptrdiff_t>(p) * f_out);
      }
      for (int iy = 0; iy < in_.h; ++iy) {
        for (int ix = 0; ix < in_.w; ++ix) {
          const double * px = frame + (static_cast<std::ptrdiff_t>(iy) * in_.w + ix) * in_.c;
          for (int ch = 0; ch < in_.c; ++ch) {
            const double v = px[ch];
            if (v == 0.0) {
              continue;
            }
            for_each_reach(iy, ix, [&](int o, int prow) {
              double * dst = yf + static_cast<std::ptrdiff_t>(o) * f_out;
              const double * wr = w.row(prow + ch).data();
              for (int k = 0; k < f_out; ++k) {
                dst[k] += v * wr[k];
              }
            });
          }
        }
      }
    }
    return y;
  }
  std::vector<int> all(static_cast<std::size_t>(positions));
  for (int p = 0; p < positions; ++p) {
    all[static_cast<std::size_t>(p)] = p;
  }
  RMat patch;
  for (Eigen::Index f = 0; f < n; ++f) {
    RMatMap yf(y.row(f).data(), positions, f_out);
    patches(x.row(f).data(), all, patch);
    yf.noalias() = patch * w_->value;
    yf.rowwise() += b_->value.row(0);
  }
  return y;
}

RMat Conv2D::backward(const RMat & x, const RMat & dy)
{
  const Eigen::Index n = x.rows();
  const int positions = out_.h * out_.w;
  const int f_out = out_.c;
  b_->grad += col_sums(dy.data(), n * positions, f_out);
  if (sparse_) {
    RMat dw = RMat::Zero(w_->value.rows(), f_out);
    for (Eigen::Index f = 0; f < n; ++f) {
      const double * frame = x.row(f).data();
      const double * dyf = dy.row(f).data();
      for (int iy = 0; iy < in_.h; ++iy) {
        for (int ix = 0; ix < in_.w; ++ix) {
          const double * px = frame + (static_cast<std::ptrdiff_t>(iy) * in_.w + ix) * in_.c;
          for (int ch = 0; ch < in_.c; ++ch) {
            const double v = px[ch];
            if (v == 0.0) {
              continue;
            }
            for_each_reach(iy, ix, [&](int o, int prow) {
              const double * src = dyf + static_cast<std::ptrdiff_t>(o) * f_out;
              double * dst = dw.row(prow + ch).data();
              for (int k = 0; k < f_out; ++k) {
                dst[k] += v * src[k];
              }
            });
          }
        }
      }
    }
    w_->grad += dw;
    return {};
  }
  std::vector<int> all(static_cast<std::size_t>(positions));
  for (int p = 0; p < positions; ++p) {
    all[static_cast<std::size_t>(p)] = p;
  }
  RMat dx = RMat::Zero(n, in_.size());
  RMat patch;
  for (Eigen::Index f = 0; f < n; ++f) {
    ConstRMatMap dyf(dy.row(f).data(), positions, f_out);
    patches(x.row(f).data(), all, patch);
    w_->grad.noalias() += patch.transpose() * dyf;
    const RMat dpatch = dyf * w_->value.transpose();
    double * dframe = dx.row(f).data();
    const int c = in_.c;
    for (int p = 0; p < positions; ++p) {
      const int oy = p / out_.w;
      const int ox = p % out_.w;
      const double * drow = dpatch.row(p).data();
      for (int ky = 0; ky < kernel_; ++ky) {
        const int iy = oy * stride_ - pad_top_ + ky;
        if (iy < 0 || iy >= in_.h) {
          continue;
        }
        for (int kx = 0; kx < kernel_; ++kx) {
          const int ix = ox * stride_ - pad_left_ + kx;
          if (ix < 0 || ix >= in_.w) {
            continue;
          }
          double * dst = dframe + (static_cast<std::ptrdiff_t>(iy) * in_.w + ix) * c;
          const double * src = drow + (ky * kernel_ + kx) * c;
          for (int ch = 0; ch < c; ++ch) {
            dst[ch] += src[ch];
          }
        }
      }
    }
  }
  return dx;
}

// -------------------------------------------------------------------------------- MaxPool2

MaxPool2::MaxPool2(MapShape in) : in_(in)
{
  out_ = {(in.h + 1) / 2, (in.w + 1) / 2, in.c};
}

RMat MaxPool2::forward(const RMat & x)
{
  if (x.cols() != in_.size()) {
    throw DimensionError("MaxPool2: unexpected input width");
  }
  rows_ = static_cast<int>(x.rows());
  RMat y(x.rows(), out_.size());
  argmax_.assign(static_cast<std::size_t>(x.rows()) * out_.size(), 0);
  const int c = in_.c;
  for (Eigen::Index f = 0; f < x.rows(); ++f) {
    const double * in = x.row(f).data();
    double * out = y.row(f).data();
    int * am = argmax_.data() + f * out_.size();
    for (int oy = 0; oy < out_.h; ++oy) {
      for (int ox = 0; ox < out_.w; ++ox) {
        const int o = (oy * out_.w + ox) * c;
        std::fill(out + o, out + o + c, -std::numeric_limits<double>::infinity());
        for (int dy = 0; dy < 2; ++dy) {
          const int iy = 2 * oy + dy;
          if (iy >= in_.h) {
            continue;
          }
          for (int dx = 0; dx < 2; ++dx) {
            const int ix = 2 * ox + dx;
            if (ix >= in_.w) {
              continue;
            }
            const int base = (iy * in_.w + ix) * c;
            for (int ch = 0; ch < c; ++ch) {
              if (in[base + ch] > out[o + ch]) {
                out[o + ch] = in[base + ch];
                am[o + ch] = base + ch;
              }
            }
          }
        }
      }
    }
  }
  return y;
}

RMat MaxPool2::backward(const RMat & dy) const
{
  RMat dx = RMat::Zero(rows_, in_.size());
  for (Eigen::Index f = 0; f < dy.rows(); ++f) {
    const int * am = argmax_.data() + f * out_.size();
    const double * g = dy.row(f).data();
    double * d = dx.row(f).data();
    for (int o = 0; o < out_.size(); ++o) {
      d[am[o]] += g[o];
    }
  }
  return dx;
}

// ------------------------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(ParamSet & params, const std::string & name, MapShape shape, double momentum, double eps)
  : shape_(shape), momentum_(momentum), eps_(eps)
{
  gamma_ = &params.add(name + ".gamma", Mat::Ones(1, shape.c));
  beta_ = &params.add(name + ".beta", Mat::Zero(1, shape.c));
  running_mean_ = &params.add(name + ".running_mean", Mat::Zero(1, shape.c), false);
  running_var_ = &params.add(name + ".running_var", Mat::Ones(1, shape.c), false);
}

RMat BatchNorm::forward(const RMat & x, bool training)
{
  if (x.cols() != shape_.size()) {
    throw DimensionError("BatchNorm: unexpected input width");
  }
  training_ = training;
  const Eigen::Index m = x.rows() * shape_.h * shape_.w;
  const int c = shape_.c;
  ConstRMatMap xm(x.data(), m, c);
  RowVec mean;
  RowVec var;
  if (training) {
    mean = col_sums(x.data(), m, c) / static_cast<double>(m);
    const RMat centered = xm.rowwise() - mean;
    var = col_dots(centered.data(), centered.data(), m, c) / static_cast<double>(m);
    const double unbias = m > 1 ? static_cast<double>(m) / static_cast<double>(m - 1) : 1.0;
    running_mean_->value.row(0) = momentum_ * running_mean_->value.row(0) + (1.0 - momentum_) * mean;
    running_var_->value.row(0) = momentum_ * running_var_->value.row(0) + (1.0 - momentum_) * unbias * var;
  } else {
    mean = running_mean_->value.row(0);
    var = running_var_->value.row(0);
  }
  inv_std_ = (var.array() + eps_).rsqrt().matrix();
  xhat_.resize(x.rows(), x.cols());
  RMatMap xh(xhat_.data(), m, c);
  xh = (xm.rowwise() - mean).array().rowwise() * inv_std_.array();
  RMat y(x.rows(), x.cols());
  RMatMap ym(y.data(), m, c);
  ym = (xh.array().rowwise() * gamma_->value.row(0).array()).rowwise() + beta_->value.row(0).array();
  return y;
}

RMat BatchNorm::backward(const RMat & dy)
{
  const Eigen::Index m = dy.rows() * shape_.h * shape_.w;
  const int c = shape_.c;
  ConstRMatMap dym(dy.data(), m, c);
  ConstRMatMap xh(xhat_.data(), m, c);
  gamma_->grad.row(0) += col_dots(dy.data(), xhat_.data(), m, c);
  beta_->grad.row(0) += col_sums(dy.data(), m, c);
  RMat dx(dy.rows(), dy.cols());
  RMatMap dxm(dx.data(), m, c);
  const RMat dxhat = dym.array().rowwise() * gamma_->value.row(0).array();
  if (!training_) {
    dxm = dxhat.array().rowwise() * inv_std_.array();
    return dx;
  }
  const RowVec sum_dxhat = col_sums(dxhat.data(), m, c);
  const RowVec sum_dxhat_xhat = col_dots(dxhat.data(), xhat_.data(), m, c);
  const double md = static_cast<double>(m);
  dxm = ((md * dxhat.array()).rowwise() - sum_dxhat.array() - (xh.array().rowwise() * sum_dxhat_xhat.array()))
            .rowwise() *
        (inv_std_.array() / md);
  return dx;
}

// ------------------------------------------------------------------------------------ Lstm

Lstm::Lstm(ParamSet & params, const std::string & name, int in, int hidden, Rng & rng) : in_(in), hidden_(hidden)
{
  wx_ = &params.add(name + ".wx", glorot_uniform(in, 4 * hidden, in, 4 * hidden, rng));
  wh_ = &params.add(name + ".wh", orthogonal(hidden, 4 * hidden, rng));
  Mat b = Mat::Zero(1, 4 * hidden);
  b.block(0, hidden, 1, hidden).setOnes();  // forget-gate bias
  b_ = &params.add(name + ".b", b);
}

Mat Lstm::forward(const Mat & xs, const Mat & mask)
{
  check_cols(xs, in_, "Lstm");
  const Eigen::Index b = mask.rows();
  const Eigen::Index len = mask.cols();
  if (xs.rows() != b * len) {
    throw DimensionError("Lstm: sequence rows do not match the mask");
  }
  const int h = hidden_;
  xs_ = xs;
  mask_ = mask;
  Mat xw = xs * wx_->value;
  xw.rowwise() += b_->value.row(0);
  gates_.resize(xs.rows(), 4 * h);
  c_.resize(xs.rows(), h);
  h_.resize(xs.rows(), h);
  Mat hp = Mat::Zero(b, h);
  Mat cp = Mat::Zero(b, h);
  for (Eigen::Index t = 0; t < len; ++t) {
    Mat z = xw.middleRows(t * b, b);
    z.noalias() += hp * wh_->value;
    Mat i = sigmoid(z.leftCols(h));
    Mat f = sigmoid(z.middleCols(h, h));
    Mat g = z.middleCols(2 * h, h).array().tanh().matrix();
    Mat o = sigmoid(z.rightCols(h));
    const Mat cn = f.cwiseProduct(cp) + i.cwiseProduct(g);
    const Mat hn = o.cwiseProduct(cn.array().tanh().matrix());
    const auto m = mask.col(t).array();
    Mat ct = (cn.array().colwise() * m + cp.array().colwise() * (1.0 - m)).matrix();
    Mat ht = (hn.array().colwise() * m + hp.array().colwise() * (1.0 - m)).matrix();
    auto gt = gates_.middleRows(t * b, b);
    gt.leftCols(h) = i;
    gt.middleCols(h, h) = f;
    gt.middleCols(2 * h, h) = g;
    gt.rightCols(h) = o;
    // The un-held cell state is what the gate derivatives need.
    c_.middleRows(t * b, b) = cn;
    h_.middleRows(t * b, b) = ht;
    hp = std::move(ht);
    cp = std::move(ct);
  }
  return h_;
}

Mat Lstm::backward(const Mat & dhs)
{
  const Eigen::Index b = mask_.rows();
  const Eigen::Index len = mask_.cols();
  const int h = hidden_;
  Mat dxw(xs_.rows(), 4 * h);
  Mat dh_next = Mat::Zero(b, h);
  Mat dc_next = Mat::Zero(b, h);
  // Held cell states are reconstructed on the fly: c_held(t) = m*c_new(t) + (1-m)*c_held(t-1).
  std::vector<Mat> c_held(static_cast<std::size_t>(len));
  {
    Mat cp = Mat::Zero(b, h);
    for (Eigen::Index t = 0; t < len; ++t) {
      const auto m = mask_.col(t).array();
      cp = (c_.middleRows(t * b, b).array().colwise() * m + cp.array().colwise() * (1.0 - m)).matrix();
      c_held[static_cast<std::size_t>(t)] = cp;
    }
  }
  for (Eigen::Index t = len - 1; t >= 0; --t) {
    const auto m = mask_.col(t).array();
    const Mat dh = dhs.middleRows(t * b, b) + dh_next;
    const Mat & dc = dc_next;
    const auto gt = gates_.middleRows(t * b, b);
    const Mat i = gt.leftCols(h);
    const Mat f = gt.middleCols(h, h);
    const Mat g = gt.middleCols(2 * h, h);
    const Mat o = gt.rightCols(h);
    const Mat cp = t > 0 ? c_held[static_cast<std::size_t>(t - 1)] : Mat::Zero(b, h);
    const Mat hp = t > 0 ? Mat(h_.middleRows((t - 1) * b, b)) : Mat::Zero(b, h);
    const Mat tc = c_.middleRows(t * b, b).array().tanh().matrix();
    const Mat dhn = (dh.array().colwise() * m).matrix();
    Mat dcn = (dc.array().colwise() * m).matrix();
    dcn.array() += dhn.array() * o.array() * (1.0 - tc.array().square());
    auto dz = dxw.middleRows(t * b, b);
    dz.leftCols(h) = (dcn.array() * g.array() * i.array() * (1.0 - i.array())).matrix();
    dz.middleCols(h, h) = (dcn.array() * cp.array() * f.array() * (1.0 - f.array())).matrix();
    dz.middleCols(2 * h, h) = (dcn.array() * i.array() * (1.0 - g.array().square())).matrix();
    dz.rightCols(h) = (dhn.array() * tc.array() * o.array() * (1.0 - o.array())).matrix();
    wh_->grad.noalias() += hp.transpose() * dz;
    dh_next = (dh.array().colwise() * (1.0 - m)).matrix();
    dh_next.noalias() += dz * wh_->value.transpose();
    dc_next = (dc.array().colwise() * (1.0 - m)).matrix() + dcn.cwiseProduct(f);
  }
  wx_->grad.noalias() += xs_.transpose() * dxw;
  b_->grad += dxw.colwise().sum();
  return dxw * wx_->value.transpose();
}

// --------------------------------------------------------------------------- SelfAttention

SelfAttention::SelfAttention(ParamSet & params, const std::string & name, int dim, Rng & rng) : dim_(dim)
{
  wq_ = &params.add(name + ".wq", glorot_uniform(dim, dim, dim, dim, rng));
  wk_ = &params.add(name + ".wk", glorot_uniform(dim, dim, dim, dim, rng));
  wv_ = &params.add(name + ".wv", glorot_uniform(dim, dim, dim, dim, rng));
}

Mat gather_item(const Mat & seq, int b, int batch)
{
  const Eigen::Index len = seq.rows() / batch;
  return seq(Eigen::seqN(b, len, batch), Eigen::all);
}

void scatter_item(Mat & seq, const Mat & item, int b, int batch)
{
  seq(Eigen::seqN(b, item.rows(), batch), Eigen::all) = item;
}

Mat SelfAttention::forward(const Mat & xs, const Mat & mask)
{
  check_cols(xs, dim_, "SelfAttention");
  const int b = static_cast<int>(mask.rows());
  const Eigen::Index len = mask.cols();
  if (xs.rows() != b * len) {
    throw DimensionError("SelfAttention: sequence rows do not match the mask");
  }
  xs_ = xs;
  mask_ = mask;
  q_ = xs * wq_->value;
  k_ = xs * wk_->value;
  v_ = xs * wv_->value;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim_));
  attn_.assign(static_cast<std::size_t>(b), Mat());
  Mat ys(xs.rows(), dim_);
  for (int i = 0; i < b; ++i) {
    const Mat q = gather_item(q_, i, b);
    const Mat k = gather_item(k_, i, b);
    const Mat v = gather_item(v_, i, b);
    Mat s = (q * k.transpose()) * scale;
    for (Eigen::Index j = 0; j < len; ++j) {
      if (mask(i, j) == 0.0) {
        s.col(j).setConstant(-std::numeric_limits<double>::infinity());
      }
    }
    Mat a = softmax_rows(s);
    scatter_item(ys, a * v, i, b);
    attn_[static_cast<std::size_t>(i)] = std::move(a);
  }
  return ys;
}

Mat SelfAttention::backward(const Mat & dys)
{
  const int b = static_cast<int>(mask_.rows());
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim_));
  Mat dq(xs_.rows(), dim_);
  Mat dk(xs_.rows(), dim_);
  Mat dv(xs_.rows(), dim_);
  for (int i = 0; i < b; ++i) {
    const Mat & a = attn_[static_cast<std::size_t>(i)];
    const Mat q = gather_item(q_, i, b);
    const Mat k = gather_item(k_, i, b);
    const Mat v = gather_item(v_, i, b);
    const Mat dy = gather_item(dys, i, b);
    const Mat da = dy * v.transpose();
    const Eigen::VectorXd rs = (da.array() * a.array()).rowwise().sum();
    const Mat ds = (a.array() * (da.array().colwise() - rs.array())).matrix() * scale;
    scatter_item(dq, ds * k, i, b);
    scatter_item(dk, ds.transpose() * q, i, b);
    scatter_item(dv, a.transpose() * dy, i, b);
  }
  wq_->grad.noalias() += xs_.transpose() * dq;
  wk_->grad.noalias() += xs_.transpose() * dk;
  wv_->grad.noalias() += xs_.transpose() * dv;
  Mat dx = dq * wq_->value.transpose();
  dx.noalias() += dk * wk_->value.transpose();
  dx.noalias() += dv * wv_->value.transpose();
  return dx;
}

}  // namespace vru::model
