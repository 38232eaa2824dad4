// Copyright 2026 The accentlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "accentlab/nn/layers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace accentlab::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

template <typename T>
ConstMapMat<T> as_matrix(const Tensor<T>& t, Eigen::Index rows, Eigen::Index cols) {
  return ConstMapMat<T>(t.ptr(), rows, cols);
}

template <typename T>
MapMat<T> as_matrix(Tensor<T>& t, Eigen::Index rows, Eigen::Index cols) {
  return MapMat<T>(t.ptr(), rows, cols);
}

[[noreturn]] void shape_fail(const std::string& layer, const std::string& what) {
  throw ShapeError(layer + ": " + what);
}

// Uniform(-limit, limit) with limit = sqrt(6 / fan): He for ReLU layers
// (fan = fan_in), Glorot otherwise (fan = (fan_in + fan_out) / 2).
template <typename T>
void init_uniform(Tensor<T>& w, Rng& rng, int fan_in, int fan_out, Activation act) {
  const double fan = act == Activation::kRelu ? fan_in : 0.5 * (fan_in + fan_out);
  const double limit = std::sqrt(3.0 / fan) * (act == Activation::kRelu ? std::sqrt(2.0) : 1.0);
  for (auto& v : w.data) v = static_cast<T>(rng.uniform(-limit, limit));
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kLinear: return "linear";
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kSoftmax: return "softmax";
    case Activation::kLogSoftmax: return "log_softmax";
  }
  return "?";
}

// ---------------------------------------------------------------- activations

template <typename T>
void apply_activation(Activation a, Tensor<T>& x, std::vector<std::int32_t>* decisions) {
  const std::size_t n = x.size();
  switch (a) {
    case Activation::kLinear:
      return;
    case Activation::kRelu:
      for (std::size_t i = 0; i < n; ++i) {
        if (decisions) decisions->push_back(x[i] > T(0));
        x[i] = x[i] > T(0) ? x[i] : T(0);
      }
      return;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < n; ++i) {
        const T v = x[i];
        x[i] = v >= T(0) ? T(1) / (T(1) + std::exp(-v))
                         : std::exp(v) / (T(1) + std::exp(v));
      }
      return;
    case Activation::kSoftmax:
    case Activation::kLogSoftmax: {
      const int c = x.shape.back();
      const std::size_t rows = n / c;
      for (std::size_t r = 0; r < rows; ++r) {
        T* row = x.ptr() + r * c;
        const T mx = *std::max_element(row, row + c);
        T sum = 0;
        for (int j = 0; j < c; ++j) sum += std::exp(row[j] - mx);
        if (a == Activation::kSoftmax) {
          for (int j = 0; j < c; ++j) row[j] = std::exp(row[j] - mx) / sum;
        } else {
          const T lse = mx + std::log(sum);
          for (int j = 0; j < c; ++j) row[j] -= lse;
        }
      }
      return;
    }
  }
}

template <typename T>
void activation_backward(Activation a, const Tensor<T>& y, Tensor<T>& g) {
  const std::size_t n = y.size();
  switch (a) {
    case Activation::kLinear:
      return;
    case Activation::kRelu:
      for (std::size_t i = 0; i < n; ++i) {
        if (!(y[i] > T(0))) g[i] = T(0);
      }
      return;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < n; ++i) g[i] *= y[i] * (T(1) - y[i]);
      return;
    case Activation::kSoftmax:
    case Activation::kLogSoftmax: {
      const int c = y.shape.back();
      const std::size_t rows = n / c;
      for (std::size_t r = 0; r < rows; ++r) {
        const T* yr = y.ptr() + r * c;
        T* gr = g.ptr() + r * c;
        if (a == Activation::kSoftmax) {
          T dot = 0;
          for (int j = 0; j < c; ++j) dot += gr[j] * yr[j];
          for (int j = 0; j < c; ++j) gr[j] = yr[j] * (gr[j] - dot);
        } else {
          T sum = 0;
          for (int j = 0; j < c; ++j) sum += gr[j];
          for (int j = 0; j < c; ++j) gr[j] -= std::exp(yr[j]) * sum;
        }
      }
      return;
    }
  }
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x) {
  Tensor<T> y = x;
  apply_activation(Activation::kSoftmax, y);
  return y;
}

template <typename T>
Tensor<T> log_softmax(const Tensor<T>& x) {
  Tensor<T> y = x;
  apply_activation(Activation::kLogSoftmax, y);
  return y;
}

template <typename T>
void check_one_hot(const Tensor<T>& label) {
  if (label.rank() != 2) throw LabelError("label tensor must be (batch, classes)");
  const int c = label.dim(1);
  for (int b = 0; b < label.dim(0); ++b) {
    int ones = 0;
    for (int j = 0; j < c; ++j) {
      const T v = label[static_cast<std::size_t>(b) * c + j];
      if (v == T(1)) {
        ++ones;
      } else if (v != T(0)) {
        throw LabelError("label entries must be 0 or 1");
      }
    }
    if (ones != 1) throw LabelError("label row " + std::to_string(b) + " is not one-hot");
  }
}

// ---------------------------------------------------------------- Layer base

template <typename T>
std::vector<const Parameter<T>*> Layer<T>::parameters() const {
  auto ps = const_cast<Layer<T>*>(this)->parameters();
  return {ps.begin(), ps.end()};
}

template <typename T>
std::size_t Layer<T>::param_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->size();
  return n;
}

template <typename T>
bool Layer<T>::has_trainable_parameters() const {
  for (const auto* p : parameters()) {
    if (p->trainable) return true;
  }
  return false;
}

template <typename T>
void Layer<T>::set_frozen(bool frozen) {
  frozen_ = frozen;
  auto ps = parameters();
  // Running statistics stay non-trainable regardless.
  for (auto* p : ps) {
    const bool is_stat = p->name.ends_with("/moving_mean") ||
                         p->name.ends_with("/moving_variance");
    p->trainable = !frozen && !is_stat;
  }
}

// ---------------------------------------------------------------- Conv1D

template <typename T>
Conv1D<T>::Conv1D(std::string name, int in_channels, int out_channels, int kernel,
                  int dilation, Padding padding, Activation activation)
    : Layer<T>(name),
      in_(in_channels),
      out_(out_channels),
      k_(kernel),
      d_(dilation),
      padding_(padding),
      act_(activation),
      kernel_(name + "/kernel", {kernel, in_channels, out_channels}),
      bias_(name + "/bias", {out_channels}) {
  if (kernel < 1 || dilation < 1 || in_channels < 1 || out_channels < 1) {
    shape_fail(name, "invalid convolution hyperparameters");
  }
}

template <typename T>
Shape Conv1D<T>::output_shape(const Shape& input) const {
  if (input.size() != 2 || input[1] != in_) {
    shape_fail(this->name(), "expects (T, " + std::to_string(in_) + "), got " +
                                 shape_str(input));
  }
  if (input[0] == kAnyLength || padding_ == Padding::kSame) return {input[0], out_};
  const int t = input[0] - (k_ - 1) * d_;
  if (t < 1) {
    shape_fail(this->name(), "input of " + std::to_string(input[0]) +
                                 " frames is shorter than the receptive field " +
                                 std::to_string(1 + (k_ - 1) * d_));
  }
  return {t, out_};
}

namespace {

// Copies (B, T, C) into (B, pl + T + pr, C) with zero borders.
template <typename T>
Tensor<T> pad_time(const Tensor<T>& x, int pl, int pr) {
  const int b = x.dim(0), t = x.dim(1), c = x.dim(2);
  const int tp = t + pl + pr;
  Tensor<T> out({b, tp, c});
  for (int i = 0; i < b; ++i) {
    std::copy_n(x.ptr() + static_cast<std::size_t>(i) * t * c,
                static_cast<std::size_t>(t) * c,
                out.ptr() + (static_cast<std::size_t>(i) * tp + pl) * c);
  }
  return out;
}

}  // namespace

template <typename T>
Tensor<T> Conv1D<T>::forward(const Tensor<T>& x, const ForwardContext<T>& ctx,
                             LayerCache<T>* /*cache*/) const {
  if (x.rank() != 3) shape_fail(this->name(), "expects a (B, T, C) tensor");
  const Shape per = output_shape({x.dim(1), x.dim(2)});
  const int batch = x.dim(0), t_out = per[0];
  const int span = (k_ - 1) * d_;
  const int pad_total = padding_ == Padding::kSame ? span : 0;
  const int tp = x.dim(1) + pad_total;

  Tensor<T> padded;
  if (pad_total) padded = pad_time(x, pad_total / 2, pad_total - pad_total / 2);
  const Tensor<T>& xp = pad_total ? padded : x;

  // Every tap is one GEMM over the whole batch laid end to end; rows that
  // straddle two utterances are computed and then discarded.
  const Eigen::Index rows = static_cast<Eigen::Index>(batch) * tp;
  const Eigen::Index full = rows - span;
  auto X = as_matrix(xp, rows, in_);
  auto W = as_matrix(kernel_.value, static_cast<Eigen::Index>(k_) * in_, out_);
  auto bias = as_matrix(bias_.value, 1, out_);

  Tensor<T> out({batch, t_out, out_});
  if (span == 0) {
    auto Y = as_matrix(out, rows, out_);
    Y.noalias() = X * W;
    Y.rowwise() += bias.row(0);
  } else {
    RowMat<T> Y(full, out_);
    Y.rowwise() = bias.row(0);
    for (int j = 0; j < k_; ++j) {
      Y.noalias() += X.middleRows(static_cast<Eigen::Index>(j) * d_, full) *
                     W.middleRows(static_cast<Eigen::Index>(j) * in_, in_);
    }
    auto O = as_matrix(out, static_cast<Eigen::Index>(batch) * t_out, out_);
    for (int b = 0; b < batch; ++b) {
      O.middleRows(static_cast<Eigen::Index>(b) * t_out, t_out) =
          Y.middleRows(static_cast<Eigen::Index>(b) * tp, t_out);
    }
  }
  apply_activation(act_, out, ctx.decisions);
  return out;
}

template <typename T>
Tensor<T> Conv1D<T>::backward(const Tensor<T>& grad_out, const Tensor<T>& input,
                              const Tensor<T>& output, const LayerCache<T>& /*cache*/,
                              bool need_input_grad) {
  const int batch = input.dim(0), t_in = input.dim(1), t_out = output.dim(1);
  const int span = (k_ - 1) * d_;
  const int pad_total = padding_ == Padding::kSame ? span : 0;
  const int pl = pad_total / 2;
  const int tp = t_in + pad_total;
  const Eigen::Index rows = static_cast<Eigen::Index>(batch) * tp;
  const Eigen::Index full = rows - span;

  Tensor<T> g = grad_out;
  activation_backward(act_, output, g);
  auto G = as_matrix(g, static_cast<Eigen::Index>(batch) * t_out, out_);

  // Scatter into the "full" row space used by the forward GEMMs.
  RowMat<T> gfull_storage;
  const T* gfull_ptr = g.ptr();
  if (span != 0) {
    gfull_storage = RowMat<T>::Zero(full, out_);
    for (int b = 0; b < batch; ++b) {
      gfull_storage.middleRows(static_cast<Eigen::Index>(b) * tp, t_out) =
          G.middleRows(static_cast<Eigen::Index>(b) * t_out, t_out);
    }
    gfull_ptr = gfull_storage.data();
  }
  ConstMapMat<T> Gf(gfull_ptr, full, out_);
  auto W = as_matrix(kernel_.value, static_cast<Eigen::Index>(k_) * in_, out_);

  Tensor<T> padded;
  if (pad_total) padded = pad_time(input, pl, pad_total - pl);
  const Tensor<T>& xp = pad_total ? padded : input;
  auto X = as_matrix(xp, rows, in_);

  if (!this->frozen()) {
    auto dW = as_matrix(kernel_.grad, static_cast<Eigen::Index>(k_) * in_, out_);
    for (int j = 0; j < k_; ++j) {
      dW.middleRows(static_cast<Eigen::Index>(j) * in_, in_).noalias() +=
          X.middleRows(static_cast<Eigen::Index>(j) * d_, full).transpose() * Gf;
    }
    auto db = as_matrix(bias_.grad, 1, out_);
    db.row(0) += G.colwise().sum();
  }
  if (!need_input_grad) return {};

  RowMat<T> dXp = RowMat<T>::Zero(rows, in_);
  for (int j = 0; j < k_; ++j) {
    dXp.middleRows(static_cast<Eigen::Index>(j) * d_, full).noalias() +=
        Gf * W.middleRows(static_cast<Eigen::Index>(j) * in_, in_).transpose();
  }
  Tensor<T> dx({batch, t_in, in_});
  auto DX = as_matrix(dx, static_cast<Eigen::Index>(batch) * t_in, in_);
  for (int b = 0; b < batch; ++b) {
    DX.middleRows(static_cast<Eigen::Index>(b) * t_in, t_in) =
        dXp.middleRows(static_cast<Eigen::Index>(b) * tp + pl, t_in);
  }
  return dx;
}

template <typename T>
void Conv1D<T>::initialize(Rng& rng) {
  init_uniform(kernel_.value, rng, k_ * in_, k_ * out_, act_);
  bias_.value.fill(T(0));
}

// ---------------------------------------------------------------- Dense

template <typename T>
Dense<T>::Dense(std::string name, int in_dim, int out_dim, Activation activation)
    : Layer<T>(name),
      in_(in_dim),
      out_(out_dim),
      act_(activation),
      kernel_(name + "/kernel", {in_dim, out_dim}),
      bias_(name + "/bias", {out_dim}) {}

template <typename T>
Shape Dense<T>::output_shape(const Shape& input) const {
  if (input.size() != 1 || input[0] != in_) {
    shape_fail(this->name(), "expects (" + std::to_string(in_) + ",), got " +
                                 shape_str(input));
  }
  return {out_};
}

template <typename T>
Tensor<T> Dense<T>::forward(const Tensor<T>& x, const ForwardContext<T>& ctx,
                            LayerCache<T>* cache) const {
  if (x.rank() != 2 || x.dim(1) != in_) shape_fail(this->name(), "expects (B, in)");
  const int batch = x.dim(0);
  Tensor<T> out({batch, out_});
  auto Y = as_matrix(out, batch, out_);
  Y.noalias() = as_matrix(x, batch, in_) * as_matrix(kernel_.value, in_, out_);
  Y.rowwise() += as_matrix(bias_.value, 1, out_).row(0);
  // Logits of a normalized output are kept for log-space losses.
  if (cache && (act_ == Activation::kSoftmax || act_ == Activation::kLogSoftmax)) {
    cache->tensors = {out};
  }
  apply_activation(act_, out, ctx.decisions);
  return out;
}

template <typename T>
Tensor<T> Dense<T>::backward(const Tensor<T>& grad_out, const Tensor<T>& input,
                             const Tensor<T>& output, const LayerCache<T>& /*cache*/,
                             bool need_input_grad) {
  Tensor<T> g = grad_out;
  activation_backward(act_, output, g);
  return backward_preactivation(g, input, need_input_grad);
}

template <typename T>
Tensor<T> Dense<T>::backward_preactivation(const Tensor<T>& g, const Tensor<T>& input,
                                           bool need_input_grad) {
  const int batch = input.dim(0);
  auto G = as_matrix(g, batch, out_);
  if (!this->frozen()) {
    as_matrix(kernel_.grad, in_, out_).noalias() += as_matrix(input, batch, in_).transpose() * G;
    as_matrix(bias_.grad, 1, out_).row(0) += G.colwise().sum();
  }
  if (!need_input_grad) return {};
  Tensor<T> dx({batch, in_});
  as_matrix(dx, batch, in_).noalias() = G * as_matrix(kernel_.value, in_, out_).transpose();
  return dx;
}

template <typename T>
void Dense<T>::initialize(Rng& rng) {
  init_uniform(kernel_.value, rng, in_, out_, act_);
  bias_.value.fill(T(0));
}

// ---------------------------------------------------------------- BatchNorm

template <typename T>
BatchNorm<T>::BatchNorm(std::string name, int channels, double momentum, double epsilon)
    : Layer<T>(name),
      c_(channels),
      momentum_(momentum),
      eps_(epsilon),
      gamma_(name + "/gamma", {channels}),
      beta_(name + "/beta", {channels}),
      moving_mean_(name + "/moving_mean", {channels}, false),
      moving_var_(name + "/moving_variance", {channels}, false) {
  gamma_.value.fill(T(1));
  moving_var_.value.fill(T(1));
}

template <typename T>
Shape BatchNorm<T>::output_shape(const Shape& input) const {
  if (input.empty() || input.back() != c_) {
    shape_fail(this->name(), "expects last dimension " + std::to_string(c_) + ", got " +
                                 shape_str(input));
  }
  return input;
}

template <typename T>
Tensor<T> BatchNorm<T>::forward(const Tensor<T>& x, const ForwardContext<T>& ctx,
                                LayerCache<T>* cache) const {
  if (x.rank() < 2 || x.shape.back() != c_) shape_fail(this->name(), "channel mismatch");
  const Eigen::Index n = static_cast<Eigen::Index>(x.size() / c_);
  auto X = as_matrix(x, n, c_);
  Tensor<T> out(x.shape);
  auto Y = as_matrix(out, n, c_);
  auto gamma = as_matrix(gamma_.value, 1, c_).row(0).array();
  auto beta = as_matrix(beta_.value, 1, c_).row(0).array();

  const bool batch_stats = ctx.mode == Mode::kTrain && !this->frozen();
  if (!batch_stats) {
    auto mean = as_matrix(moving_mean_.value, 1, c_).row(0).array();
    auto var = as_matrix(moving_var_.value, 1, c_).row(0).array();
    const Eigen::Array<T, 1, Eigen::Dynamic> scale = gamma / (var + T(eps_)).sqrt();
    const Eigen::Array<T, 1, Eigen::Dynamic> shift = beta - mean * scale;
    Y.array() = (X.array().rowwise() * scale).rowwise() + shift;
    if (cache) cache->used_batch_stats = false;
    return out;
  }
  if (n < 2) shape_fail(this->name(), "train mode needs at least 2 values per channel");
  const Eigen::Array<T, 1, Eigen::Dynamic> mean = X.colwise().mean().array();
  const Eigen::Array<T, 1, Eigen::Dynamic> var =
      (X.array().rowwise() - mean).square().colwise().mean();
  const Eigen::Array<T, 1, Eigen::Dynamic> inv_std = (var + T(eps_)).rsqrt();
  Y.array() = ((X.array().rowwise() - mean).rowwise() * (inv_std * gamma)).rowwise() + beta;
  if (cache) {
    cache->used_batch_stats = true;
    Tensor<T> stats({3, c_});
    auto S = as_matrix(stats, 3, c_);
    S.row(0) = mean.matrix();
    S.row(1) = var.matrix();
    S.row(2) = inv_std.matrix();
    cache->tensors = {std::move(stats)};
  }
  return out;
}

template <typename T>
Tensor<T> BatchNorm<T>::backward(const Tensor<T>& grad_out, const Tensor<T>& input,
                                 const Tensor<T>& /*output*/, const LayerCache<T>& cache,
                                 bool need_input_grad) {
  const Eigen::Index n = static_cast<Eigen::Index>(input.size() / c_);
  auto X = as_matrix(input, n, c_);
  auto G = as_matrix(grad_out, n, c_);
  auto gamma = as_matrix(gamma_.value, 1, c_).row(0).array();

  Eigen::Array<T, 1, Eigen::Dynamic> mean, inv_std;
  if (cache.used_batch_stats) {
    auto S = as_matrix(cache.tensors.at(0), 3, c_);
    mean = S.row(0).array();
    inv_std = S.row(2).array();
  } else {
    mean = as_matrix(moving_mean_.value, 1, c_).row(0).array();
    inv_std = (as_matrix(moving_var_.value, 1, c_).row(0).array() + T(eps_)).rsqrt();
  }
  const RowMat<T> xhat = ((X.array().rowwise() - mean).rowwise() * inv_std).matrix();
  const Eigen::Array<T, 1, Eigen::Dynamic> sum_g = G.colwise().sum().array();
  const Eigen::Array<T, 1, Eigen::Dynamic> sum_gx =
      (G.array() * xhat.array()).colwise().sum();
  if (!this->frozen()) {
    as_matrix(gamma_.grad, 1, c_).row(0).array() += sum_gx;
    as_matrix(beta_.grad, 1, c_).row(0).array() += sum_g;
  }
  if (!need_input_grad) return {};
  Tensor<T> dx(input.shape);
  auto DX = as_matrix(dx, n, c_);
  if (cache.used_batch_stats) {
    const T inv_n = T(1) / static_cast<T>(n);
    DX.array() = ((G.array().rowwise() - sum_g * inv_n) -
                  xhat.array().rowwise() * (sum_gx * inv_n))
                     .rowwise() *
                 (gamma * inv_std);
  } else {
    DX.array() = G.array().rowwise() * (gamma * inv_std);
  }
  return dx;
}

template <typename T>
void BatchNorm<T>::commit(const LayerCache<T>& cache) {
  if (!cache.used_batch_stats || this->frozen()) return;
  auto S = as_matrix(cache.tensors.at(0), 3, c_);
  const T m = static_cast<T>(momentum_);
  auto mm = as_matrix(moving_mean_.value, 1, c_);
  auto mv = as_matrix(moving_var_.value, 1, c_);
  mm.row(0) = m * mm.row(0) + (T(1) - m) * S.row(0);
  mv.row(0) = m * mv.row(0) + (T(1) - m) * S.row(1);
}

template <typename T>
void BatchNorm<T>::initialize(Rng& /*rng*/) {
  gamma_.value.fill(T(1));
  beta_.value.fill(T(0));
  moving_mean_.value.fill(T(0));
  moving_var_.value.fill(T(1));
}

// ---------------------------------------------------------------- pooling

template <typename T>
MaxPool1D<T>::MaxPool1D(std::string name, int pool) : Layer<T>(std::move(name)), pool_(pool) {
  if (pool < 1) shape_fail(this->name(), "pool size must be >= 1");
}

template <typename T>
Shape MaxPool1D<T>::output_shape(const Shape& input) const {
  if (input.size() != 2) shape_fail(this->name(), "expects (T, C)");
  if (input[0] == kAnyLength) return input;
  if (input[0] / pool_ < 1) shape_fail(this->name(), "fewer frames than the pool size");
  return {input[0] / pool_, input[1]};
}

template <typename T>
Tensor<T> MaxPool1D<T>::forward(const Tensor<T>& x, const ForwardContext<T>& ctx,
                                LayerCache<T>* cache) const {
  if (x.rank() != 3) shape_fail(this->name(), "expects (B, T, C)");
  const int batch = x.dim(0), t = x.dim(1), c = x.dim(2);
  const int t_out = output_shape({t, c})[0];
  Tensor<T> out({batch, t_out, c});
  std::vector<std::int32_t> arg(out.size());
  for (int b = 0; b < batch; ++b) {
    for (int o = 0; o < t_out; ++o) {
      const std::size_t dst = (static_cast<std::size_t>(b) * t_out + o) * c;
      for (int ch = 0; ch < c; ++ch) {
        int best = o * pool_;
        T best_v = x[(static_cast<std::size_t>(b) * t + best) * c + ch];
        for (int i = 1; i < pool_; ++i) {
          const int src = o * pool_ + i;
          const T v = x[(static_cast<std::size_t>(b) * t + src) * c + ch];
          if (v > best_v) {
            best_v = v;
            best = src;
          }
        }
        out[dst + ch] = best_v;
        arg[dst + ch] = best;
      }
    }
  }
  if (ctx.decisions) ctx.decisions->insert(ctx.decisions->end(), arg.begin(), arg.end());
  if (cache) cache->indices = std::move(arg);
  return out;
}

template <typename T>
Tensor<T> MaxPool1D<T>::backward(const Tensor<T>& grad_out, const Tensor<T>& input,
                                 const Tensor<T>& output, const LayerCache<T>& cache,
                                 bool need_input_grad) {
  if (!need_input_grad) return {};
  const int batch = input.dim(0), t = input.dim(1), c = input.dim(2);
  const int t_out = output.dim(1);
  Tensor<T> dx(input.shape);
  for (int b = 0; b < batch; ++b) {
    for (int o = 0; o < t_out; ++o) {
      const std::size_t idx = (static_cast<std::size_t>(b) * t_out + o) * c;
      for (int ch = 0; ch < c; ++ch) {
        dx[(static_cast<std::size_t>(b) * t + cache.indices[idx + ch]) * c + ch] +=
            grad_out[idx + ch];
      }
    }
  }
  return dx;
}

template <typename T>
Shape GlobalAvgPool1D<T>::output_shape(const Shape& input) const {
  if (input.size() != 2) shape_fail(this->name(), "expects (T, C)");
  return {input[1]};
}

template <typename T>
Tensor<T> GlobalAvgPool1D<T>::forward(const Tensor<T>& x, const ForwardContext<T>&,
                                      LayerCache<T>*) const {
  if (x.rank() != 3) shape_fail(this->name(), "expects (B, T, C)");
  const int batch = x.dim(0), t = x.dim(1), c = x.dim(2);
  Tensor<T> out({batch, c});
  for (int b = 0; b < batch; ++b) {
    auto X = ConstMapMat<T>(x.ptr() + static_cast<std::size_t>(b) * t * c, t, c);
    as_matrix(out, batch, c).row(b) = X.colwise().mean();
  }
  return out;
}

template <typename T>
Tensor<T> GlobalAvgPool1D<T>::backward(const Tensor<T>& grad_out, const Tensor<T>& input,
                                       const Tensor<T>&, const LayerCache<T>&,
                                       bool need_input_grad) {
  if (!need_input_grad) return {};
  const int batch = input.dim(0), t = input.dim(1), c = input.dim(2);
  Tensor<T> dx(input.shape);
  const T inv = T(1) / static_cast<T>(t);
  for (int b = 0; b < batch; ++b) {
    MapMat<T> DX(dx.ptr() + static_cast<std::size_t>(b) * t * c, t, c);
    DX.rowwise() = as_matrix(grad_out, batch, c).row(b) * inv;
  }
  return dx;
}

template <typename T>
Upsample1D<T>::Upsample1D(std::string name, int factor)
    : Layer<T>(std::move(name)), factor_(factor) {
  if (factor < 1) shape_fail(this->name(), "upsampling factor must be >= 1");
}

template <typename T>
Shape Upsample1D<T>::output_shape(const Shape& input) const {
  if (input.size() != 2) shape_fail(this->name(), "expects (T, C)");
  return {input[0] == kAnyLength ? kAnyLength : input[0] * factor_, input[1]};
}

template <typename T>
Tensor<T> Upsample1D<T>::forward(const Tensor<T>& x, const ForwardContext<T>&,
                                 LayerCache<T>*) const {
  if (x.rank() != 3) shape_fail(this->name(), "expects (B, T, C)");
  const int batch = x.dim(0), t = x.dim(1), c = x.dim(2);
  Tensor<T> out({batch, t * factor_, c});
  for (int b = 0; b < batch; ++b) {
    for (int i = 0; i < t; ++i) {
      const T* src = x.ptr() + (static_cast<std::size_t>(b) * t + i) * c;
      for (int r = 0; r < factor_; ++r) {
        std::copy_n(src, c,
                    out.ptr() + (static_cast<std::size_t>(b) * t * factor_ + i * factor_ + r) * c);
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> Upsample1D<T>::backward(const Tensor<T>& grad_out, const Tensor<T>& input,
                                  const Tensor<T>&, const LayerCache<T>&,
                                  bool need_input_grad) {
  if (!need_input_grad) return {};
  const int batch = input.dim(0), t = input.dim(1), c = input.dim(2);
  Tensor<T> dx(input.shape);
  for (int b = 0; b < batch; ++b) {
    for (int i = 0; i < t; ++i) {
      T* dst = dx.ptr() + (static_cast<std::size_t>(b) * t + i) * c;
      for (int r = 0; r < factor_; ++r) {
        const T* src =
            grad_out.ptr() + (static_cast<std::size_t>(b) * t * factor_ + i * factor_ + r) * c;
        for (int ch = 0; ch < c; ++ch) dst[ch] += src[ch];
      }
    }
  }
  return dx;
}

template <typename T>
Shape StatsPooling<T>::output_shape(const Shape& input) const {
  if (input.size() != 2) shape_fail(this->name(), "expects (T, C)");
  return {2 * input[1]};
}

namespace {
constexpr double kStatsEps = 1e-9;
}

template <typename T>
Tensor<T> StatsPooling<T>::forward(const Tensor<T>& x, const ForwardContext<T>&,
                                   LayerCache<T>*) const {
  if (x.rank() != 3) shape_fail(this->name(), "expects (B, T, C)");
  const int batch = x.dim(0), t = x.dim(1), c = x.dim(2);
  if (t < 1) shape_fail(this->name(), "needs at least one frame");
  Tensor<T> out({batch, 2 * c});
  auto O = as_matrix(out, batch, 2 * c);
  for (int b = 0; b < batch; ++b) {
    auto X = ConstMapMat<T>(x.ptr() + static_cast<std::size_t>(b) * t * c, t, c);
    const Eigen::Array<T, 1, Eigen::Dynamic> mean = X.colwise().mean().array();
    const Eigen::Array<T, 1, Eigen::Dynamic> var =
        (X.array().rowwise() - mean).square().colwise().mean();
    O.row(b).head(c) = mean.matrix();
    O.row(b).tail(c) = (var + T(kStatsEps)).sqrt().matrix();
  }
  return out;
}

template <typename T>
Tensor<T> StatsPooling<T>::backward(const Tensor<T>& grad_out, const Tensor<T>& input,
                                    const Tensor<T>& output, const LayerCache<T>&,
                                    bool need_input_grad) {
  if (!need_input_grad) return {};
  const int batch = input.dim(0), t = input.dim(1), c = input.dim(2);
  Tensor<T> dx(input.shape);
  auto O = as_matrix(output, batch, 2 * c);
  auto G = as_matrix(grad_out, batch, 2 * c);
  const T inv_t = T(1) / static_cast<T>(t);
  for (int b = 0; b < batch; ++b) {
    auto X = ConstMapMat<T>(input.ptr() + static_cast<std::size_t>(b) * t * c, t, c);
    MapMat<T> DX(dx.ptr() + static_cast<std::size_t>(b) * t * c, t, c);
    const Eigen::Array<T, 1, Eigen::Dynamic> mean = O.row(b).head(c).array();
    const Eigen::Array<T, 1, Eigen::Dynamic> sd = O.row(b).tail(c).array();
    const Eigen::Array<T, 1, Eigen::Dynamic> g_mean = G.row(b).head(c).array() * inv_t;
    const Eigen::Array<T, 1, Eigen::Dynamic> g_sd = G.row(b).tail(c).array() * inv_t / sd;
    DX.array() = ((X.array().rowwise() - mean).rowwise() * g_sd).rowwise() + g_mean;
  }
  return dx;
}

template <typename T>
Dropout<T>::Dropout(std::string name, double rate) : Layer<T>(std::move(name)), rate_(rate) {
  if (rate < 0.0 || rate >= 1.0) shape_fail(this->name(), "dropout rate must be in [0, 1)");
}

template <typename T>
Tensor<T> Dropout<T>::forward(const Tensor<T>& x, const ForwardContext<T>& ctx,
                              LayerCache<T>* cache) const {
  if (ctx.mode == Mode::kInfer || rate_ == 0.0) {
    if (cache) cache->tensors.clear();
    return x;
  }
  if (!ctx.rng) throw Error(this->name() + ": train-mode dropout needs a generator");
  Tensor<T> mask(x.shape);
  const T keep = static_cast<T>(1.0 / (1.0 - rate_));
  for (auto& m : mask.data) m = ctx.rng->uniform() >= rate_ ? keep : T(0);
  Tensor<T> out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  if (cache) cache->tensors = {std::move(mask)};
  return out;
}

template <typename T>
Tensor<T> Dropout<T>::backward(const Tensor<T>& grad_out, const Tensor<T>&, const Tensor<T>&,
                               const LayerCache<T>& cache, bool need_input_grad) {
  if (!need_input_grad) return {};
  Tensor<T> dx = grad_out;
  if (!cache.tensors.empty()) {
    const auto& mask = cache.tensors[0];
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= mask[i];
  }
  return dx;
}

// ---------------------------------------------------------------- EmbeddingConcat

template <typename T>
EmbeddingConcat<T>::EmbeddingConcat(std::string name, int n_labels, int dim)
    : Layer<T>(name), n_(n_labels), dim_(dim), table_(name + "/embeddings", {2, dim}) {}

template <typename T>
Shape EmbeddingConcat<T>::output_shape(const Shape& input) const {
  if (input.size() != 2 || input[1] != dim_) {
    shape_fail(this->name(), "expects (T, " + std::to_string(dim_) + "), got " +
                                 shape_str(input));
  }
  return {input[0] == kAnyLength ? kAnyLength : input[0] + n_, dim_};
}

template <typename T>
Tensor<T> EmbeddingConcat<T>::forward(const Tensor<T>& x, const ForwardContext<T>& ctx,
                                      LayerCache<T>* cache) const {
  if (!ctx.label) throw LabelError(this->name() + ": no label input supplied");
  const Tensor<T>& label = *ctx.label;
  check_one_hot(label);
  if (x.rank() != 3 || x.dim(2) != dim_) shape_fail(this->name(), "feature shape mismatch");
  const int batch = x.dim(0), t = x.dim(1);
  if (label.dim(0) != batch || label.dim(1) != n_) {
    throw LabelError(this->name() + ": label must be (" + std::to_string(batch) + ", " +
                     std::to_string(n_) + ")");
  }
  Tensor<T> out({batch, t + n_, dim_});
  std::vector<std::int32_t> rows(static_cast<std::size_t>(batch) * n_);
  for (int b = 0; b < batch; ++b) {
    T* dst = out.ptr() + static_cast<std::size_t>(b) * (t + n_) * dim_;
    std::copy_n(x.ptr() + static_cast<std::size_t>(b) * t * dim_,
                static_cast<std::size_t>(t) * dim_, dst);
    for (int i = 0; i < n_; ++i) {
      const int row = label[static_cast<std::size_t>(b) * n_ + i] == T(1) ? 1 : 0;
      rows[static_cast<std::size_t>(b) * n_ + i] = row;
      std::copy_n(table_.value.ptr() + static_cast<std::size_t>(row) * dim_, dim_,
                  dst + static_cast<std::size_t>(t + i) * dim_);
    }
  }
  if (cache) cache->indices = std::move(rows);
  return out;
}

template <typename T>
Tensor<T> EmbeddingConcat<T>::backward(const Tensor<T>& grad_out, const Tensor<T>& input,
                                       const Tensor<T>&, const LayerCache<T>& cache,
                                       bool need_input_grad) {
  const int batch = input.dim(0), t = input.dim(1);
  const std::size_t per = static_cast<std::size_t>(t + n_) * dim_;
  if (!this->frozen()) {
    for (int b = 0; b < batch; ++b) {
      for (int i = 0; i < n_; ++i) {
        const int row = cache.indices[static_cast<std::size_t>(b) * n_ + i];
        const T* src = grad_out.ptr() + b * per + static_cast<std::size_t>(t + i) * dim_;
        T* dst = table_.grad.ptr() + static_cast<std::size_t>(row) * dim_;
        for (int j = 0; j < dim_; ++j) dst[j] += src[j];
      }
    }
  }
  if (!need_input_grad) return {};
  Tensor<T> dx(input.shape);
  for (int b = 0; b < batch; ++b) {
    std::copy_n(grad_out.ptr() + b * per, static_cast<std::size_t>(t) * dim_,
                dx.ptr() + static_cast<std::size_t>(b) * t * dim_);
  }
  return dx;
}

template <typename T>
void EmbeddingConcat<T>::initialize(Rng& rng) {
  // Keras Embedding default: uniform(-0.05, 0.05).
  for (auto& v : table_.value.data) v = static_cast<T>(rng.uniform(-0.05, 0.05));
}

#define ACCENTLAB_INSTANTIATE(T)                                                   \
  template class Layer<T>;                                                         \
  template class Conv1D<T>;                                                        \
  template class Dense<T>;                                                         \
  template class BatchNorm<T>;                                                     \
  template class MaxPool1D<T>;                                                     \
  template class GlobalAvgPool1D<T>;                                               \
  template class Upsample1D<T>;                                                    \
  template class StatsPooling<T>;                                                  \
  template class Dropout<T>;                                                       \
  template class EmbeddingConcat<T>;                                               \
  template void apply_activation<T>(Activation, Tensor<T>&, std::vector<std::int32_t>*); \
  template void activation_backward<T>(Activation, const Tensor<T>&, Tensor<T>&);  \
  template Tensor<T> softmax<T>(const Tensor<T>&);                                 \
  template Tensor<T> log_softmax<T>(const Tensor<T>&);                             \
  template void check_one_hot<T>(const Tensor<T>&);

ACCENTLAB_INSTANTIATE(float)
ACCENTLAB_INSTANTIATE(double)

}  // namespace accentlab::nn
