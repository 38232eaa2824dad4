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

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "accentlab/nn/tensor.hpp"
#include "accentlab/rng.hpp"

namespace accentlab::nn {

enum class Mode { kTrain, kInfer };

enum class Activation { kLinear, kRelu, kSigmoid, kSoftmax, kLogSoftmax };

enum class Padding { kValid, kSame };

std::string to_string(Activation a);

/// Per-call inputs that are not the activation tensor itself.
template <typename T>
struct ForwardContext {
  Mode mode = Mode::kInfer;
  /// Dropout masks are drawn from here in train mode.
  Rng* rng = nullptr;
  /// Second graph input (one-hot accent labels, shape (B, N)).
  const Tensor<T>* label = nullptr;
  /// When set, every piecewise-linear decision (ReLU sign, max-pool
  /// argmax) is appended here. Gradient checking compares these to spot
  /// finite-difference steps that straddle a kink.
  std::vector<std::int32_t>* decisions = nullptr;
};

/// Extra state a layer's forward pass keeps for its backward pass, beyond
/// its input and output (which the graph tape already holds).
template <typename T>
struct LayerCache {
  std::vector<Tensor<T>> tensors;
  std::vector<std::int32_t> indices;
  bool used_batch_stats = false;
};

/// One node of a sequential graph.
///
/// Shapes passed to output_shape() exclude the batch dimension; tensors
/// passed to forward() carry it as dimension 0. forward() is const so that
/// a trained graph can serve concurrent inference; the only train-time
/// state change (batch-norm running statistics) happens in commit().
template <typename T>
class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;
  Layer(const Layer&) = delete;
  Layer& operator=(const Layer&) = delete;

  const std::string& name() const { return name_; }
  virtual std::string kind() const = 0;

  virtual Shape output_shape(const Shape& input) const = 0;

  virtual Tensor<T> forward(const Tensor<T>& x, const ForwardContext<T>& ctx,
                            LayerCache<T>* cache) const = 0;

  /// Accumulates parameter gradients (unless frozen) and returns the
  /// gradient with respect to the input when need_input_grad is set
  /// (an empty tensor otherwise). `input` and `output` are the tensors
  /// seen and produced by the matching forward call.
  virtual Tensor<T> backward(const Tensor<T>& grad_out, const Tensor<T>& input,
                             const Tensor<T>& output, const LayerCache<T>& cache,
                             bool need_input_grad) = 0;

  virtual void commit(const LayerCache<T>& /*cache*/) {}
  virtual void initialize(Rng& /*rng*/) {}

  virtual std::vector<Parameter<T>*> parameters() { return {}; }
  std::vector<const Parameter<T>*> parameters() const;

  std::size_t param_count() const;
  bool has_trainable_parameters() const;

  bool frozen() const { return frozen_; }
  /// Freezing marks every parameter non-trainable and switches layers with
  /// batch statistics to their inference behaviour.
  void set_frozen(bool frozen);

 private:
  std::string name_;
  bool frozen_ = false;
};

template <typename T>
class Conv1D final : public Layer<T> {
 public:
  Conv1D(std::string name, int in_channels, int out_channels, int kernel,
         int dilation = 1, Padding padding = Padding::kValid,
         Activation activation = Activation::kLinear);

  std::string kind() const override { return "Conv1D"; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext<T>& ctx,
                    LayerCache<T>* cache) const override;
  Tensor<T> backward(const Tensor<T>& grad_out, const Tensor<T>& input,
                     const Tensor<T>& output, const LayerCache<T>& cache,
                     bool need_input_grad) override;
  void initialize(Rng& rng) override;
  std::vector<Parameter<T>*> parameters() override { return {&kernel_, &bias_}; }

  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  int kernel_size() const { return k_; }
  int dilation() const { return d_; }
  Padding padding() const { return padding_; }
  Activation activation() const { return act_; }
  /// Kernel layout (k, C_in, C_out): tap j occupies rows [j*C_in, (j+1)*C_in).
  Parameter<T>& kernel() { return kernel_; }
  Parameter<T>& bias() { return bias_; }

 private:
  int in_, out_, k_, d_;
  Padding padding_;
  Activation act_;
  Parameter<T> kernel_, bias_;
};

template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(std::string name, int in_dim, int out_dim,
        Activation activation = Activation::kLinear);

  std::string kind() const override { return "Dense"; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext<T>& ctx,
                    LayerCache<T>* cache) const override;
  Tensor<T> backward(const Tensor<T>& grad_out, const Tensor<T>& input,
                     const Tensor<T>& output, const LayerCache<T>& cache,
                     bool need_input_grad) override;
  void initialize(Rng& rng) override;
  std::vector<Parameter<T>*> parameters() override { return {&kernel_, &bias_}; }

  /// Backward pass given the gradient with respect to the pre-activation
  /// (the logits), skipping the activation's own derivative.
  Tensor<T> backward_preactivation(const Tensor<T>& grad_z, const Tensor<T>& input,
                                   bool need_input_grad);

  int in_dim() const { return in_; }
  int out_dim() const { return out_; }
  Activation activation() const { return act_; }
  Parameter<T>& kernel() { return kernel_; }
  Parameter<T>& bias() { return bias_; }

 private:
  int in_, out_;
  Activation act_;
  Parameter<T> kernel_, bias_;
};

/// Per-channel normalization over every non-channel axis. The running
/// mean/variance are stored as non-trainable parameters, so the layer
/// owns 4*C values.
template <typename T>
class BatchNorm final : public Layer<T> {
 public:
  BatchNorm(std::string name, int channels, double momentum = 0.9, double epsilon = 1e-5);

  std::string kind() const override { return "BatchNormalization"; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext<T>& ctx,
                    LayerCache<T>* cache) const override;
  Tensor<T> backward(const Tensor<T>& grad_out, const Tensor<T>& input,
                     const Tensor<T>& output, const LayerCache<T>& cache,
                     bool need_input_grad) override;
  void commit(const LayerCache<T>& cache) override;
  void initialize(Rng& rng) override;
  std::vector<Parameter<T>*> parameters() override {
    return {&gamma_, &beta_, &moving_mean_, &moving_var_};
  }

  double epsilon() const { return eps_; }
  Parameter<T>& gamma() { return gamma_; }
  Parameter<T>& beta() { return beta_; }
  Parameter<T>& moving_mean() { return moving_mean_; }
  Parameter<T>& moving_variance() { return moving_var_; }

 private:
  int c_;
  double momentum_, eps_;
  Parameter<T> gamma_, beta_, moving_mean_, moving_var_;
};

/// Non-overlapping max pooling along time; trailing frames that do not
/// fill a window are dropped.
template <typename T>
class MaxPool1D final : public Layer<T> {
 public:
  MaxPool1D(std::string name, int pool);
  std::string kind() const override { return "MaxPooling1D"; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext<T>& ctx,
                    LayerCache<T>* cache) const override;
  Tensor<T> backward(const Tensor<T>& grad_out, const Tensor<T>& input,
                     const Tensor<T>& output, const LayerCache<T>& cache,
                     bool need_input_grad) override;

 private:
  int pool_;
};

template <typename T>
class GlobalAvgPool1D final : public Layer<T> {
 public:
  explicit GlobalAvgPool1D(std::string name) : Layer<T>(std::move(name)) {}
  std::string kind() const override { return "GlobalAveragePooling"; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext<T>& ctx,
                    LayerCache<T>* cache) const override;
  Tensor<T> backward(const Tensor<T>& grad_out, const Tensor<T>& input,
                     const Tensor<T>& output, const LayerCache<T>& cache,
                     bool need_input_grad) override;
};

/// Repeats each frame `factor` times.
template <typename T>
class Upsample1D final : public Layer<T> {
 public:
  Upsample1D(std::string name, int factor);
  std::string kind() const override { return "Upsampling1D"; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext<T>& ctx,
                    LayerCache<T>* cache) const override;
  Tensor<T> backward(const Tensor<T>& grad_out, const Tensor<T>& input,
                     const Tensor<T>& output, const LayerCache<T>& cache,
                     bool need_input_grad) override;

 private:
  int factor_;
};

/// (T, C) -> (2C): per-channel mean followed by per-channel standard
/// deviation sqrt(var + 1e-9).
template <typename T>
class StatsPooling final : public Layer<T> {
 public:
  explicit StatsPooling(std::string name) : Layer<T>(std::move(name)) {}
  std::string kind() const override { return "StatsPooling"; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext<T>& ctx,
                    LayerCache<T>* cache) const override;
  Tensor<T> backward(const Tensor<T>& grad_out, const Tensor<T>& input,
                     const Tensor<T>& output, const LayerCache<T>& cache,
                     bool need_input_grad) override;
};

/// Inverted dropout: identity at inference or when rate == 0.
template <typename T>
class Dropout final : public Layer<T> {
 public:
  Dropout(std::string name, double rate);
  std::string kind() const override { return "Dropout"; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext<T>& ctx,
                    LayerCache<T>* cache) const override;
  Tensor<T> backward(const Tensor<T>& grad_out, const Tensor<T>& input,
                     const Tensor<T>& output, const LayerCache<T>& cache,
                     bool need_input_grad) override;
  double rate() const { return rate_; }

 private:
  double rate_;
};

/// Label conditioning for the decoder. Each of the N entries of the one-hot
/// label (taken from ForwardContext::label) selects row 0 or row 1 of a
/// (2 x D) table; the resulting (N x D) block is appended after the
/// feature frames, giving (T + N, D).
template <typename T>
class EmbeddingConcat final : public Layer<T> {
 public:
  EmbeddingConcat(std::string name, int n_labels, int dim);
  std::string kind() const override { return "Embedding+Concatenate"; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext<T>& ctx,
                    LayerCache<T>* cache) const override;
  Tensor<T> backward(const Tensor<T>& grad_out, const Tensor<T>& input,
                     const Tensor<T>& output, const LayerCache<T>& cache,
                     bool need_input_grad) override;
  void initialize(Rng& rng) override;
  std::vector<Parameter<T>*> parameters() override { return {&table_}; }
  int n_labels() const { return n_; }
  Parameter<T>& table() { return table_; }

 private:
  int n_, dim_;
  Parameter<T> table_;
};

// Row-wise activation helpers over the last dimension.
template <typename T>
void apply_activation(Activation a, Tensor<T>& x, std::vector<std::int32_t>* decisions = nullptr);

/// Given the activation output y and dL/dy, returns dL/dz in place of g.
template <typename T>
void activation_backward(Activation a, const Tensor<T>& y, Tensor<T>& g);

template <typename T>
Tensor<T> softmax(const Tensor<T>& x);
template <typename T>
Tensor<T> log_softmax(const Tensor<T>& x);

/// Throws LabelError unless every row is a one-hot vector.
template <typename T>
void check_one_hot(const Tensor<T>& label);

}  // namespace accentlab::nn
