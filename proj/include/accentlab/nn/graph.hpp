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

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "accentlab/nn/layers.hpp"

namespace accentlab::nn {

/// Everything a backward pass needs from the matching forward pass.
/// acts[0] is the graph input and acts[i + 1] the output of layer i.
template <typename T>
struct Tape {
  std::vector<Tensor<T>> acts;
  std::vector<LayerCache<T>> caches;

  const Tensor<T>& output() const { return acts.back(); }
};

struct SummaryRow {
  std::string name;
  std::string kind;
  Shape output_shape;
  std::size_t params = 0;
};

/// A sequential stack of layers with a declared per-sample input shape.
template <typename T>
class ModelGraph {
 public:
  ModelGraph(std::string name, Shape input_shape);

  ModelGraph(ModelGraph&&) noexcept = default;
  ModelGraph& operator=(ModelGraph&&) noexcept = default;

  /// Appends a layer after checking that it accepts the current output
  /// shape (throws ShapeError otherwise) and that its name is unused.
  Layer<T>& add(std::unique_ptr<Layer<T>> layer);

  template <typename L, typename... Args>
  L& emplace(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    add(std::move(layer));
    return ref;
  }

  /// Removes and returns the last layer.
  std::unique_ptr<Layer<T>> pop();

  const std::string& name() const { return name_; }
  std::size_t size() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_.at(i); }
  const Layer<T>& layer(std::size_t i) const { return *layers_.at(i); }
  Layer<T>* find(const std::string& layer_name);

  const Shape& input_shape() const { return input_shape_; }
  Shape output_shape() const;
  /// Per-sample shape produced by layer i.
  Shape shape_after(std::size_t i) const;

  Tensor<T> forward(const Tensor<T>& x, const ForwardContext<T>& ctx,
                    Tape<T>* tape = nullptr) const;
  /// Inference-mode forward pass.
  Tensor<T> predict(const Tensor<T>& x, const Tensor<T>* label = nullptr) const;

  /// Reverse pass over `tape`, accumulating into Parameter::grad. Stops as
  /// soon as no earlier layer has anything to train, unless the gradient
  /// with respect to the graph input is requested.
  Tensor<T> backward(const Tape<T>& tape, const Tensor<T>& grad_out,
                     bool need_input_grad = false);

  /// Pre-activation output of a graph ending in a softmax or log-softmax
  /// Dense layer, as recorded on `tape`. Throws StateError otherwise.
  const Tensor<T>& logits(const Tape<T>& tape) const;

  /// As backward(), but `grad_logits` is the gradient with respect to
  /// logits(tape) rather than the graph output.
  Tensor<T> backward_from_logits(const Tape<T>& tape, const Tensor<T>& grad_logits,
                                 bool need_input_grad = false);

  /// Applies train-time state updates (batch-norm running statistics).
  void commit(const Tape<T>& tape);

  std::vector<Parameter<T>*> parameters();
  std::vector<const Parameter<T>*> parameters() const;
  void zero_grad();

  std::size_t param_count() const;
  std::size_t trainable_count() const;

  void initialize(Rng& rng);
  /// Freezes (or unfreezes) layers [0, n).
  void freeze_first(std::size_t n, bool frozen = true);

  std::vector<SummaryRow> summary() const;
  std::string summary_text() const;

 private:
  void check_input(const Tensor<T>& x) const;
  void check_tape(const Tape<T>& tape) const;
  Tensor<T> backward_impl(const Tape<T>& tape, Tensor<T> g, bool need_input_grad, bool logits);

  std::string name_;
  Shape input_shape_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

/// Copies every parameter value (trainable or not) from `src` into `dst`.
/// Throws ShapeError unless both list the same names and shapes in order.
template <typename T>
void copy_parameters(const ModelGraph<T>& src, ModelGraph<T>& dst);

/// Produces batch i of a calibration pass; fills `label` when the graph
/// takes a second input.
template <typename T>
using BatchSource = std::function<Tensor<T>(std::size_t i, Tensor<T>& label)>;

/// Replaces the running statistics of every non-frozen batch-norm layer by
/// the average of its batch statistics over `n_batches` train-mode forward
/// passes. Weights are untouched; dropout masks come from `rng`.
template <typename T>
void recompute_batchnorm_stats(ModelGraph<T>& graph, std::size_t n_batches,
                               const BatchSource<T>& source, Rng& rng);

}  // namespace accentlab::nn
