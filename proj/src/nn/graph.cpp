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

#include "accentlab/nn/graph.hpp"

#include <cstdio>

namespace accentlab::nn {

template <typename T>
ModelGraph<T>::ModelGraph(std::string name, Shape input_shape)
    : name_(std::move(name)), input_shape_(std::move(input_shape)) {}

template <typename T>
Layer<T>& ModelGraph<T>::add(std::unique_ptr<Layer<T>> layer) {
  if (find(layer->name())) throw ShapeError(name_ + ": duplicate layer name " + layer->name());
  layer->output_shape(output_shape());  // throws on incompatibility
  layers_.push_back(std::move(layer));
  return *layers_.back();
}

template <typename T>
std::unique_ptr<Layer<T>> ModelGraph<T>::pop() {
  if (layers_.empty()) throw StateError(name_ + ": pop from an empty graph");
  auto last = std::move(layers_.back());
  layers_.pop_back();
  return last;
}

template <typename T>
Layer<T>* ModelGraph<T>::find(const std::string& layer_name) {
  for (auto& l : layers_) {
    if (l->name() == layer_name) return l.get();
  }
  return nullptr;
}

template <typename T>
Shape ModelGraph<T>::output_shape() const {
  Shape s = input_shape_;
  for (const auto& l : layers_) s = l->output_shape(s);
  return s;
}

template <typename T>
Shape ModelGraph<T>::shape_after(std::size_t i) const {
  Shape s = input_shape_;
  for (std::size_t j = 0; j <= i && j < layers_.size(); ++j) s = layers_[j]->output_shape(s);
  return s;
}

template <typename T>
void ModelGraph<T>::check_input(const Tensor<T>& x) const {
  bool ok = x.rank() == static_cast<int>(input_shape_.size()) + 1;
  for (std::size_t i = 0; ok && i < input_shape_.size(); ++i) {
    ok = input_shape_[i] == kAnyLength || input_shape_[i] == x.shape[i + 1];
  }
  if (!ok) {
    Shape got(x.shape.begin() + (x.rank() ? 1 : 0), x.shape.end());
    throw ShapeError(name_ + ": expected per-sample input " + shape_str(input_shape_) +
                     ", got " + shape_str(got));
  }
}

template <typename T>
Tensor<T> ModelGraph<T>::forward(const Tensor<T>& x, const ForwardContext<T>& ctx,
                                 Tape<T>* tape) const {
  check_input(x);
  if (!tape) {
    Tensor<T> cur = x;
    for (const auto& l : layers_) cur = l->forward(cur, ctx, nullptr);
    return cur;
  }
  tape->acts.clear();
  tape->caches.assign(layers_.size(), {});
  tape->acts.reserve(layers_.size() + 1);
  tape->acts.push_back(x);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    tape->acts.push_back(layers_[i]->forward(tape->acts[i], ctx, &tape->caches[i]));
  }
  return tape->acts.back();
}

template <typename T>
Tensor<T> ModelGraph<T>::predict(const Tensor<T>& x, const Tensor<T>* label) const {
  ForwardContext<T> ctx;
  ctx.mode = Mode::kInfer;
  ctx.label = label;
  return forward(x, ctx, nullptr);
}

template <typename T>
void ModelGraph<T>::check_tape(const Tape<T>& tape) const {
  if (tape.acts.size() != layers_.size() + 1 || layers_.empty()) {
    throw StateError(name_ + ": tape does not belong to this graph");
  }
}

template <typename T>
Tensor<T> ModelGraph<T>::backward(const Tape<T>& tape, const Tensor<T>& grad_out,
                                  bool need_input_grad) {
  check_tape(tape);
  if (grad_out.shape != tape.acts.back().shape) {
    throw ShapeError(name_ + ": output gradient shape " + shape_str(grad_out.shape) +
                     " does not match output " + shape_str(tape.acts.back().shape));
  }
  return backward_impl(tape, grad_out, need_input_grad, false);
}

template <typename T>
const Tensor<T>& ModelGraph<T>::logits(const Tape<T>& tape) const {
  check_tape(tape);
  const auto* dense = dynamic_cast<const Dense<T>*>(layers_.back().get());
  const auto& cache = tape.caches.back();
  if (!dense || cache.tensors.empty()) {
    throw StateError(name_ + ": graph does not end in a normalized dense layer");
  }
  return cache.tensors.front();
}

template <typename T>
Tensor<T> ModelGraph<T>::backward_from_logits(const Tape<T>& tape, const Tensor<T>& grad_logits,
                                              bool need_input_grad) {
  if (grad_logits.shape != logits(tape).shape) {
    throw ShapeError(name_ + ": logit gradient shape " + shape_str(grad_logits.shape) +
                     " does not match " + shape_str(logits(tape).shape));
  }
  return backward_impl(tape, grad_logits, need_input_grad, true);
}

template <typename T>
Tensor<T> ModelGraph<T>::backward_impl(const Tape<T>& tape, Tensor<T> g, bool need_input_grad,
                                       bool logits) {
  // Lowest layer index whose input gradient is still useful.
  std::size_t stop = layers_.size();
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (!layers_[i]->frozen() && layers_[i]->has_trainable_parameters()) {
      stop = i;
      break;
    }
  }
  if (need_input_grad) stop = 0;

  for (std::size_t i = layers_.size(); i-- > stop;) {
    const bool want_dx = i > stop || need_input_grad;
    if (logits && i + 1 == layers_.size()) {
      g = static_cast<Dense<T>&>(*layers_[i]).backward_preactivation(g, tape.acts[i], want_dx);
    } else {
      g = layers_[i]->backward(g, tape.acts[i], tape.acts[i + 1], tape.caches[i], want_dx);
    }
    if (!want_dx) break;
  }
  return need_input_grad ? g : Tensor<T>{};
}

template <typename T>
void ModelGraph<T>::commit(const Tape<T>& tape) {
  for (std::size_t i = 0; i < layers_.size() && i < tape.caches.size(); ++i) {
    layers_[i]->commit(tape.caches[i]);
  }
}

template <typename T>
std::vector<Parameter<T>*> ModelGraph<T>::parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& l : layers_) {
    for (auto* p : l->parameters()) out.push_back(p);
  }
  return out;
}

template <typename T>
std::vector<const Parameter<T>*> ModelGraph<T>::parameters() const {
  std::vector<const Parameter<T>*> out;
  for (const auto& l : layers_) {
    const Layer<T>& cl = *l;
    for (const auto* p : cl.parameters()) out.push_back(p);
  }
  return out;
}

template <typename T>
void ModelGraph<T>::zero_grad() {
  for (auto* p : parameters()) p->grad.fill(T(0));
}

template <typename T>
std::size_t ModelGraph<T>::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l->param_count();
  return n;
}

template <typename T>
std::size_t ModelGraph<T>::trainable_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) {
    if (p->trainable) n += p->size();
  }
  return n;
}

template <typename T>
void ModelGraph<T>::initialize(Rng& rng) {
  for (auto& l : layers_) l->initialize(rng);
}

template <typename T>
void ModelGraph<T>::freeze_first(std::size_t n, bool frozen) {
  if (n > layers_.size()) throw StateError(name_ + ": cannot freeze past the last layer");
  for (std::size_t i = 0; i < n; ++i) layers_[i]->set_frozen(frozen);
}

template <typename T>
std::vector<SummaryRow> ModelGraph<T>::summary() const {
  std::vector<SummaryRow> rows;
  Shape s = input_shape_;
  for (const auto& l : layers_) {
    s = l->output_shape(s);
    rows.push_back({l->name(), l->kind(), s, l->param_count()});
  }
  return rows;
}

template <typename T>
std::string ModelGraph<T>::summary_text() const {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-28s %-24s %-18s %10s\n", "Layer", "Kind", "Output", "Params");
  out += line;
  for (const auto& r : summary()) {
    Shape with_batch = r.output_shape;
    with_batch.insert(with_batch.begin(), kAnyLength);
    std::snprintf(line, sizeof line, "%-28s %-24s %-18s %10zu\n", r.name.c_str(), r.kind.c_str(),
                  shape_str(with_batch).c_str(), r.params);
    out += line;
  }
  std::snprintf(line, sizeof line, "Total params: %zu\nTrainable params: %zu\n", param_count(),
                trainable_count());
  out += line;
  return out;
}

template <typename T>
void recompute_batchnorm_stats(ModelGraph<T>& graph, std::size_t n_batches,
                               const BatchSource<T>& source, Rng& rng) {
  if (n_batches == 0) return;
  std::vector<BatchNorm<T>*> bns(graph.size(), nullptr);
  std::vector<std::vector<double>> mean(graph.size()), var(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    auto* bn = dynamic_cast<BatchNorm<T>*>(&graph.layer(i));
    if (bn && !bn->frozen()) {
      bns[i] = bn;
      mean[i].assign(bn->moving_mean().value.size(), 0.0);
      var[i].assign(bn->moving_mean().value.size(), 0.0);
    }
  }
  for (std::size_t b = 0; b < n_batches; ++b) {
    Tensor<T> label;
    const Tensor<T> x = source(b, label);
    ForwardContext<T> ctx{Mode::kTrain, &rng, label.data.empty() ? nullptr : &label, nullptr};
    Tape<T> tape;
    graph.forward(x, ctx, &tape);
    for (std::size_t i = 0; i < bns.size(); ++i) {
      if (!bns[i]) continue;
      const auto& stats = tape.caches[i].tensors.at(0);
      const std::size_t c = mean[i].size();
      for (std::size_t j = 0; j < c; ++j) {
        mean[i][j] += stats[j];
        var[i][j] += stats[c + j];
      }
    }
  }
  for (std::size_t i = 0; i < bns.size(); ++i) {
    if (!bns[i]) continue;
    for (std::size_t j = 0; j < mean[i].size(); ++j) {
      bns[i]->moving_mean().value[j] = static_cast<T>(mean[i][j] / n_batches);
      bns[i]->moving_variance().value[j] = static_cast<T>(var[i][j] / n_batches);
    }
  }
}

template <typename T>
void copy_parameters(const ModelGraph<T>& src, ModelGraph<T>& dst) {
  const auto from = src.parameters();
  const auto to = dst.parameters();
  if (from.size() != to.size()) {
    throw ShapeError("parameter count differs: " + std::to_string(from.size()) + " vs " +
                     std::to_string(to.size()));
  }
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (from[i]->name != to[i]->name || from[i]->value.shape != to[i]->value.shape) {
      throw ShapeError("parameter mismatch: " + from[i]->name + " vs " + to[i]->name);
    }
  }
  for (std::size_t i = 0; i < from.size(); ++i) to[i]->value = from[i]->value;
}

template class ModelGraph<float>;
template class ModelGraph<double>;
template void copy_parameters<float>(const ModelGraph<float>&, ModelGraph<float>&);
template void copy_parameters<double>(const ModelGraph<double>&, ModelGraph<double>&);
template void recompute_batchnorm_stats<float>(ModelGraph<float>&, std::size_t,
                                               const BatchSource<float>&, Rng&);
template void recompute_batchnorm_stats<double>(ModelGraph<double>&, std::size_t,
                                                const BatchSource<double>&, Rng&);

}  // namespace accentlab::nn
