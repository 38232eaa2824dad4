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

#include "accentlab/nn/tensor.hpp"

namespace accentlab::nn {

/// Predictions are clamped to [kProbClamp, 1 - kProbClamp] before logs.
inline constexpr double kProbClamp = 1e-7;

/// Batch-mean loss and its gradient with respect to the prediction.
template <typename T>
struct LossValue {
  double value = 0.0;
  Tensor<T> grad;
};

/// -sum(target * log(pred)) per row, averaged over rows.
template <typename T>
LossValue<T> categorical_crossentropy(const Tensor<T>& target, const Tensor<T>& pred);

/// Elementwise binary cross-entropy averaged over every element.
template <typename T>
LossValue<T> binary_crossentropy(const Tensor<T>& target, const Tensor<T>& pred);

/// Cross-entropy for a log-probability output: -sum(target * logp) per row,
/// averaged over rows.
template <typename T>
LossValue<T> nll_log_probs(const Tensor<T>& target, const Tensor<T>& log_probs);

/// Categorical cross-entropy of softmax(logits), evaluated in log space
/// without clamping. The gradient is with respect to the logits,
/// (softmax(logits) - target) / rows, and never vanishes.
template <typename T>
LossValue<T> categorical_crossentropy_from_logits(const Tensor<T>& target, const Tensor<T>& logits);

template <typename T>
double mean_squared_error(const Tensor<T>& a, const Tensor<T>& b);

}  // namespace accentlab::nn
