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

#include "accentlab/nn/losses.hpp"

#include <algorithm>
#include <cmath>

namespace accentlab::nn {

namespace {

template <typename T>
void same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (a.shape != b.shape) {
    throw ShapeError(std::string(what) + ": target " + shape_str(a.shape) +
                     " vs prediction " + shape_str(b.shape));
  }
  if (a.size() == 0) throw ShapeError(std::string(what) + ": empty input");
}

std::size_t rows_of(const Shape& s) {
  return s.size() < 2 ? 1 : shape_size(s) / static_cast<std::size_t>(s.back());
}

}  // namespace

template <typename T>
LossValue<T> categorical_crossentropy(const Tensor<T>& target, const Tensor<T>& pred) {
  same_shape(target, pred, "categorical_crossentropy");
  const double inv_rows = 1.0 / static_cast<double>(rows_of(pred.shape));
  LossValue<T> out{0.0, Tensor<T>(pred.shape)};
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = pred[i];
    const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    sum -= static_cast<double>(target[i]) * std::log(pc);
    // Clamping is part of the function, so its gradient is zero when active.
    if (p == pc) out.grad[i] = static_cast<T>(-static_cast<double>(target[i]) / pc * inv_rows);
  }
  out.value = sum * inv_rows;
  return out;
}

template <typename T>
LossValue<T> categorical_crossentropy_from_logits(const Tensor<T>& target, const Tensor<T>& logits) {
  same_shape(target, logits, "categorical_crossentropy_from_logits");
  if (logits.rank() != 2) throw ShapeError("logits must be (batch, classes)");
  const int rows = logits.dim(0), n = logits.dim(1);
  const double inv_rows = 1.0 / rows;
  LossValue<T> out{0.0, Tensor<T>(logits.shape)};
  double sum = 0.0;
  for (int r = 0; r < rows; ++r) {
    const T* z = logits.ptr() + static_cast<std::size_t>(r) * n;
    const T* t = target.ptr() + static_cast<std::size_t>(r) * n;
    const double zmax = *std::max_element(z, z + n);
    double norm = 0.0;
    for (int j = 0; j < n; ++j) norm += std::exp(z[j] - zmax);
    const double log_norm = zmax + std::log(norm);
    double t_sum = 0.0;
    for (int j = 0; j < n; ++j) t_sum += t[j];
    for (int j = 0; j < n; ++j) {
      sum -= t[j] * (z[j] - log_norm);
      const double p = std::exp(z[j] - log_norm);
      out.grad[static_cast<std::size_t>(r) * n + j] = static_cast<T>((p * t_sum - t[j]) * inv_rows);
    }
  }
  out.value = sum * inv_rows;
  return out;
}

template <typename T>
LossValue<T> binary_crossentropy(const Tensor<T>& target, const Tensor<T>& pred) {
  same_shape(target, pred, "binary_crossentropy");
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  LossValue<T> out{0.0, Tensor<T>(pred.shape)};
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = pred[i];
    const double t = target[i];
    const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    sum -= t * std::log(pc) + (1.0 - t) * std::log(1.0 - pc);
    if (p == pc) out.grad[i] = static_cast<T>((pc - t) / (pc * (1.0 - pc)) * inv_n);
  }
  out.value = sum * inv_n;
  return out;
}

template <typename T>
LossValue<T> nll_log_probs(const Tensor<T>& target, const Tensor<T>& log_probs) {
  same_shape(target, log_probs, "nll_log_probs");
  const double inv_rows = 1.0 / static_cast<double>(rows_of(log_probs.shape));
  LossValue<T> out{0.0, Tensor<T>(log_probs.shape)};
  double sum = 0.0;
  for (std::size_t i = 0; i < log_probs.size(); ++i) {
    sum -= static_cast<double>(target[i]) * log_probs[i];
    out.grad[i] = static_cast<T>(-static_cast<double>(target[i]) * inv_rows);
  }
  out.value = sum * inv_rows;
  return out;
}

template <typename T>
double mean_squared_error(const Tensor<T>& a, const Tensor<T>& b) {
  same_shape(a, b, "mean_squared_error");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

template LossValue<float> categorical_crossentropy(const Tensor<float>&, const Tensor<float>&);
template LossValue<double> categorical_crossentropy(const Tensor<double>&, const Tensor<double>&);
template LossValue<float> categorical_crossentropy_from_logits(const Tensor<float>&,
                                                               const Tensor<float>&);
template LossValue<double> categorical_crossentropy_from_logits(const Tensor<double>&,
                                                                const Tensor<double>&);
template LossValue<float> binary_crossentropy(const Tensor<float>&, const Tensor<float>&);
template LossValue<double> binary_crossentropy(const Tensor<double>&, const Tensor<double>&);
template LossValue<float> nll_log_probs(const Tensor<float>&, const Tensor<float>&);
template LossValue<double> nll_log_probs(const Tensor<double>&, const Tensor<double>&);
template double mean_squared_error(const Tensor<float>&, const Tensor<float>&);
template double mean_squared_error(const Tensor<double>&, const Tensor<double>&);

}  // namespace accentlab::nn
