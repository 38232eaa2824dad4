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

#include "accentlab/nn/optimizer.hpp"

#include <cmath>

namespace accentlab::nn {

template <typename T>
void SgdMomentum<T>::step(const std::vector<Parameter<T>*>& params) {
  const T lr = static_cast<T>(this->lr_);
  const T mu = static_cast<T>(momentum_);
  for (auto* p : params) {
    if (!p->trainable) continue;
    auto& v = velocity_[p];
    if (v.size() != p->size()) v.assign(p->size(), T(0));
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = mu * v[i] - lr * p->grad[i];
      p->value[i] += v[i];
    }
  }
}

template <typename T>
void Adam<T>::step(const std::vector<Parameter<T>*>& params) {
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  const T step = static_cast<T>(this->lr_ * std::sqrt(c2) / c1);
  const T eps_hat = static_cast<T>(eps_ * std::sqrt(c2));
  const T b1 = static_cast<T>(b1_), b2 = static_cast<T>(b2_);
  for (auto* p : params) {
    if (!p->trainable) continue;
    auto& s = state_[p];
    if (s.m.size() != p->size()) {
      s.m.assign(p->size(), T(0));
      s.v.assign(p->size(), T(0));
    }
    for (std::size_t i = 0; i < s.m.size(); ++i) {
      const T g = p->grad[i];
      s.m[i] = b1 * s.m[i] + (T(1) - b1) * g;
      s.v[i] = b2 * s.v[i] + (T(1) - b2) * g * g;
      // Equivalent to lr * m_hat / (sqrt(v_hat) + eps).
      p->value[i] -= step * s.m[i] / (std::sqrt(s.v[i]) + eps_hat);
    }
  }
}

template class SgdMomentum<float>;
template class SgdMomentum<double>;
template class Adam<float>;
template class Adam<double>;

}  // namespace accentlab::nn
