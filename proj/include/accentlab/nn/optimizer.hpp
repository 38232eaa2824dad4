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

#include <unordered_map>
#include <vector>

#include "accentlab/nn/tensor.hpp"

namespace accentlab::nn {

/// Parameters with trainable == false are skipped entirely.
template <typename T>
class Optimizer {
 public:
  explicit Optimizer(double lr) : lr_(lr) {}
  virtual ~Optimizer() = default;

  virtual void step(const std::vector<Parameter<T>*>& params) = 0;

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 protected:
  double lr_;
};

/// v <- momentum * v - lr * g;  p <- p + v
template <typename T>
class SgdMomentum final : public Optimizer<T> {
 public:
  SgdMomentum(double lr, double momentum) : Optimizer<T>(lr), momentum_(momentum) {}
  void step(const std::vector<Parameter<T>*>& params) override;

 private:
  double momentum_;
  std::unordered_map<const Parameter<T>*, std::vector<T>> velocity_;
};

template <typename T>
class Adam final : public Optimizer<T> {
 public:
  explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : Optimizer<T>(lr), b1_(beta1), b2_(beta2), eps_(eps) {}
  void step(const std::vector<Parameter<T>*>& params) override;

 private:
  struct Moments {
    std::vector<T> m, v;
  };
  double b1_, b2_, eps_;
  long t_ = 0;
  std::unordered_map<const Parameter<T>*, Moments> state_;
};

}  // namespace accentlab::nn
