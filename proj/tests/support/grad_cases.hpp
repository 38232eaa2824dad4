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

// One small graph per layer kind and loss, checked against central
// differences. Shared by unit and acceptance tests.

#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "accentlab/nn/grad_check.hpp"
#include "accentlab/nn/graph.hpp"
#include "accentlab/nn/layers.hpp"
#include "accentlab/nn/losses.hpp"
#include "accentlab/rng.hpp"

namespace grad_cases {

using namespace accentlab;
using namespace accentlab::nn;

namespace detail {

inline Tensor<double> random_tensor(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor<double> t(std::move(s));
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

inline Tensor<double> one_hot(int batch, int n, Rng& rng) {
  Tensor<double> t({batch, n});
  for (int b = 0; b < batch; ++b) t[b * n + rng.uniform_int(0, n - 1)] = 1.0;
  return t;
}

}  // namespace detail

using GraphFactory = std::function<ModelGraph<double>()>;

struct Case {
  const char* name;
  GraphFactory make;
  Shape input;  // with batch
  enum { kCce, kBce, kNll } loss;
  int classes;
  bool label = false;
  Mode mode = Mode::kTrain;
};

inline double run_case(const Case& c, std::uint64_t seed) {
  Rng rng(seed);
  auto g = c.make();
  g.initialize(rng);
  // Non-default affine and running statistics so every path is exercised.
  for (auto* p : g.parameters()) {
    if (p->name.ends_with("/bias") || p->name.ends_with("/beta") ||
        p->name.ends_with("/moving_mean")) {
      for (auto& v : p->value.data) v = rng.uniform(-0.5, 0.5);
    }
    if (p->name.ends_with("/gamma") || p->name.ends_with("/moving_variance")) {
      for (auto& v : p->value.data) v = rng.uniform(0.5, 1.5);
    }
  }
  const auto x = detail::random_tensor(c.input, rng);
  const int batch = c.input[0];
  Tensor<double> label;
  if (c.label) label = detail::one_hot(batch, 5, rng);
  Tensor<double> target;
  const Shape out = [&] {
    Shape s = g.output_shape();
    s.insert(s.begin(), batch);
    return s;
  }();
  if (c.loss == Case::kBce) {
    target = detail::random_tensor(out, rng, 0.0, 1.0);
  } else {
    target = softmax(detail::random_tensor(out, rng, -1, 1));
  }
  LossFn loss = [&](const Tensor<double>& y) {
    switch (c.loss) {
      case Case::kCce: return categorical_crossentropy(target, y);
      case Case::kBce: return binary_crossentropy(target, y);
      default: return nll_log_probs(target, y);
    }
  };
  GradCheckOptions opt;
  opt.mode = c.mode;
  opt.seed = seed;
  opt.label = c.label ? &label : nullptr;
  const auto report = grad_check(g, x, loss, opt);
  if (report.checked == 0) throw std::runtime_error(std::string(c.name) + ": nothing checked");
  return report.max_rel_error;
}

inline std::vector<Case> all_cases() {
  using G = ModelGraph<double>;
  return {
      {"dense+softmax+cce",
       [] {
         G g("g", {6});
         g.emplace<Dense<double>>("d", 6, 5, Activation::kSoftmax);
         return g;
       },
       {4, 6}, Case::kCce, 5},
      {"conv dilation 3 + relu + gap",
       [] {
         G g("g", {12, 3});
         g.emplace<Conv1D<double>>("c", 3, 4, 3, 3, Padding::kValid, Activation::kRelu);
         g.emplace<GlobalAvgPool1D<double>>("gap");
         g.emplace<Dense<double>>("out", 4, 5, Activation::kSoftmax);
         return g;
       },
       {3, 12, 3}, Case::kCce, 5},
      {"batchnorm(train) + same conv + sigmoid",
       [] {
         G g("g", {8, 3});
         g.emplace<BatchNorm<double>>("bn", 3);
         g.emplace<Conv1D<double>>("c", 3, 2, 4, 1, Padding::kSame, Activation::kSigmoid);
         return g;
       },
       {3, 8, 3}, Case::kBce, 0},
      {"batchnorm(infer)",
       [] {
         G g("g", {5, 3});
         g.emplace<BatchNorm<double>>("bn", 3);
         g.emplace<Conv1D<double>>("c", 3, 2, 1, 1, Padding::kValid, Activation::kSigmoid);
         return g;
       },
       {2, 5, 3}, Case::kBce, 0, false, Mode::kInfer},
      {"maxpool + upsample",
       [] {
         G g("g", {10, 2});
         g.emplace<Conv1D<double>>("c", 2, 3, 2, 1, Padding::kSame);
         g.emplace<MaxPool1D<double>>("mp", 3);
         g.emplace<Upsample1D<double>>("up", 2);
         g.emplace<Conv1D<double>>("c2", 3, 2, 1, 1, Padding::kValid, Activation::kSigmoid);
         return g;
       },
       {2, 10, 2}, Case::kBce, 0},
      {"stats pooling + dense + log_softmax",
       [] {
         G g("g", {kAnyLength, 3});
         g.emplace<Conv1D<double>>("t1", 3, 4, 3, 2, Padding::kValid);
         g.emplace<StatsPooling<double>>("stats");
         g.emplace<Dense<double>>("out", 8, 5, Activation::kLogSoftmax);
         return g;
       },
       {3, 9, 3}, Case::kNll, 5},
      {"dropout(train)",
       [] {
         G g("g", {6});
         g.emplace<Dropout<double>>("drop", 0.3);
         g.emplace<Dense<double>>("d", 6, 5, Activation::kSoftmax);
         return g;
       },
       {4, 6}, Case::kCce, 5},
      {"embedding concat",
       [] {
         G g("g", {4, 3});
         g.emplace<EmbeddingConcat<double>>("emb", 5, 3);
         g.emplace<Conv1D<double>>("c", 3, 3, 3, 1, Padding::kSame, Activation::kSigmoid);
         return g;
       },
       {2, 4, 3}, Case::kBce, 0, true},
  };
}

}  // namespace grad_cases
