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
#include <functional>
#include <string>
#include <vector>

#include "accentlab/nn/graph.hpp"
#include "accentlab/nn/losses.hpp"

namespace accentlab::nn {

struct GradCheckOptions {
  Mode mode = Mode::kTrain;
  const Tensor<double>* label = nullptr;
  double step = 1e-5;
  /// |a - n| / max(|a|, |n|, floor)
  double floor = 1e-6;
  /// Elements sampled per parameter (all of them when the tensor is smaller).
  std::size_t samples_per_tensor = 24;
  bool check_input = true;
  std::uint64_t seed = 1;
};

struct GradCheckEntry {
  std::string name;  // layer name, or "<input>"
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  /// Elements whose +-h probe flipped a ReLU sign or max-pool winner.
  std::size_t skipped = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

using LossFn = std::function<LossValue<double>(const Tensor<double>& output)>;

/// Compares reverse-mode gradients of loss(graph(x)) against central
/// differences. Dropout masks are redrawn from the same seed for every
/// evaluation, so the checked function is deterministic.
GradCheckReport grad_check(ModelGraph<double>& graph, const Tensor<double>& x,
                           const LossFn& loss, const GradCheckOptions& options = {});

}  // namespace accentlab::nn
