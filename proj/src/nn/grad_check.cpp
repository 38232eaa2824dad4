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

#include "accentlab/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace accentlab::nn {

namespace {

struct Probe {
  double loss;
  std::vector<std::int32_t> decisions;
};

Probe evaluate(const ModelGraph<double>& graph, const Tensor<double>& x, const LossFn& loss,
               const GradCheckOptions& opt) {
  Rng rng(opt.seed);
  Probe p;
  ForwardContext<double> ctx;
  ctx.mode = opt.mode;
  ctx.rng = &rng;
  ctx.label = opt.label;
  ctx.decisions = &p.decisions;
  p.loss = loss(graph.forward(x, ctx)).value;
  return p;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (n <= k) return idx;
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i),
                                                             static_cast<std::int64_t>(n - 1)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

// Central difference of the loss with respect to *slot; returns false when
// either probe crossed a kink of the piecewise-linear layers.
bool numeric_derivative(const ModelGraph<double>& graph, const Tensor<double>& x,
                        double* slot, const LossFn& loss, const GradCheckOptions& opt,
                        const std::vector<std::int32_t>& base, double* out) {
  const double saved = *slot;
  *slot = saved + opt.step;
  const Probe plus = evaluate(graph, x, loss, opt);
  *slot = saved - opt.step;
  const Probe minus = evaluate(graph, x, loss, opt);
  *slot = saved;
  if (plus.decisions != base || minus.decisions != base) return false;
  *out = (plus.loss - minus.loss) / (2.0 * opt.step);
  return true;
}

double rel_error(double a, double n, double floor) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

}  // namespace

GradCheckReport grad_check(ModelGraph<double>& graph, const Tensor<double>& x,
                           const LossFn& loss, const GradCheckOptions& opt) {
  // Analytic pass.
  Rng rng(opt.seed);
  std::vector<std::int32_t> base;
  ForwardContext<double> ctx;
  ctx.mode = opt.mode;
  ctx.rng = &rng;
  ctx.label = opt.label;
  ctx.decisions = &base;
  Tape<double> tape;
  graph.forward(x, ctx, &tape);
  graph.zero_grad();
  const Tensor<double> dx = graph.backward(tape, loss(tape.output()).grad, opt.check_input);

  GradCheckReport report;
  Rng pick(opt.seed ^ 0x9e3779b97f4a7c15ULL);
  auto record = [&report](GradCheckEntry e) {
    report.max_rel_error = std::max(report.max_rel_error, e.max_rel_error);
    report.checked += e.checked;
    report.entries.push_back(std::move(e));
  };

  for (std::size_t li = 0; li < graph.size(); ++li) {
    Layer<double>& layer = graph.layer(li);
    if (layer.frozen()) continue;
    GradCheckEntry entry{layer.name()};
    for (Parameter<double>* p : layer.parameters()) {
      if (!p->trainable) continue;
      for (std::size_t i : sample_indices(p->size(), opt.samples_per_tensor, pick)) {
        double numeric = 0.0;
        if (!numeric_derivative(graph, x, &p->value[i], loss, opt, base, &numeric)) {
          ++entry.skipped;
          continue;
        }
        entry.max_rel_error =
            std::max(entry.max_rel_error, rel_error(p->grad[i], numeric, opt.floor));
        ++entry.checked;
      }
    }
    if (entry.checked || entry.skipped) record(std::move(entry));
  }

  if (opt.check_input) {
    Tensor<double> probe_x = x;
    GradCheckEntry entry{"<input>"};
    for (std::size_t i : sample_indices(x.size(), opt.samples_per_tensor, pick)) {
      double numeric = 0.0;
      if (!numeric_derivative(graph, probe_x, &probe_x[i], loss, opt, base, &numeric)) {
        ++entry.skipped;
        continue;
      }
      entry.max_rel_error = std::max(entry.max_rel_error, rel_error(dx[i], numeric, opt.floor));
      ++entry.checked;
    }
    record(std::move(entry));
  }
  return report;
}

}  // namespace accentlab::nn
