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

#include "accentlab/audio/transform.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "accentlab/error.hpp"

namespace accentlab::audio {

TransformState fit_transform_state(std::span<const FeatureMatrix> fitting_set,
                                   double epsilon) {
  if (fitting_set.empty()) throw DataError("empty fitting set");
  if (!(epsilon > 0.0)) throw StateError("epsilon must be positive");
  const int cols = fitting_set.front().cols;
  std::vector<double> sum(cols, 0.0), sq(cols, 0.0);
  double count = 0.0;
  for (const auto& m : fitting_set) {
    if (m.cols != cols) throw ShapeError("fitting set has mixed column counts");
    for (int r = 0; r < m.rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const double v = std::log(m.at(r, c) + epsilon);
        sum[c] += v;
        sq[c] += v * v;
      }
    }
    count += m.rows;
  }
  if (count < 1) throw DataError("fitting set has no frames");

  TransformState s;
  s.epsilon = epsilon;
  s.mean.resize(cols);
  s.std.resize(cols);
  for (int c = 0; c < cols; ++c) {
    s.mean[c] = sum[c] / count;
    const double var = std::max(sq[c] / count - s.mean[c] * s.mean[c], 0.0);
    // A constant column would give std 0; unit std keeps the map invertible.
    s.std[c] = var > 1e-12 ? std::sqrt(var) : 1.0;
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& m : fitting_set) {
    for (int r = 0; r < m.rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const double z = (std::log(m.at(r, c) + epsilon) - s.mean[c]) / s.std[c];
        lo = std::min(lo, z);
        hi = std::max(hi, z);
      }
    }
  }
  if (!(hi > lo)) hi = lo + 1.0;
  s.min_val = lo;
  s.max_val = hi;
  return s;
}

namespace {

void check_state(const FeatureMatrix& m, const TransformState& state) {
  if (!state.fitted()) throw StateError("transform state has not been fitted");
  if (m.cols != static_cast<int>(state.mean.size())) {
    throw ShapeError("feature has " + std::to_string(m.cols) +
                     " columns, transform state expects " +
                     std::to_string(state.mean.size()));
  }
}

}  // namespace

FeatureMatrix log_standardize(const FeatureMatrix& spec,
                              const TransformState& state) {
  check_state(spec, state);
  FeatureMatrix out(spec.rows, spec.cols);
  const double range = state.max_val - state.min_val;
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      const double z =
          (std::log(spec.at(r, c) + state.epsilon) - state.mean[c]) / state.std[c];
      out.at(r, c) = (z - state.min_val) / range;
    }
  }
  return out;
}

FeatureMatrix destandardize_exp(const FeatureMatrix& features,
                                const TransformState& state) {
  check_state(features, state);
  FeatureMatrix out(features.rows, features.cols);
  const double range = state.max_val - state.min_val;
  for (int r = 0; r < features.rows; ++r) {
    for (int c = 0; c < features.cols; ++c) {
      const double z = features.at(r, c) * range + state.min_val;
      const double x = std::exp(z * state.std[c] + state.mean[c]) - state.epsilon;
      out.at(r, c) = std::max(x, 0.0);
    }
  }
  return out;
}

void save_transform_state(const std::filesystem::path& path,
                          const TransformState& state) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "epsilon " << state.epsilon << "\n";
  out << "min_val " << state.min_val << "\n";
  out << "max_val " << state.max_val << "\n";
  out << "mean";
  for (double v : state.mean) out << ' ' << v;
  out << "\nstd";
  for (double v : state.std) out << ' ' << v;
  out << "\n";
  if (!out) throw IoError("short write to " + path.string());
}

TransformState load_transform_state(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  TransformState s;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "epsilon") {
      ls >> s.epsilon;
    } else if (key == "min_val") {
      ls >> s.min_val;
    } else if (key == "max_val") {
      ls >> s.max_val;
    } else if (key == "mean" || key == "std") {
      auto& dst = key == "mean" ? s.mean : s.std;
      double v;
      while (ls >> v) dst.push_back(v);
    } else if (!key.empty()) {
      throw StateError("unknown transform state key '" + key + "'");
    }
  }
  if (!s.fitted()) throw StateError("incomplete transform state in " + path.string());
  return s;
}

FeatureMatrix trim_or_pad(const FeatureMatrix& features, Rng& rng,
                          int target_frames) {
  if (target_frames < 1) throw ShapeError("target frame count must be >= 1");
  if (features.rows == target_frames) return features;
  FeatureMatrix out(target_frames, features.cols, 0.0);
  if (features.rows > target_frames) {
    const auto start = static_cast<int>(rng.uniform_int(0, features.rows - target_frames));
    std::copy_n(features.values.begin() +
                    static_cast<std::ptrdiff_t>(start) * features.cols,
                static_cast<std::size_t>(target_frames) * features.cols,
                out.values.begin());
  } else {
    std::copy(features.values.begin(), features.values.end(), out.values.begin());
  }
  return out;
}

}  // namespace accentlab::audio
