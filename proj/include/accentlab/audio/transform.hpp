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

#include <filesystem>
#include <span>
#include <vector>

#include "accentlab/audio/features.hpp"
#include "accentlab/rng.hpp"

namespace accentlab::audio {

inline constexpr double kLogOffset = 1e-10;
inline constexpr int kTargetFrames = 256;

/// Parameters of the log -> standardize -> [0,1] feature transform.
///
/// mean/std are per-column statistics of log(x + epsilon) over the fitting
/// set; min_val/max_val bound the standardized values of that same set, so
/// transformed fitting data lands in [0, 1].
struct TransformState {
  double epsilon = kLogOffset;
  std::vector<double> mean;
  std::vector<double> std;
  double min_val = 0.0;
  double max_val = 0.0;

  bool fitted() const {
    return !mean.empty() && mean.size() == std.size() && max_val > min_val;
  }
  bool operator==(const TransformState&) const = default;
};

TransformState fit_transform_state(std::span<const FeatureMatrix> fitting_set,
                                   double epsilon = kLogOffset);

/// (log(x + eps) - mean) / std, then min-max scaled. Throws StateError
/// for an unfitted state and ShapeError on a column-count mismatch.
FeatureMatrix log_standardize(const FeatureMatrix& spec,
                              const TransformState& state);

/// Exact inverse of log_standardize, clamped at zero.
FeatureMatrix destandardize_exp(const FeatureMatrix& features,
                                const TransformState& state);

/// Text form: one "key value..." line per field, values printed with
/// round-trip precision.
void save_transform_state(const std::filesystem::path& path,
                          const TransformState& state);
TransformState load_transform_state(const std::filesystem::path& path);

/// Unifies the time axis to target_frames rows: random contiguous crop
/// when longer, zero rows appended when shorter, identity when equal.
FeatureMatrix trim_or_pad(const FeatureMatrix& features, Rng& rng,
                          int target_frames = kTargetFrames);

}  // namespace accentlab::audio
