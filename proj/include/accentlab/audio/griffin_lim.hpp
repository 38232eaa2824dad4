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

#include <vector>

#include "accentlab/audio/features.hpp"

namespace accentlab::audio {

struct GriffinLimResult {
  Signal signal;
  /// ||  |STFT(x_i)| - target ||_F / || target ||_F after each iteration.
  std::vector<double> consistency_error;
};

/// Phase reconstruction from a (T x 129) magnitude spectrogram.
///
/// Starts from zero phase; each iteration inverts with least-squares
/// overlap-add, re-analyses, and keeps the new phase with the target
/// magnitude. The returned signal has (T - 1) * 160 + 256 samples and is
/// not clipped (caller decides).
GriffinLimResult griffin_lim_with_trace(const FeatureMatrix& magnitude,
                                        int iterations);

Signal griffin_lim(const FeatureMatrix& magnitude, int iterations);

/// Relative Frobenius distance between two magnitude matrices of equal
/// shape, || a - b || / || b || (0 when both are zero).
double relative_spectral_error(const FeatureMatrix& a, const FeatureMatrix& b);

}  // namespace accentlab::audio
