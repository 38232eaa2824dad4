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

#include "accentlab/audio/griffin_lim.hpp"

#include <cmath>

#include "accentlab/error.hpp"

namespace accentlab::audio {

double relative_spectral_error(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw ShapeError("spectral error on matrices of different shape");
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    num += d * d;
    den += b.values[i] * b.values[i];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::sqrt(num);
  return std::sqrt(num / den);
}

GriffinLimResult griffin_lim_with_trace(const FeatureMatrix& magnitude,
                                        int iterations) {
  if (iterations < 1) throw ShapeError("griffin_lim needs at least one iteration");
  if (magnitude.cols != kSpecBins || magnitude.rows < 1) {
    throw ShapeError("griffin_lim expects a (T x 129) magnitude matrix");
  }
  const int frames = magnitude.rows;
  ComplexSpectrogram estimate(frames, std::vector<std::complex<double>>(kSpecBins));
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < kSpecBins; ++k) estimate[t][k] = magnitude.at(t, k);
  }

  GriffinLimResult result;
  result.consistency_error.reserve(iterations);
  for (int it = 0; it < iterations; ++it) {
    const auto x = istft(estimate);
    const auto analysed = stft_complex(x);
    FeatureMatrix mag(frames, kSpecBins);
    for (int t = 0; t < frames; ++t) {
      for (int k = 0; k < kSpecBins; ++k) {
        const auto s = analysed[t][k];
        const double a = std::abs(s);
        mag.at(t, k) = a;
        const double target = magnitude.at(t, k);
        estimate[t][k] = a > 0.0 ? s * (target / a) : std::complex<double>(target, 0.0);
      }
    }
    result.consistency_error.push_back(relative_spectral_error(mag, magnitude));
  }
  const auto x = istft(estimate);
  result.signal.samples.assign(x.begin(), x.end());
  return result;
}

Signal griffin_lim(const FeatureMatrix& magnitude, int iterations) {
  return griffin_lim_with_trace(magnitude, iterations).signal;
}

}  // namespace accentlab::audio
