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

#include <complex>
#include <span>
#include <vector>

#include "accentlab/audio/signal.hpp"

namespace accentlab::audio {

// Spectrogram framing: window length equals the FFT size.
inline constexpr int kFftSize = 256;
inline constexpr int kHop = 160;
inline constexpr int kSpecBins = kFftSize / 2 + 1;  // 129

// MFCC framing.
inline constexpr int kMfccFrame = 400;
inline constexpr int kMfccFftSize = 512;
inline constexpr int kNumMel = 30;
inline constexpr int kNumCeps = 30;
inline constexpr double kMelLowHz = 20.0;
inline constexpr double kMelHighHz = 8000.0;
inline constexpr double kLogFloor = 1e-10;

/// Dense row-major (rows x cols) matrix; rows are frames.
struct FeatureMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  FeatureMatrix() = default;
  FeatureMatrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, fill) {}

  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
  std::span<double> row(int r) {
    return {values.data() + static_cast<std::size_t>(r) * cols,
            static_cast<std::size_t>(cols)};
  }
  std::span<const double> row(int r) const {
    return {values.data() + static_cast<std::size_t>(r) * cols,
            static_cast<std::size_t>(cols)};
  }
  bool operator==(const FeatureMatrix&) const = default;
};

/// Number of frames for a signal of n samples; 0 when n < frame.
int frame_count(std::size_t n, int frame, int hop);

using ComplexSpectrogram = std::vector<std::vector<std::complex<double>>>;

/// Hann-windowed 256-point STFT with a 160-sample hop; bins 0..128 per
/// frame. Throws TooShortError when the signal is shorter than a frame.
ComplexSpectrogram stft_complex(std::span<const double> samples);

/// |STFT| as a (T x 129) matrix.
FeatureMatrix stft_magnitude(const Signal& signal);
FeatureMatrix stft_magnitude(std::span<const double> samples);

/// Least-squares overlap-add inverse of stft_complex: each frame is
/// inverse transformed, windowed, summed and divided by the summed squared
/// window. Output length is (T - 1) * 160 + 256.
std::vector<double> istft(const ComplexSpectrogram& frames);

/// Triangular mel filters over the bins of a 512-point FFT, returned as
/// (30 x 257) weights.
std::vector<std::vector<double>> mel_filterbank();

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// 30 MFCCs per 25 ms frame (400 samples, 160 hop, Hann, power spectrum,
/// 30 mel filters, log with floor, orthonormal DCT-II). Throws
/// TooShortError below 400 samples.
FeatureMatrix mfcc(const Signal& signal);

}  // namespace accentlab::audio
