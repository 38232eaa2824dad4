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

#include "accentlab/audio/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "accentlab/audio/fft.hpp"
#include "accentlab/error.hpp"

namespace accentlab::audio {

int frame_count(std::size_t n, int frame, int hop) {
  if (n < static_cast<std::size_t>(frame)) return 0;
  return static_cast<int>((n - frame) / hop) + 1;
}

namespace {

std::vector<double> to_double(const Signal& signal) {
  validate(signal);
  return {signal.samples.begin(), signal.samples.end()};
}

const Fft& spec_fft() {
  static const Fft fft(kFftSize);
  return fft;
}

const std::vector<double>& spec_window() {
  static const std::vector<double> w = hann_window(kFftSize);
  return w;
}

}  // namespace

ComplexSpectrogram stft_complex(std::span<const double> samples) {
  const int frames = frame_count(samples.size(), kFftSize, kHop);
  if (frames == 0) {
    throw TooShortError("signal of " + std::to_string(samples.size()) +
                        " samples is shorter than one 256-sample frame");
  }
  const auto& w = spec_window();
  ComplexSpectrogram out(frames);
  std::vector<std::complex<double>> buf(kFftSize);
  for (int t = 0; t < frames; ++t) {
    const std::size_t off = static_cast<std::size_t>(t) * kHop;
    for (int i = 0; i < kFftSize; ++i) buf[i] = samples[off + i] * w[i];
    spec_fft().forward(buf);
    out[t].assign(buf.begin(), buf.begin() + kSpecBins);
  }
  return out;
}

FeatureMatrix stft_magnitude(std::span<const double> samples) {
  const auto frames = stft_complex(samples);
  FeatureMatrix m(static_cast<int>(frames.size()), kSpecBins);
  for (int t = 0; t < m.rows; ++t) {
    for (int k = 0; k < kSpecBins; ++k) m.at(t, k) = std::abs(frames[t][k]);
  }
  return m;
}

FeatureMatrix stft_magnitude(const Signal& signal) {
  const auto x = to_double(signal);
  return stft_magnitude(std::span<const double>(x));
}

std::vector<double> istft(const ComplexSpectrogram& frames) {
  if (frames.empty()) return {};
  const auto& w = spec_window();
  const std::size_t n = (frames.size() - 1) * kHop + kFftSize;
  std::vector<double> out(n, 0.0), norm(n, 0.0);
  std::vector<std::complex<double>> buf(kFftSize);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    // Rebuild the Hermitian-symmetric full spectrum from bins 0..N/2.
    for (int k = 0; k < kSpecBins; ++k) buf[k] = frames[t][k];
    buf[0] = buf[0].real();
    buf[kFftSize / 2] = buf[kFftSize / 2].real();
    for (int k = kSpecBins; k < kFftSize; ++k) buf[k] = std::conj(buf[kFftSize - k]);
    spec_fft().inverse(buf);
    const std::size_t off = t * kHop;
    for (int i = 0; i < kFftSize; ++i) {
      out[off + i] += buf[i].real() / kFftSize * w[i];
      norm[off + i] += w[i] * w[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = norm[i] > 1e-12 ? out[i] / norm[i] : 0.0;
  }
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<std::vector<double>> mel_filterbank() {
  const int bins = kMfccFftSize / 2 + 1;
  const double lo = hz_to_mel(kMelLowHz), hi = hz_to_mel(kMelHighHz);
  std::vector<double> edges(kNumMel + 2);
  for (int i = 0; i < kNumMel + 2; ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * i / (kNumMel + 1));
  }
  std::vector<std::vector<double>> fb(kNumMel, std::vector<double>(bins, 0.0));
  for (int m = 0; m < kNumMel; ++m) {
    const double left = edges[m], centre = edges[m + 1], right = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * kSampleRate / kMfccFftSize;
      if (f > left && f < centre) {
        fb[m][k] = (f - left) / (centre - left);
      } else if (f >= centre && f < right) {
        fb[m][k] = (right - f) / (right - centre);
      }
    }
  }
  return fb;
}

FeatureMatrix mfcc(const Signal& signal) {
  const auto x = to_double(signal);
  const int frames = frame_count(x.size(), kMfccFrame, kHop);
  if (frames == 0) {
    throw TooShortError("signal of " + std::to_string(x.size()) +
                        " samples is shorter than one 400-sample frame");
  }
  static const Fft fft(kMfccFftSize);
  static const auto window = hann_window(kMfccFrame);
  static const auto fb = mel_filterbank();
  // Orthonormal DCT-II basis.
  static const auto dct = [] {
    std::vector<std::vector<double>> d(kNumCeps, std::vector<double>(kNumMel));
    for (int c = 0; c < kNumCeps; ++c) {
      const double scale = std::sqrt((c == 0 ? 1.0 : 2.0) / kNumMel);
      for (int m = 0; m < kNumMel; ++m) {
        d[c][m] = scale * std::cos(M_PI * c * (m + 0.5) / kNumMel);
      }
    }
    return d;
  }();

  const int bins = kMfccFftSize / 2 + 1;
  FeatureMatrix out(frames, kNumCeps);
  std::vector<std::complex<double>> buf(kMfccFftSize);
  std::vector<double> power(bins), logmel(kNumMel);
  for (int t = 0; t < frames; ++t) {
    const std::size_t off = static_cast<std::size_t>(t) * kHop;
    std::fill(buf.begin(), buf.end(), std::complex<double>{});
    for (int i = 0; i < kMfccFrame; ++i) buf[i] = x[off + i] * window[i];
    fft.forward(buf);
    for (int k = 0; k < bins; ++k) power[k] = std::norm(buf[k]);
    for (int m = 0; m < kNumMel; ++m) {
      double e = 0.0;
      for (int k = 0; k < bins; ++k) e += fb[m][k] * power[k];
      logmel[m] = std::log(std::max(e, kLogFloor));
    }
    for (int c = 0; c < kNumCeps; ++c) {
      double acc = 0.0;
      for (int m = 0; m < kNumMel; ++m) acc += dct[c][m] * logmel[m];
      out.at(t, c) = acc;
    }
  }
  return out;
}

}  // namespace accentlab::audio
