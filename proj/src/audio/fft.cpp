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

#include "accentlab/audio/fft.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace accentlab::audio {

Fft::Fft(int n) : n_(n) {
  if (n < 1 || (n & (n - 1)) != 0) {
    throw std::invalid_argument("FFT size must be a power of two");
  }
  int bits = 0;
  while ((1 << bits) < n) ++bits;
  bitrev_.resize(n);
  for (int i = 0; i < n; ++i) {
    int r = 0;
    for (int b = 0; b < bits; ++b) {
      if (i & (1 << b)) r |= 1 << (bits - 1 - b);
    }
    bitrev_[i] = r;
  }
  twiddle_.resize(n / 2);
  for (int k = 0; k < n / 2; ++k) {
    const double a = -2.0 * M_PI * k / n;
    twiddle_[k] = {std::cos(a), std::sin(a)};
  }
}

void Fft::forward(std::span<std::complex<double>> data) const {
  transform(data, false);
}

void Fft::inverse(std::span<std::complex<double>> data) const {
  transform(data, true);
}

void Fft::transform(std::span<std::complex<double>> data, bool inverse) const {
  if (static_cast<int>(data.size()) != n_) {
    throw std::invalid_argument("FFT buffer size mismatch");
  }
  for (int i = 0; i < n_; ++i) {
    if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);
  }
  for (int len = 2; len <= n_; len <<= 1) {
    const int half = len / 2;
    const int stride = n_ / len;
    for (int start = 0; start < n_; start += len) {
      for (int k = 0; k < half; ++k) {
        auto w = twiddle_[k * stride];
        if (inverse) w = std::conj(w);
        const auto u = data[start + k];
        const auto v = data[start + k + half] * w;
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

std::vector<double> hann_window(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
  return w;
}

}  // namespace accentlab::audio
