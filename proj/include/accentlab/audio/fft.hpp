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

namespace accentlab::audio {

/// Iterative radix-2 FFT with precomputed twiddles. Size must be a power
/// of two. The inverse transform is unnormalized (caller divides by n).
class Fft {
 public:
  explicit Fft(int n);

  int size() const { return n_; }
  void forward(std::span<std::complex<double>> data) const;
  void inverse(std::span<std::complex<double>> data) const;

 private:
  void transform(std::span<std::complex<double>> data, bool inverse) const;

  int n_;
  std::vector<int> bitrev_;
  std::vector<std::complex<double>> twiddle_;
};

/// Periodic Hann window, w[i] = 0.5 - 0.5 cos(2 pi i / n).
std::vector<double> hann_window(int n);

}  // namespace accentlab::audio
