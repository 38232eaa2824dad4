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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "accentlab/audio/feature_file.hpp"
#include "accentlab/audio/features.hpp"
#include "accentlab/audio/griffin_lim.hpp"
#include "accentlab/audio/transform.hpp"
#include "accentlab/audio/wav.hpp"
#include "accentlab/error.hpp"
#include "accentlab/rng.hpp"
#include "doctest.h"

using namespace accentlab;
using namespace accentlab::audio;

namespace {

// Hand-assembled WAV bytes, written field by field without the library's
// encoder so the round-trip test has an independent reference.
std::vector<std::uint8_t> handmade_wav(const std::vector<std::int16_t>& pcm,
                                       const char* magic = "RIFF",
                                       std::uint16_t channels = 1,
                                       std::uint32_t rate = 16000,
                                       std::uint16_t bits = 16) {
  std::vector<std::uint8_t> b;
  auto u32 = [&](std::uint32_t v) {
    b.push_back(v & 0xff);
    b.push_back((v >> 8) & 0xff);
    b.push_back((v >> 16) & 0xff);
    b.push_back((v >> 24) & 0xff);
  };
  auto u16 = [&](std::uint16_t v) {
    b.push_back(v & 0xff);
    b.push_back(v >> 8);
  };
  const std::uint32_t data = static_cast<std::uint32_t>(pcm.size() * 2);
  b.insert(b.end(), magic, magic + 4);
  u32(36 + data);
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  u32(16);
  u16(1);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(channels * bits / 8);
  u16(bits);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  u32(data);
  for (auto s : pcm) u16(static_cast<std::uint16_t>(s));
  return b;
}

Signal sine(double hz, std::size_t n, double amp = 0.5) {
  Signal s;
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.samples[i] = static_cast<float>(amp * std::sin(2.0 * M_PI * hz * i / kSampleRate));
  }
  return s;
}

}  // namespace

TEST_CASE("read_wav: one second of digital silence") {
  const auto sig = decode_wav(handmade_wav(std::vector<std::int16_t>(16000, 0)));
  CHECK(sig.samples.size() == 16000);
  CHECK(sig.sample_rate == 16000);
  CHECK(std::all_of(sig.samples.begin(), sig.samples.end(), [](float v) { return v == 0.0f; }));
}

TEST_CASE("write_wav(read_wav(f)) reproduces a handmade fixture byte for byte") {
  Rng rng(7);
  std::vector<std::int16_t> pcm(5000);
  for (auto& s : pcm) s = static_cast<std::int16_t>(rng.uniform_int(-32768, 32767));
  pcm[0] = -32768;
  pcm[1] = 32767;
  const auto fixture = handmade_wav(pcm);
  const auto dir = std::filesystem::temp_directory_path() / "accentlab_wav_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "in.wav", std::ios::binary);
    f.write(reinterpret_cast<const char*>(fixture.data()), fixture.size());
  }
  const auto sig = read_wav(dir / "in.wav");
  CHECK(sig.samples[0] == -1.0f);
  CHECK(sig.samples[1] == doctest::Approx(32767.0 / 32768.0));
  write_wav(dir / "out.wav", sig);
  std::ifstream g(dir / "out.wav", std::ios::binary);
  std::vector<std::uint8_t> round((std::istreambuf_iterator<char>(g)),
                                  std::istreambuf_iterator<char>());
  CHECK(round == fixture);
  std::filesystem::remove_all(dir);
}

TEST_CASE("read_wav rejects malformed and unsupported files") {
  const std::vector<std::int16_t> pcm(100, 0);
  CHECK_THROWS_AS(decode_wav(handmade_wav(pcm, "RIFX")), FormatError);
  CHECK_THROWS_AS(decode_wav(handmade_wav(pcm, "RIFF", 2)), UnsupportedFormatError);
  CHECK_THROWS_AS(decode_wav(handmade_wav(pcm, "RIFF", 1, 44100)), UnsupportedFormatError);
  CHECK_THROWS_AS(decode_wav(handmade_wav(pcm, "RIFF", 1, 16000, 8)), UnsupportedFormatError);
  auto truncated = handmade_wav(pcm);
  truncated.resize(truncated.size() - 10);
  CHECK_THROWS_AS(decode_wav(truncated), FormatError);
  CHECK_THROWS_AS(decode_wav(std::vector<std::uint8_t>{'R', 'I'}), FormatError);
  CHECK_THROWS_AS(read_wav("/nonexistent/file.wav"), IoError);
}

TEST_CASE("decode_wav skips unknown chunks with odd padding") {
  auto b = handmade_wav({100, -100});
  // Insert a 3-byte LIST chunk (+1 pad byte) before "fmt ".
  const std::vector<std::uint8_t> list = {'L', 'I', 'S', 'T', 3, 0, 0, 0, 'a', 'b', 'c', 0};
  b.insert(b.begin() + 12, list.begin(), list.end());
  const auto sig = decode_wav(b);
  REQUIRE(sig.samples.size() == 2);
  CHECK(sig.samples[0] == doctest::Approx(100.0 / 32768.0));
}

TEST_CASE("stft_magnitude: zero signal and framing boundaries") {
  Signal zero;
  zero.samples.assign(4096, 0.0f);
  const auto m = stft_magnitude(zero);
  CHECK(m.rows == 25);
  CHECK(m.cols == 129);
  CHECK(std::all_of(m.values.begin(), m.values.end(), [](double v) { return v == 0.0; }));

  zero.samples.assign(256, 0.0f);
  CHECK(stft_magnitude(zero).rows == 1);
  zero.samples.assign(255, 0.0f);
  CHECK_THROWS_AS(stft_magnitude(zero), TooShortError);
}

TEST_CASE("framing arithmetic holds for every length") {
  for (std::size_t n = 0; n < 3000; n += 7) {
    const int stft_t = frame_count(n, 256, 160);
    const int mfcc_t = frame_count(n, 400, 160);
    CHECK(stft_t == (n < 256 ? 0 : static_cast<int>((n - 256) / 160) + 1));
    CHECK(mfcc_t == (n < 400 ? 0 : static_cast<int>((n - 400) / 160) + 1));
  }
}

TEST_CASE("stft_magnitude of a 1 kHz sine peaks at bin 16 and matches a direct DFT") {
  const auto sig = sine(1000.0, 4000);
  const auto m = stft_magnitude(sig);
  for (int t = 0; t < m.rows; ++t) {
    const auto row = m.row(t);
    CHECK(std::max_element(row.begin(), row.end()) - row.begin() == 16);
  }
  // Direct O(N^2) DFT of frame 3 with an independently computed window.
  const int t = 3;
  for (int k = 0; k < 129; ++k) {
    std::complex<double> acc = 0.0;
    for (int n = 0; n < 256; ++n) {
      const double w = 0.5 * (1.0 - std::cos(2.0 * M_PI * n / 256.0));
      const double x = sig.samples[t * 160 + n] * w;
      acc += x * std::polar(1.0, -2.0 * M_PI * k * n / 256.0);
    }
    CHECK(m.at(t, k) == doctest::Approx(std::abs(acc)).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("stft_magnitude is non-negative and positively homogeneous") {
  Rng rng(11);
  Signal x;
  x.samples.resize(3000);
  for (auto& s : x.samples) s = static_cast<float>(rng.uniform(-0.4, 0.4));
  const auto base = stft_magnitude(x);
  CHECK(std::all_of(base.values.begin(), base.values.end(), [](double v) { return v >= 0.0; }));
  for (double c : {0.5, 2.0}) {
    std::vector<double> scaled(x.samples.begin(), x.samples.end());
    for (auto& v : scaled) v *= c;
    const auto m = stft_magnitude(std::span<const double>(scaled));
    for (std::size_t i = 0; i < m.values.size(); ++i) {
      CHECK(std::abs(m.values[i] - c * base.values[i]) <= 1e-6 * (c * base.values[i]) + 1e-12);
    }
  }
}

namespace mfcc_oracle {

// Built from the textbook definitions, sharing nothing with the engine:
// direct DFT, filter edges in Hz, explicit DCT-II sums.
std::vector<double> frame_coefficients(const Signal& s, int frame) {
  const int n_fft = 512, bins = 257;
  std::vector<double> power(bins);
  for (int k = 0; k < bins; ++k) {
    double re = 0.0, im = 0.0;
    for (int n = 0; n < 400; ++n) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * n / 400.0);
      const double x = s.samples[frame * 160 + n] * w;
      re += x * std::cos(2.0 * M_PI * k * n / n_fft);
      im -= x * std::sin(2.0 * M_PI * k * n / n_fft);
    }
    power[k] = re * re + im * im;
  }
  auto mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  std::vector<double> logmel(30);
  for (int m = 0; m < 30; ++m) {
    const double step = (mel(8000.0) - mel(20.0)) / 31.0;
    const double l = hz(mel(20.0) + step * m);
    const double c = hz(mel(20.0) + step * (m + 1));
    const double r = hz(mel(20.0) + step * (m + 2));
    double e = 0.0;
    for (int k = 0; k < bins; ++k) {
      const double f = k * 16000.0 / n_fft;
      double wgt = 0.0;
      if (f > l && f < c) wgt = (f - l) / (c - l);
      if (f >= c && f < r) wgt = (r - f) / (r - c);
      e += wgt * power[k];
    }
    logmel[m] = std::log(std::max(e, 1e-10));
  }
  std::vector<double> ceps(30);
  for (int q = 0; q < 30; ++q) {
    double acc = 0.0;
    for (int m = 0; m < 30; ++m) acc += logmel[m] * std::cos(M_PI * q * (2 * m + 1) / 60.0);
    ceps[q] = acc * (q == 0 ? std::sqrt(1.0 / 30.0) : std::sqrt(2.0 / 30.0));
  }
  return ceps;
}

}  // namespace mfcc_oracle

TEST_CASE("mfcc: shapes, silence and the independent oracle") {
  Signal silence;
  silence.samples.assign(16000, 0.0f);
  const auto m = mfcc(silence);
  CHECK(m.rows == 98);
  CHECK(m.cols == 30);
  const double c0 = 30.0 * std::sqrt(1.0 / 30.0) * std::log(1e-10);
  for (int t = 0; t < m.rows; ++t) {
    CHECK(m.at(t, 0) == doctest::Approx(c0).epsilon(1e-12));
    for (int c = 1; c < 30; ++c) CHECK(std::abs(m.at(t, c)) < 1e-9);
  }

  const auto tone = sine(440.0, 16000);
  const auto got = mfcc(tone);
  const auto want = mfcc_oracle::frame_coefficients(tone, 0);
  for (int c = 0; c < 30; ++c) CHECK(std::abs(got.at(0, c) - want[c]) < 1e-6);
  const auto want5 = mfcc_oracle::frame_coefficients(tone, 5);
  for (int c = 0; c < 30; ++c) CHECK(std::abs(got.at(5, c) - want5[c]) < 1e-6);

  silence.samples.assign(399, 0.0f);
  CHECK_THROWS_AS(mfcc(silence), TooShortError);
  silence.samples.assign(400, 0.0f);
  CHECK(mfcc(silence).rows == 1);
}

TEST_CASE("mel filterbank: 30 filters, each non-empty, peaks ordered") {
  const auto fb = mel_filterbank();
  REQUIRE(fb.size() == 30);
  int prev_peak = -1;
  for (const auto& f : fb) {
    CHECK(f.size() == 257);
    const auto peak = std::max_element(f.begin(), f.end()) - f.begin();
    CHECK(f[peak] > 0.0);
    CHECK(peak >= prev_peak);
    prev_peak = static_cast<int>(peak);
  }
}

namespace {

FeatureMatrix random_positive(Rng& rng, int rows, int cols, double lo, double hi) {
  FeatureMatrix m(rows, cols);
  for (auto& v : m.values) v = std::exp(rng.uniform(std::log(lo), std::log(hi)));
  return m;
}

}  // namespace

TEST_CASE("log_standardize round-trips 1000 random positive matrices") {
  Rng rng(3);
  std::vector<FeatureMatrix> fit;
  for (int i = 0; i < 4; ++i) fit.push_back(random_positive(rng, 20, 129, 1e-4, 50.0));
  const auto state = fit_transform_state(fit);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto x = random_positive(rng, 3, 129, 1e-3, 30.0);
    const auto back = destandardize_exp(log_standardize(x, state), state);
    for (std::size_t i = 0; i < x.values.size(); ++i) {
      worst = std::max(worst, std::abs(back.values[i] - x.values[i]) / x.values[i]);
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("log_standardize: zero entries, range of the fitting set, unfitted state") {
  Rng rng(5);
  std::vector<FeatureMatrix> fit;
  for (int i = 0; i < 3; ++i) fit.push_back(random_positive(rng, 30, 129, 1e-3, 10.0));
  fit[1].at(4, 7) = 0.0;
  const auto state = fit_transform_state(fit);

  // Separate scan for the standardized extremes.
  double lo = 1e300, hi = -1e300;
  for (const auto& m : fit) {
    for (int r = 0; r < m.rows; ++r) {
      for (int c = 0; c < m.cols; ++c) {
        const double z = (std::log(m.at(r, c) + 1e-10) - state.mean[c]) / state.std[c];
        lo = std::min(lo, z);
        hi = std::max(hi, z);
      }
    }
  }
  CHECK(state.min_val == doctest::Approx(lo).epsilon(1e-12));
  CHECK(state.max_val == doctest::Approx(hi).epsilon(1e-12));
  for (const auto& m : fit) {
    const auto f = log_standardize(m, state);
    for (double v : f.values) {
      CHECK(std::isfinite(v));
      CHECK(v >= -1e-12);
      CHECK(v <= 1.0 + 1e-12);
    }
  }
  CHECK(log_standardize(fit[1], state).at(4, 7) == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(log_standardize(fit[0], TransformState{}), StateError);
  CHECK_THROWS_AS(destandardize_exp(fit[0], TransformState{}), StateError);
  FeatureMatrix wrong(2, 30, 1.0);
  CHECK_THROWS_AS(log_standardize(wrong, state), ShapeError);
}

TEST_CASE("transform state file round-trips exactly") {
  Rng rng(9);
  std::vector<FeatureMatrix> fit{random_positive(rng, 10, 129, 1e-3, 5.0)};
  const auto state = fit_transform_state(fit);
  const auto path = std::filesystem::temp_directory_path() / "accentlab_state.txt";
  save_transform_state(path, state);
  CHECK(load_transform_state(path) == state);
  std::filesystem::remove(path);
}

TEST_CASE("trim_or_pad boundary lengths") {
  for (int t : {1, 255, 256, 257, 1000}) {
    CAPTURE(t);
    FeatureMatrix in(t, 129);
    for (int r = 0; r < t; ++r) {
      for (int c = 0; c < 129; ++c) in.at(r, c) = r + 1 + c * 1e-3;
    }
    Rng a(42), b(42);
    const auto out = trim_or_pad(in, a);
    CHECK(out.rows == 256);
    CHECK(out.cols == 129);
    CHECK(out == trim_or_pad(in, b));
    if (t <= 256) {
      for (int r = 0; r < 256; ++r) {
        for (int c = 0; c < 129; ++c) {
          CHECK(out.at(r, c) == (r < t ? in.at(r, c) : 0.0));
        }
      }
    } else {
      const int start = static_cast<int>(out.at(0, 0)) - 1;
      CHECK(start >= 0);
      CHECK(start <= t - 256);
      for (int r = 0; r < 256; ++r) CHECK(out.at(r, 5) == in.at(start + r, 5));
    }
  }
}

TEST_CASE("trim_or_pad: T = 300 crops with a start in [0, 44]") {
  FeatureMatrix in(300, 129);
  for (int r = 0; r < 300; ++r) in.at(r, 0) = r;
  std::vector<int> starts;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const auto out = trim_or_pad(in, rng);
    const int s = static_cast<int>(out.at(0, 0));
    CHECK(s >= 0);
    CHECK(s <= 44);
    for (int r = 0; r < 256; ++r) CHECK(out.at(r, 0) == s + r);
    starts.push_back(s);
  }
  // Both ends of the start range are reachable.
  CHECK(*std::min_element(starts.begin(), starts.end()) <= 2);
  CHECK(*std::max_element(starts.begin(), starts.end()) >= 42);
}

TEST_CASE("griffin_lim: zero spectrogram gives silence of the right length") {
  const FeatureMatrix zero(256, 129, 0.0);
  const auto sig = griffin_lim(zero, 5);
  CHECK(sig.samples.size() == 255 * 160 + 256);
  CHECK(std::all_of(sig.samples.begin(), sig.samples.end(), [](float v) { return v == 0.0f; }));
}

TEST_CASE("griffin_lim: sine round trip within 0.1 relative spectral error") {
  // Same 1 kHz fixture as the STFT peak test.
  const auto tone = sine(1000.0, 16000, 0.5);
  const auto mag = stft_magnitude(tone);
  const auto rebuilt = griffin_lim(mag, 60);
  CHECK(rebuilt.samples.size() == static_cast<std::size_t>((mag.rows - 1) * 160 + 256));
  const double err = relative_spectral_error(stft_magnitude(rebuilt), mag);
  MESSAGE("sine round-trip relative spectral error = " << err);
  CHECK(err <= 0.1);
}

TEST_CASE("griffin_lim: consistency error never increases") {
  Rng rng(17);
  FeatureMatrix mag(60, 129);
  for (auto& v : mag.values) v = rng.uniform(0.0, 1.0);
  const auto trace = griffin_lim_with_trace(mag, 40).consistency_error;
  REQUIRE(trace.size() == 40);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    CAPTURE(i);
    CHECK(trace[i] <= trace[i - 1]);
  }
  CHECK(trace.back() < trace.front());
  CHECK_THROWS_AS(griffin_lim(mag, 0), ShapeError);
}

TEST_CASE("ACFT feature files round-trip bit-exactly") {
  Rng rng(23);
  FeatureMatrix m(37, 129);
  for (auto& v : m.values) v = static_cast<float>(rng.normal());
  const auto bytes = encode_features(m);
  CHECK(bytes.size() == 12 + 37 * 129 * 4);
  CHECK(bytes[0] == 'A');
  CHECK(bytes[4] == 37);
  CHECK(bytes[8] == 129);
  const auto back = decode_features(bytes);
  CHECK(back == m);
  CHECK(encode_features(back) == bytes);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_features(bad), FormatError);
  bad = bytes;
  bad.pop_back();
  CHECK_THROWS_AS(decode_features(bad), FormatError);
}
