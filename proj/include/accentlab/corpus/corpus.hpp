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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "accentlab/audio/signal.hpp"
#include "accentlab/rng.hpp"

namespace accentlab::corpus {

inline constexpr int kNumClasses = 5;

enum class AccentClass { kChuan = 0, kDongbei, kGuan, kWu, kYue };

/// "chuan", "dongbei", "guan", "wu", "yue" in class-id order.
const std::array<std::string, kNumClasses>& class_names();
std::string_view class_name(AccentClass c);
/// Throws LabelError for anything but the five names above.
AccentClass class_from_name(std::string_view name);

/// Provinces belonging to one class, in canonical spelling.
const std::vector<std::string>& provinces_of(AccentClass c);

/// Case- and whitespace-insensitive. Throws UnknownProvinceError for the
/// provinces that are not grouped into any class.
AccentClass province_to_class(std::string_view province);

// ---------------------------------------------------------------- synthesis

/// Acoustic signature of one synthetic accent: a tone contour shape that
/// every syllable follows, a mean pitch, and three vowel formants.
struct ClassProfile {
  std::string contour;  // level | rising | dipping | falling | high-falling
  double mean_f0 = 150.0;
  std::array<double, 3> formants{};
  std::array<double, 3> bandwidths{};
};

const std::array<ClassProfile, kNumClasses>& default_profiles();

/// Relative pitch offset of a contour at position u in [0, 1] of a
/// syllable. Each family averages to zero over the syllable.
double contour_value(std::string_view contour, double u);

struct SpeakerProfile {
  std::string id;
  AccentClass accent = AccentClass::kChuan;
  std::string province;
  double f0_shift_hz = 0.0;
  double formant_scale = 1.0;
};

/// Deterministic in (accent, index, seed).
SpeakerProfile make_speaker(AccentClass accent, int index, std::uint64_t seed);

/// Harmonic source following the class contour, shaped by the class
/// formants (scaled per speaker), split into syllables, plus low-level
/// noise. Duration must lie in [0.5, 10] s.
audio::Signal synth_utterance(AccentClass accent, const SpeakerProfile& speaker,
                              double duration_s, Rng& rng);

// ---------------------------------------------------------------- manifest

struct UtteranceRecord {
  std::string utt_id;
  std::string path;  // relative to the manifest's directory
  std::string speaker;
  std::string province;
  std::string accent_class;
  std::string split;  // train | test

  bool operator==(const UtteranceRecord&) const = default;
};

struct Manifest {
  std::vector<UtteranceRecord> records;
  /// Directory that record paths are relative to (not serialized).
  std::filesystem::path root;

  bool operator==(const Manifest& o) const { return records == o.records; }

  std::filesystem::path resolve(const UtteranceRecord& r) const { return root / r.path; }
  std::vector<UtteranceRecord> split(std::string_view name) const;
};

inline constexpr std::string_view kManifestHeader =
    "utt_id,path,speaker,province,accent_class,split";

std::string serialize_manifest(const Manifest& m);
/// Validates the header, field count, split names, unique ids, and that
/// every accent_class agrees with province_to_class(province).
Manifest parse_manifest(std::string_view text);

Manifest read_manifest(const std::filesystem::path& csv_path);
void write_manifest(const std::filesystem::path& csv_path, const Manifest& m);

struct SynthSpec {
  int speakers_per_class = 10;
  int utts_per_speaker = 20;
  double min_duration_s = 1.5;
  double max_duration_s = 3.0;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  /// Worker threads for WAV generation; output does not depend on it.
  int threads = 1;
};

/// Writes <out_dir>/wav/<utt_id>.wav and <out_dir>/manifest.csv. Whole
/// speakers are assigned to train or test, the same number per class.
Manifest build_manifest(const SynthSpec& spec, const std::filesystem::path& out_dir);

// ---------------------------------------------------------------- augmentation

struct NoisyResult {
  audio::Signal signal;
  /// Set when the input was all zeros and the SNR had no reference; the
  /// noise is then generated against a reference power of 1.
  bool warning = false;
};

/// Adds white Gaussian noise scaled so that signal power / noise power is
/// exactly 10^(snr_db / 10); the sum is clipped to [-1, 1].
NoisyResult augment_additive_noise(const audio::Signal& signal, double snr_db, Rng& rng);

/// The original plus two noisy copies at SNRs drawn from [snr_lo, snr_hi].
std::vector<audio::Signal> threefold_expand(const audio::Signal& signal, Rng& rng,
                                            double snr_lo = 5.0, double snr_hi = 20.0);

}  // namespace accentlab::corpus
