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

#include "accentlab/corpus/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "accentlab/audio/wav.hpp"
#include "accentlab/error.hpp"

namespace accentlab::corpus {

using audio::Signal;

// ---------------------------------------------------------------- classes

const std::array<std::string, kNumClasses>& class_names() {
  static const std::array<std::string, kNumClasses> names{"chuan", "dongbei", "guan", "wu",
                                                          "yue"};
  return names;
}

std::string_view class_name(AccentClass c) { return class_names()[static_cast<int>(c)]; }

AccentClass class_from_name(std::string_view name) {
  const auto& names = class_names();
  for (int i = 0; i < kNumClasses; ++i) {
    if (names[i] == name) return static_cast<AccentClass>(i);
  }
  throw LabelError("unknown accent class '" + std::string(name) +
                   "' (expected chuan, dongbei, guan, wu, or yue)");
}

const std::vector<std::string>& provinces_of(AccentClass c) {
  static const std::array<std::vector<std::string>, kNumClasses> table{{
      {"si chuan", "chong qing"},
      {"ji lin", "liao ning", "hei long jiang"},
      {"bei jing", "tian jin", "he bei"},
      {"zhe jiang", "shang hai", "jiang su"},
      {"guang dong", "guang xi"},
  }};
  return table[static_cast<int>(c)];
}

namespace {

std::string normalize_province(std::string_view s) {
  std::string out;
  bool space = false;
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  return out;
}

}  // namespace

AccentClass province_to_class(std::string_view province) {
  const std::string key = normalize_province(province);
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& list = provinces_of(static_cast<AccentClass>(c));
    if (std::find(list.begin(), list.end(), key) != list.end()) {
      return static_cast<AccentClass>(c);
    }
  }
  throw UnknownProvinceError("province '" + std::string(province) +
                             "' is not grouped into an accent class");
}

// ---------------------------------------------------------------- synthesis

const std::array<ClassProfile, kNumClasses>& default_profiles() {
  static const std::array<ClassProfile, kNumClasses> profiles{{
      {"level", 110.0, {730, 1090, 2440}, {90, 110, 160}},
      {"rising", 140.0, {270, 2290, 3010}, {60, 100, 170}},
      {"dipping", 170.0, {300, 870, 2240}, {60, 90, 150}},
      {"falling", 200.0, {530, 1840, 2480}, {70, 100, 160}},
      {"high-falling", 230.0, {570, 840, 2410}, {80, 90, 150}},
  }};
  return profiles;
}

double contour_value(std::string_view contour, double u) {
  if (contour == "level") return 0.0;
  if (contour == "rising") return 0.2 * (u - 0.5);
  if (contour == "falling") return -0.2 * (u - 0.5);
  if (contour == "dipping") return -0.2 * (std::sin(std::numbers::pi * u) - 2.0 / std::numbers::pi);
  if (contour == "high-falling") return 0.3 * (1.0 - u * u) - 0.2;
  throw DataError("unknown contour family '" + std::string(contour) + "'");
}

SpeakerProfile make_speaker(AccentClass accent, int index, std::uint64_t seed) {
  SpeakerProfile s;
  s.accent = accent;
  char id[64];
  std::snprintf(id, sizeof id, "%s_spk%02d", std::string(class_name(accent)).c_str(), index);
  s.id = id;
  Rng rng(derive_seed(seed, s.id));
  const auto& provinces = provinces_of(accent);
  s.province = provinces[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(provinces.size()) - 1))];
  s.f0_shift_hz = std::clamp(rng.normal(0.0, 5.0), -10.0, 10.0);
  s.formant_scale = rng.uniform(0.94, 1.06);
  return s;
}

Signal synth_utterance(AccentClass accent, const SpeakerProfile& speaker, double duration_s,
                       Rng& rng) {
  if (!(duration_s >= 0.5 && duration_s <= 10.0)) {
    throw DataError("utterance duration must lie in [0.5, 10] s");
  }
  const ClassProfile& prof = default_profiles()[static_cast<int>(accent)];
  const double sr = audio::kSampleRate;
  const auto n = static_cast<std::size_t>(std::lround(duration_s * sr));
  Signal out;
  out.sample_rate = audio::kSampleRate;
  out.samples.assign(n, 0.0f);

  std::array<double, 3> formants{}, bw{};
  for (int i = 0; i < 3; ++i) {
    formants[i] = prof.formants[i] * speaker.formant_scale;
    bw[i] = prof.bandwidths[i];
  }
  constexpr std::array<double, 3> kFormantGain{1.0, 0.6, 0.35};
  auto envelope = [&](double f) {
    double a = 0.02;
    for (int i = 0; i < 3; ++i) {
      const double x = (f - formants[i]) / (0.5 * bw[i]);
      a += kFormantGain[i] / (1.0 + x * x);
    }
    return a;
  };

  std::vector<double> buf(n, 0.0);
  const double base_f0 = prof.mean_f0 + speaker.f0_shift_hz;
  double phase = 0.0;
  std::size_t pos = static_cast<std::size_t>(rng.uniform(0.05, 0.15) * sr);
  while (pos < n) {
    const auto syl = static_cast<std::size_t>(rng.uniform(0.18, 0.32) * sr);
    const auto gap = static_cast<std::size_t>(rng.uniform(0.03, 0.08) * sr);
    const double jitter = 1.0 + rng.uniform(-0.02, 0.02);
    const double gain = rng.uniform(0.7, 1.0);
    const std::size_t end = std::min(n, pos + syl);
    const std::size_t ramp = static_cast<std::size_t>(0.02 * sr);
    for (std::size_t i = pos; i < end; ++i) {
      const double u = static_cast<double>(i - pos) / static_cast<double>(syl);
      const double f0 = base_f0 * jitter * (1.0 + contour_value(prof.contour, u));
      phase += 2.0 * std::numbers::pi * f0 / sr;
      if (phase > 2.0 * std::numbers::pi) phase -= 2.0 * std::numbers::pi;
      const std::complex<double> z = std::polar(1.0, phase);
      std::complex<double> zk = z;
      double v = 0.0;
      for (int k = 1; k * f0 < 7000.0; ++k) {
        // Formant-shaped harmonics on top of a 1/k glottal source, which
        // keeps the fundamental dominant for every class.
        v += (envelope(k * f0) / std::sqrt(static_cast<double>(k)) + 0.8 / k) * zk.imag();
        zk *= z;
      }
      double amp = gain;
      const std::size_t from_start = i - pos, to_end = end - 1 - i;
      if (from_start < ramp) amp *= 0.5 - 0.5 * std::cos(std::numbers::pi * from_start / ramp);
      if (to_end < ramp) amp *= 0.5 - 0.5 * std::cos(std::numbers::pi * to_end / ramp);
      buf[i] = amp * v;
    }
    pos = end + gap;
  }

  double peak = 0.0;
  for (double v : buf) peak = std::max(peak, std::abs(v));
  const double level = rng.uniform(0.5, 0.9);
  const double scale = peak > 0 ? level / peak : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = buf[i] * scale + rng.normal(0.0, 0.003);
    out.samples[i] = static_cast<float>(std::clamp(v, -1.0, 1.0));
  }
  return out;
}

// ---------------------------------------------------------------- manifest

std::vector<UtteranceRecord> Manifest::split(std::string_view name) const {
  std::vector<UtteranceRecord> out;
  for (const auto& r : records) {
    if (r.split == name) out.push_back(r);
  }
  return out;
}

std::string serialize_manifest(const Manifest& m) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& r : m.records) {
    for (const auto* f : {&r.utt_id, &r.path, &r.speaker, &r.province, &r.accent_class}) {
      if (f->find_first_of(",\n\"") != std::string::npos) {
        throw DataError("manifest field may not contain commas, quotes or newlines: " + *f);
      }
    }
    out += r.utt_id + ',' + r.path + ',' + r.speaker + ',' + r.province + ',' + r.accent_class +
           ',' + r.split + '\n';
  }
  return out;
}

Manifest parse_manifest(std::string_view text) {
  Manifest m;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool saw_header = false;
  while (start < text.size()) {
    std::size_t stop = text.find('\n', start);
    if (stop == std::string_view::npos) stop = text.size();
    std::string line(text.substr(start, stop - start));
    start = stop + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!saw_header) {
      if (line != kManifestHeader) {
        throw DataError("manifest header must be '" + std::string(kManifestHeader) + "'");
      }
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string part;
    while (std::getline(ss, part, ',')) f.push_back(part);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 6) {
      throw DataError("manifest line " + std::to_string(line_no) + ": expected 6 fields");
    }
    UtteranceRecord r{f[0], f[1], f[2], f[3], f[4], f[5]};
    if (r.split != "train" && r.split != "test") {
      throw DataError("manifest line " + std::to_string(line_no) + ": bad split " + r.split);
    }
    if (!ids.insert(r.utt_id).second) throw DataError("duplicate utt_id " + r.utt_id);
    if (class_from_name(r.accent_class) != province_to_class(r.province)) {
      throw DataError("manifest line " + std::to_string(line_no) + ": class " +
                      r.accent_class + " does not match province " + r.province);
    }
    m.records.push_back(std::move(r));
  }
  if (!saw_header) throw DataError("empty manifest");
  return m;
}

Manifest read_manifest(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + csv_path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Manifest m = parse_manifest(ss.str());
  m.root = csv_path.parent_path();
  return m;
}

void write_manifest(const std::filesystem::path& csv_path, const Manifest& m) {
  const std::string text = serialize_manifest(m);
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest " + csv_path.string());
  out << text;
  if (!out) throw IoError("short write to " + csv_path.string());
}

Manifest build_manifest(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  if (spec.speakers_per_class < 1 || spec.utts_per_speaker < 1) {
    throw DataError("synth spec needs at least one speaker and one utterance");
  }
  if (spec.min_duration_s < 0.5 || spec.max_duration_s > 10.0 ||
      spec.min_duration_s > spec.max_duration_s) {
    throw DataError("synth durations must satisfy 0.5 <= min <= max <= 10");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "wav", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "wav").string() + ": " + ec.message());

  // Whole speakers per class go to test; the count is the same for every
  // class, so the per-class record counts match exactly.
  const int n_test = static_cast<int>(std::lround(spec.test_fraction * spec.speakers_per_class));

  struct Job {
    SpeakerProfile speaker;
    UtteranceRecord record;
  };
  std::vector<Job> jobs;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto accent = static_cast<AccentClass>(c);
    std::vector<int> order(static_cast<std::size_t>(spec.speakers_per_class));
    for (int i = 0; i < spec.speakers_per_class; ++i) order[i] = i;
    Rng split_rng(derive_seed(spec.seed, "split/" + std::string(class_name(accent))));
    for (int i = spec.speakers_per_class - 1; i > 0; --i) {
      std::swap(order[i], order[split_rng.uniform_int(0, i)]);
    }
    std::vector<bool> is_test(order.size(), false);
    for (int i = 0; i < n_test; ++i) is_test[order[i]] = true;

    for (int s = 0; s < spec.speakers_per_class; ++s) {
      const SpeakerProfile spk = make_speaker(accent, s, spec.seed);
      for (int u = 0; u < spec.utts_per_speaker; ++u) {
        char uid[96];
        std::snprintf(uid, sizeof uid, "%s_u%03d", spk.id.c_str(), u);
        UtteranceRecord r{uid, std::string("wav/") + uid + ".wav", spk.id, spk.province,
                          std::string(class_name(accent)), is_test[s] ? "test" : "train"};
        jobs.push_back({spk, std::move(r)});
      }
    }
  }

  std::vector<std::exception_ptr> errors(jobs.size());
  auto work = [&](std::size_t first, std::size_t step) {
    for (std::size_t i = first; i < jobs.size(); i += step) {
      try {
        Rng rng(derive_seed(spec.seed, jobs[i].record.utt_id));
        const double dur = rng.uniform(spec.min_duration_s, spec.max_duration_s);
        const Signal sig = synth_utterance(jobs[i].speaker.accent, jobs[i].speaker, dur, rng);
        audio::write_wav(out_dir / jobs[i].record.path, sig);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, spec.threads);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  Manifest m;
  m.root = out_dir;
  for (auto& j : jobs) m.records.push_back(std::move(j.record));
  write_manifest(out_dir / "manifest.csv", m);
  return m;
}

// ---------------------------------------------------------------- augmentation

NoisyResult augment_additive_noise(const Signal& signal, double snr_db, Rng& rng) {
  if (!(snr_db >= 0.0 && snr_db <= 40.0)) throw DataError("snr_db must lie in [0, 40]");
  NoisyResult out;
  out.signal.sample_rate = signal.sample_rate;
  const std::size_t n = signal.samples.size();
  if (n == 0) return out;

  std::vector<double> noise(n);
  double noise_power = 0.0, signal_power = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    noise[i] = rng.normal();
    noise_power += noise[i] * noise[i];
    signal_power += static_cast<double>(signal.samples[i]) * signal.samples[i];
  }
  noise_power /= static_cast<double>(n);
  signal_power /= static_cast<double>(n);
  if (signal_power == 0.0) {
    out.warning = true;
    signal_power = 1.0;
  }
  const double target = signal_power / std::pow(10.0, snr_db / 10.0);
  const double scale = noise_power > 0 ? std::sqrt(target / noise_power) : 0.0;
  out.signal.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.signal.samples[i] =
        static_cast<float>(std::clamp(signal.samples[i] + scale * noise[i], -1.0, 1.0));
  }
  return out;
}

std::vector<Signal> threefold_expand(const Signal& signal, Rng& rng, double snr_lo,
                                     double snr_hi) {
  std::vector<Signal> out{signal};
  for (int i = 0; i < 2; ++i) {
    out.push_back(augment_additive_noise(signal, rng.uniform(snr_lo, snr_hi), rng).signal);
  }
  return out;
}

}  // namespace accentlab::corpus
