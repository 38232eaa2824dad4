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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.
//
//   acceptance [--workdir DIR] [N ...]    (default: all criteria)

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "../support/grad_cases.hpp"
#include "../support/metric_oracle.hpp"
#include "../support/reference_tables.hpp"
#include "accentlab/audio/griffin_lim.hpp"
#include "accentlab/audio/transform.hpp"
#include "accentlab/cli/cli.hpp"
#include "accentlab/corpus/corpus.hpp"
#include "accentlab/eval/metrics.hpp"
#include "accentlab/models/architectures.hpp"
#include "accentlab/models/converter.hpp"
#include "accentlab/models/training.hpp"

namespace fs = std::filesystem;
using namespace accentlab;
using namespace accentlab::models;

namespace {

// Desk-scale settings. The corpus is 5 classes x 10 speakers x 20
// utterances with two test speakers per class.
constexpr std::uint64_t kSeed = 7;
constexpr int kBatch = 32;
constexpr int kCnnEpochs = 10;
constexpr int kTdnnPretrainEpochs = 6;
constexpr int kTdnnTransferEpochs = 100;
constexpr int kJointEpochs = 8;
constexpr int kEncoderOnlyEpochs = 14;
constexpr int kDecoderOnlyEpochs = 5;

const double kLn5 = std::log(5.0);

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void note(const std::string& s) { std::cout << "  " << s << "\n" << std::flush; }

EpochCallback log_epochs(const std::string& tag) {
  return [tag](const EpochMetrics& m) {
    if (m.split != "test" && m.split != "pretrain") return;
    note(fmt("%s epoch %d %s: loss %.4f (cls %.4f, dec %.5f) acc %.3f", tag.c_str(), m.epoch,
             m.split.c_str(), m.loss_total, m.loss_cls, m.loss_dec, m.accuracy));
  };
}

double accuracy(const nn::ModelGraph<float>& g, const LabeledSet& set) {
  const auto pred = argmax_rows(predict_proba(g, set, kSeed));
  int hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == set.labels[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

std::vector<nn::Tensor<float>> snapshot(const nn::ModelGraph<float>& g) {
  std::vector<nn::Tensor<float>> out;
  for (const auto* p : g.parameters()) out.push_back(p->value);
  return out;
}

bool bit_identical(const nn::Tensor<float>& a, const nn::Tensor<float>& b) {
  return a.shape == b.shape &&
         std::memcmp(a.ptr(), b.ptr(), a.size() * sizeof(float)) == 0;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ------------------------------------------------------------------ shared state

class Context {
 public:
  explicit Context(fs::path workdir) : work_(std::move(workdir)) {}

  const fs::path& work() const { return work_; }

  const corpus::Manifest& manifest() {
    if (!manifest_) {
      std::ostringstream out, err;
      const auto base = work_ / "corpus";
      fs::remove_all(base);
      const int code = cli::run({"accentlab", "synth-data", "--out", base.string(), "--seed",
                                 std::to_string(kSeed), "--speakers-per-class", "10",
                                 "--utts-per-speaker", "20", "--threads", "1"},
                                out, err);
      if (code != 0) throw std::runtime_error("synth-data failed: " + err.str());
      summary_ = out.str();
      fs::path dir = fs::directory_iterator(base)->path();
      manifest_ = corpus::read_manifest(dir / "manifest.csv");
    }
    return *manifest_;
  }
  const std::string& synth_summary() {
    manifest();
    return summary_;
  }

  struct Spectra {
    LabeledSet train, test;
    audio::TransformState state;
  };
  const Spectra& spectra() {
    if (!spectra_) {
      const auto tr = load_features(manifest(), "train", FeatureKind::kSpectrogram);
      const auto te = load_features(manifest(), "test", FeatureKind::kSpectrogram);
      Spectra s;
      s.state = audio::fit_transform_state(tr.features);
      s.train = transform_set(tr, s.state);
      s.test = transform_set(te, s.state);
      spectra_ = std::move(s);
    }
    return *spectra_;
  }

  struct Cnn {
    std::unique_ptr<nn::ModelGraph<float>> graph;
    double test_accuracy = 0;
    double seconds = 0;
  };
  const Cnn& cnn() {
    if (!cnn_) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto& s = spectra();
      Cnn c;
      c.graph = std::make_unique<nn::ModelGraph<float>>(build_cnn_classifier<float>());
      Rng init(derive_seed(kSeed, "acceptance/cnn"));
      c.graph->initialize(init);
      TrainConfig cfg;
      cfg.epochs = kCnnEpochs;
      cfg.batch_size = kBatch;
      cfg.seed = kSeed;
      cfg.on_epoch = log_epochs("cnn");
      train_cnn(*c.graph, s.train, s.test, cfg);
      c.test_accuracy = accuracy(*c.graph, s.test);
      c.seconds = seconds_since(t0);
      cnn_ = std::move(c);
    }
    return *cnn_;
  }

  struct Tdnn {
    std::unique_ptr<TransferResult> result;
    double test_accuracy = 0;
    double seconds = 0;
  };
  const Tdnn& tdnn() {
    if (!tdnn_) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto tr_raw = load_features(manifest(), "train", FeatureKind::kMfcc);
      const auto norm = fit_feature_norm(tr_raw.features);
      const auto tr = normalize_set(tr_raw, norm);
      const auto te = normalize_set(load_features(manifest(), "test", FeatureKind::kMfcc), norm);
      TransferConfig cfg;
      cfg.pretrain_epochs = kTdnnPretrainEpochs;
      cfg.transfer_epochs = kTdnnTransferEpochs;
      cfg.batch_size = kBatch;
      cfg.seed = kSeed;
      auto cb = log_epochs("tdnn");
      cfg.on_epoch = [cb](const EpochMetrics& m) {
        if (m.split == "pretrain" || m.epoch % 20 == 0) cb(m);
      };
      Tdnn t;
      t.result = std::make_unique<TransferResult>(
          pretrain_and_transfer(relabel_by_speaker(manifest(), "train", tr), tr, te, cfg));
      t.test_accuracy = accuracy(t.result->graph, te);
      t.seconds = seconds_since(t0);
      tdnn_ = std::move(t);
    }
    return *tdnn_;
  }

  struct Converter {
    std::unique_ptr<ConverterTrainer> trainer;
    MetricsLog log;
    std::vector<nn::Tensor<float>> classifier_before;
    double mse = 0;
    double seconds = 0;
  };
  Converter train_converter_phases(const std::vector<std::pair<ConverterPhase, int>>& phases,
                                   const std::string& tag) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& s = spectra();
    auto cls = build_cnn_classifier<float>();
    nn::copy_parameters(*cnn().graph, cls);
    auto enc = build_encoder<float>();
    auto dec = build_decoder<float>();
    Rng init(derive_seed(kSeed, "acceptance/" + tag));
    enc.initialize(init);
    dec.initialize(init);
    Converter c;
    c.classifier_before = snapshot(cls);
    c.trainer = std::make_unique<ConverterTrainer>(std::move(enc), std::move(dec), std::move(cls));
    for (const auto& [phase, epochs] : phases) {
      ConverterConfig cfg;
      cfg.epochs = epochs;
      cfg.batch_size = kBatch;
      cfg.seed = kSeed;
      cfg.phase = phase;
      cfg.on_epoch = log_epochs(tag);
      const auto log = train_converter(*c.trainer, s.train, s.test, cfg);
      c.log.insert(c.log.end(), log.begin(), log.end());
    }
    c.mse = reconstruction_mse(*c.trainer, s.test, kSeed);
    c.seconds = seconds_since(t0);
    note(fmt("%s: held-out reconstruction MSE %.5f, %.0f s", tag.c_str(), c.mse, c.seconds));
    return c;
  }
  const Converter& joint() {
    if (!joint_) joint_ = train_converter_phases({{ConverterPhase::kJoint, kJointEpochs}}, "joint");
    return *joint_;
  }
  const Converter& separate() {
    if (!separate_) {
      separate_ = train_converter_phases({{ConverterPhase::kEncoderOnly, kEncoderOnlyEpochs},
                                          {ConverterPhase::kDecoderOnly, kDecoderOnlyEpochs}},
                                         "separate");
    }
    return *separate_;
  }

 private:
  fs::path work_;
  std::optional<corpus::Manifest> manifest_;
  std::string summary_;
  std::optional<Spectra> spectra_;
  std::optional<Cnn> cnn_;
  std::optional<Tdnn> tdnn_;
  std::optional<Converter> joint_, separate_;
};

// Test-split rows of a converter log, in order.
std::vector<EpochMetrics> test_rows(const MetricsLog& log) {
  std::vector<EpochMetrics> out;
  for (const auto& m : log) {
    if (m.split == "test") out.push_back(m);
  }
  return out;
}

// ------------------------------------------------------------------ criteria

Outcome architecture(Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> problems;
  auto cnn = build_cnn_classifier<float>();
  for (auto msg : {reference::compare(cnn, reference::kCnn),
                   reference::compare(build_encoder<float>(), reference::kEncoder),
                   reference::compare(build_decoder<float>(), reference::kDecoder)}) {
    if (!msg.empty()) problems.push_back(msg);
  }
  if (cnn.param_count() != reference::kCnnTotal) problems.push_back("cnn total parameter count");
  auto tdnn = build_tdnn_classifier<float>();
  if (auto msg = reference::compare_tdnn(tdnn); !msg.empty()) problems.push_back(msg);
  const double secs = seconds_since(t0);
  if (secs >= 1.0) problems.push_back(fmt("took %.2f s", secs));
  if (!problems.empty()) return {false, problems.front()};
  return {true, fmt("cnn, tdnn, encoder and decoder summaries match exactly (%.3f s)", secs)};
}

Outcome gradients(Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  std::string worst_case;
  const auto cases = grad_cases::all_cases();
  for (const auto& c : cases) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const double e = grad_cases::run_case(c, seed);
      if (e > worst) {
        worst = e;
        worst_case = c.name;
      }
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = worst <= 1e-4 && secs < 120.0;
  return {ok, fmt("%zu graphs x 50 seeds, max relative error %.2e (%s), %.1f s", cases.size(),
                  worst, worst_case.c_str(), secs)};
}

Outcome recognition(Context& ctx) {
  const bool thousand = ctx.synth_summary().find("1000 utterances") != std::string::npos;
  const auto& c = ctx.cnn();
  const auto& t = ctx.tdnn();
  const double minutes = (c.seconds + t.seconds) / 60.0;
  const bool ok = thousand && c.test_accuracy >= 0.90 && t.test_accuracy >= 0.80 && minutes <= 45.0;
  return {ok, fmt("cnn %.1f%% after %d epochs, tdnn %.1f%% after %d+%d epochs, %.1f min%s",
                  100 * c.test_accuracy, kCnnEpochs, 100 * t.test_accuracy, kTdnnPretrainEpochs,
                  kTdnnTransferEpochs, minutes, thousand ? "" : ", corpus is not 1000 utterances")};
}

Outcome freeze(Context& ctx) {
  const auto& j = ctx.joint();
  const auto after = snapshot(j.trainer->classifier());
  std::size_t cls_bad = 0;
  for (std::size_t i = 0; i < after.size(); ++i) cls_bad += !bit_identical(after[i], j.classifier_before[i]);

  const auto& r = *ctx.tdnn().result;
  std::size_t k = 0, trunk_bad = 0;
  for (std::size_t i = 0; i < kTdnnTrunkLayers; ++i) {
    for (const auto* p : std::as_const(r.graph).layer(i).parameters()) {
      trunk_bad += !bit_identical(p->value, r.pretrained_values.at(k++));
    }
  }
  const bool ok = cls_bad == 0 && trunk_bad == 0 && k == r.pretrained_values.size();
  return {ok, fmt("converter classifier: %zu of %zu tensors changed; tdnn trunk: %zu of %zu changed",
                  cls_bad, after.size(), trunk_bad, k)};
}

Outcome converter(Context& ctx) {
  const auto& j = ctx.joint();
  const auto rows = test_rows(j.log);
  const auto& first = rows.front();
  const auto& last = rows.back();
  const double drop = 1.0 - last.loss_total / first.loss_total;
  const double gap = std::abs(last.loss_cls - kLn5);
  const bool a = drop >= 0.5, b = gap <= 0.15, c = j.mse <= 0.01, time = j.seconds <= 1800;
  return {a && b && c && time,
          fmt("(a) total %.3f -> %.3f, drop %.0f%% %s; (b) cls %.4f, |cls - ln 5| %.3f %s; "
              "(c) MSE %.5f %s; %.1f min",
              first.loss_total, last.loss_total, 100 * drop, a ? "ok" : "FAIL", last.loss_cls, gap,
              b ? "ok" : "FAIL", j.mse, c ? "ok" : "FAIL", j.seconds / 60)};
}

// MSE of predicting every test crop by the mean training crop.
double mean_crop_mse(const LabeledSet& train, const LabeledSet& test) {
  Rng rng(kSeed);
  audio::FeatureMatrix mean(256, 129);
  for (const auto& f : train.features) {
    const auto c = audio::trim_or_pad(f, rng);
    for (std::size_t i = 0; i < c.values.size(); ++i) mean.values[i] += c.values[i] / train.size();
  }
  double sum = 0;
  for (const auto& f : test.features) {
    const auto c = audio::trim_or_pad(f, rng);
    for (std::size_t i = 0; i < c.values.size(); ++i) sum += std::pow(c.values[i] - mean.values[i], 2);
  }
  return sum / (static_cast<double>(test.size()) * mean.values.size());
}

Outcome anti_pattern(Context& ctx) {
  const auto& s = ctx.separate();
  const auto& j = ctx.joint();
  // Rows 0..E belong to the encoder-only phase.
  const double cls = test_rows(s.log).at(kEncoderOnlyEpochs).loss_cls;
  const double gap = std::abs(cls - kLn5);
  const double ratio = s.mse / j.mse;
  const double baseline = mean_crop_mse(ctx.spectra().train, ctx.spectra().test);
  const bool a = gap <= 0.05, b = ratio >= 3.0;
  return {a && b, fmt("encoder-only cls %.4f, |cls - ln 5| %.3f %s; decoder-after MSE %.5f vs "
                      "joint %.5f, ratio %.2f (need >= 3) %s; mean-crop baseline MSE %.5f",
                      cls, gap, a ? "ok" : "FAIL", s.mse, j.mse, ratio, b ? "ok" : "FAIL",
                      baseline)};
}

Outcome dsp(Context&) {
  Rng rng(kSeed);
  auto random_positive = [&](int rows, double lo, double hi) {
    audio::FeatureMatrix m(rows, 129);
    for (auto& v : m.values) v = std::exp(rng.uniform(std::log(lo), std::log(hi)));
    return m;
  };
  std::vector<audio::FeatureMatrix> fit;
  for (int i = 0; i < 4; ++i) fit.push_back(random_positive(20, 1e-4, 50.0));
  const auto state = audio::fit_transform_state(fit);
  double rt = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto x = random_positive(3, 1e-3, 30.0);
    const auto back = audio::destandardize_exp(audio::log_standardize(x, state), state);
    for (std::size_t i = 0; i < x.values.size(); ++i) {
      rt = std::max(rt, std::abs(back.values[i] - x.values[i]) / x.values[i]);
    }
  }

  audio::FeatureMatrix mag(60, 129);
  for (auto& v : mag.values) v = rng.uniform(0.0, 1.0);
  const auto trace = audio::griffin_lim_with_trace(mag, 40).consistency_error;
  int increases = 0;
  for (std::size_t i = 1; i < trace.size(); ++i) increases += trace[i] > trace[i - 1];

  audio::Signal tone;
  for (int i = 0; i < 16000; ++i) {
    tone.samples.push_back(static_cast<float>(0.5 * std::sin(2 * std::numbers::pi * 1000.0 * i / 16000)));
  }
  const auto tone_mag = audio::stft_magnitude(tone);
  const double sine_err =
      audio::relative_spectral_error(audio::stft_magnitude(audio::griffin_lim(tone_mag, 60)), tone_mag);

  int trim_bad = 0;
  for (int t : {1, 255, 256, 257, 1000}) {
    audio::FeatureMatrix in(t, 129);
    for (int r = 0; r < t; ++r) {
      for (int c = 0; c < 129; ++c) in.at(r, c) = r + 1 + c * 1e-3;
    }
    Rng a(42), b(42);
    const auto out = audio::trim_or_pad(in, a);
    if (out.rows != 256 || out.cols != 129 || !(out == audio::trim_or_pad(in, b))) {
      ++trim_bad;
      continue;
    }
    const int start = t > 256 ? static_cast<int>(out.at(0, 0)) - 1 : 0;
    if (start < 0 || start > std::max(0, t - 256)) ++trim_bad;
    bool rows_ok = true;
    for (int r = 0; r < 256; ++r) {
      for (int c = 0; c < 129; ++c) {
        const double want = start + r < t ? in.at(start + r, c) : 0.0;
        rows_ok = rows_ok && out.at(r, c) == want;
      }
    }
    trim_bad += !rows_ok;
  }
  const bool ok = rt <= 1e-6 && increases == 0 && sine_err <= 0.1 && trim_bad == 0;
  return {ok, fmt("round-trip %.1e; GL increases %d/39; sine error %.4f; trim_or_pad failures %d/5",
                  rt, increases, sine_err, trim_bad)};
}

Outcome metrics(Context&) {
  Rng rng(2024);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < 50; ++i) {
      const int label = i < 2 ? i : static_cast<int>(rng.uniform_int(0, 1));
      y.push_back(label);
      s.push_back(std::round((rng.normal() + 0.8 * label) * 8) / 8);
    }
    const eval::ScoreSet set{s, y};
    mismatches += eval::eer(set) != oracle::eer(s, y);
    for (double p : {0.01, 0.1, 0.5}) mismatches += eval::min_dcf(set, p) != oracle::min_dcf(s, y, p);
  }
  // Fixture: class 0 P=1 R=1/2 F1=2/3; class 1 P=2/3 R=1 F1=4/5.
  const std::vector<int> t{0, 0, 1, 1}, p{0, 1, 1, 1};
  const auto r = eval::classification_report(t, p, 2);
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
  const bool fixture = near(r.accuracy, 0.75) && near(r.precision[0], 1.0) && near(r.recall[0], 0.5) &&
                       near(r.precision[1], 2.0 / 3) && near(r.recall[1], 1.0) &&
                       near(r.f1[0], 2.0 / 3) && near(r.f1[1], 0.8) &&
                       near(r.macro_f1, (2.0 / 3 + 0.8) / 2);
  const std::vector<int> perfect{0, 1, 2, 3, 4, 4, 3, 2, 1, 0};
  const auto rp = eval::classification_report(perfect, perfect, 5);
  const bool ok = mismatches == 0 && fixture && rp.accuracy == 1.0 && rp.macro_f1 == 1.0;
  return {ok, fmt("%d of 400 EER/minDCF values differ from the brute-force sweep; report fixtures %s",
                  mismatches, fixture ? "match" : "differ")};
}

// Runs the same CLI command twice and compares every emitted file.
struct Twice {
  fs::path a, b;
  int mismatched = 0, files = 0;
  std::string error;
};

Twice run_twice(const std::vector<std::string>& args) {
  Twice t;
  for (int k = 0; k < 2; ++k) {
    std::ostringstream out, err;
    std::vector<std::string> full{"accentlab"};
    full.insert(full.end(), args.begin(), args.end());
    if (cli::run(full, out, err) != 0) {
      t.error = err.str();
      return t;
    }
    const auto text = out.str();
    const std::string key = "run directory: ";
    const auto p = text.find(key);
    const fs::path dir = text.substr(p + key.size(), text.find('\n', p) - p - key.size());
    (k == 0 ? t.a : t.b) = dir;
  }
  for (const auto& e : fs::recursive_directory_iterator(t.a)) {
    if (!e.is_regular_file()) continue;
    ++t.files;
    const auto rel = fs::relative(e.path(), t.a);
    t.mismatched += !fs::exists(t.b / rel) || slurp(e.path()) != slurp(t.b / rel);
  }
  return t;
}

Outcome reproducibility(Context& ctx) {
  const auto base = ctx.work() / "repro";
  fs::remove_all(base);
  const auto b = [&](const char* sub) { return (base / sub).string(); };
  std::vector<std::string> lines;
  int mismatched = 0, files = 0;
  auto step = [&](const std::string& name, const std::vector<std::string>& args) -> fs::path {
    const auto t = run_twice(args);
    if (!t.error.empty()) throw std::runtime_error(name + " failed: " + t.error);
    mismatched += t.mismatched;
    files += t.files;
    if (t.mismatched) lines.push_back(name);
    return t.a;
  };
  const std::string seed = "5";
  const auto corpus = step("synth-data", {"synth-data", "--out", b("corpus"), "--seed", seed,
                                          "--speakers-per-class", "2", "--utts-per-speaker", "3",
                                          "--test-fraction", "0.5", "--min-duration", "1.0",
                                          "--max-duration", "1.5"});
  const auto manifest = (corpus / "manifest.csv").string();
  step("featurize", {"featurize", "--manifest", manifest, "--out", b("feat"), "--seed", seed});
  const auto cnn = step("train cnn", {"train", "--model", "cnn", "--manifest", manifest, "--out",
                                      b("cnn"), "--epochs", "2", "--batch-size", "8", "--seed", seed});
  const auto tdnn = step("train tdnn", {"train", "--model", "tdnn", "--manifest", manifest, "--out",
                                        b("tdnn"), "--epochs", "5", "--pretrain-epochs", "1",
                                        "--batch-size", "8", "--chunk-frames", "60", "--seed", seed});
  const auto conv = step("train converter",
                         {"train", "--model", "converter", "--classifier", cnn.string(), "--manifest",
                          manifest, "--out", b("conv"), "--epochs", "1", "--batch-size", "8",
                          "--seed", seed});
  const auto wav = corpus::read_manifest(manifest).records.front();
  step("convert", {"convert", "--input", (corpus / wav.path).string(), "--accent", "yue", "--model",
                   conv.string(), "--out", b("cvt"), "--gl-iterations", "8", "--seed", seed});
  step("evaluate", {"evaluate", "--model", cnn.string(), "--model", tdnn.string(), "--manifest",
                    manifest, "--out", b("eval"), "--seed", seed});
  std::string which;
  for (const auto& l : lines) which += " " + l;
  return {mismatched == 0 && files > 0,
          fmt("7 commands run twice, %d files compared, %d differ%s", files, mismatched,
              which.empty() ? "" : (":" + which).c_str())};
}

struct Criterion {
  int id;
  const char* title;
  Outcome (*run)(Context&);
};

const std::vector<Criterion> kCriteria = {
    {1, "architecture fidelity", architecture},
    {2, "gradient correctness", gradients},
    {3, "synthetic 5-class recognition", recognition},
    {4, "freeze invariance", freeze},
    {5, "converter behavior", converter},
    {6, "anti-pattern reproduction", anti_pattern},
    {7, "DSP/codec", dsp},
    {8, "metrics oracle equivalence", metrics},
    {9, "CLI reproducibility", reproducibility},
};

}  // namespace

int main(int argc, char** argv) {
  fs::path workdir = fs::temp_directory_path() / ("accentlab_acceptance_" + std::to_string(::getpid()));
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--workdir" && i + 1 < argc) {
      workdir = argv[++i];
    } else {
      selected.push_back(std::stoi(a));
    }
  }
  fs::create_directories(workdir);
  Context ctx(workdir);

  std::vector<std::string> summary;
  int failed = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& c : kCriteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    std::cout << "[criterion " << c.id << "] " << c.title << "\n" << std::flush;
    Outcome o;
    try {
      o = c.run(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    const std::string line =
        fmt("criterion %d %-30s %s  %s", c.id, (std::string(c.title) + ":").c_str(),
            o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::cout << line << "\n" << std::flush;
    summary.push_back(line);
  }
  std::cout << "\n==== acceptance summary (" << fmt("%.1f", seconds_since(t0) / 60) << " min) ====\n";
  for (const auto& l : summary) std::cout << l << "\n";
  std::cout << (failed ? std::to_string(failed) + " criteria failed\n" : "all criteria passed\n");
  return failed ? 1 : 0;
}
