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

#include "accentlab/cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "accentlab/audio/feature_file.hpp"
#include "accentlab/audio/transform.hpp"
#include "accentlab/audio/wav.hpp"
#include "accentlab/corpus/corpus.hpp"
#include "accentlab/error.hpp"
#include "accentlab/eval/metrics.hpp"
#include "accentlab/models/architectures.hpp"
#include "accentlab/models/converter.hpp"
#include "accentlab/models/training.hpp"
#include "accentlab/nn/checkpoint.hpp"

namespace accentlab::cli {

namespace fs = std::filesystem;

namespace {

// Thrown for argument problems found after parsing (exit 2).
class UsageError : public Error {
  using Error::Error;
};
// Run directory content that does not match the requested use (exit 5).
class MismatchError : public Error {
  using Error::Error;
};

constexpr const char* kModelFile = "model.txt";
constexpr const char* kTransformFile = "transform_state.txt";
constexpr const char* kNormFile = "mfcc_norm.txt";
constexpr const char* kMetricsFile = "metrics.csv";
constexpr const char* kConfigFile = "config.txt";

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed: " + p.string());
}

std::string quote(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') q += '\\';
    q += c;
  }
  return q + "\"";
}

// key=value lines for every long option of `sub`, in declaration order,
// with the resolved seed. Accepted back through --config.
std::string config_text(const CLI::App& sub, std::uint64_t seed) {
  std::ostringstream out;
  out << "# accentlab " << sub.get_name() << "\n";
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    if (name == "seed") {
      out << "seed=" << seed << "\n";
      continue;
    }
    if (opt->get_expected_min() == 0) {
      out << name << "=" << (opt->count() > 0 ? "true" : "false") << "\n";
      continue;
    }
    std::vector<std::string> vals = opt->results();
    if (vals.empty()) {
      if (opt->get_default_str().empty()) continue;
      vals = {opt->get_default_str()};
    }
    if (vals.size() == 1) {
      out << name << "=" << quote(vals[0]) << "\n";
    } else {
      out << name << "=[";
      for (std::size_t i = 0; i < vals.size(); ++i) out << (i ? "," : "") << quote(vals[i]);
      out << "]\n";
    }
  }
  return out.str();
}

std::map<std::string, std::string> read_key_values(const fs::path& p) {
  std::map<std::string, std::string> kv;
  std::istringstream in(read_text(p));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (line.empty() || line[0] == '#' || eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

std::string model_kind(const fs::path& run) {
  const auto p = run / kModelFile;
  if (!fs::exists(p)) throw MismatchError(run.string() + " holds no trained model (" + kModelFile + " missing)");
  const auto kv = read_key_values(p);
  const auto it = kv.find("kind");
  if (it == kv.end()) throw MismatchError(p.string() + " has no kind entry");
  return it->second;
}

void write_model_file(const fs::path& run, const std::string& kind) {
  write_text(run / kModelFile, "kind=" + kind + "\n");
}

nn::ModelGraph<float> graph_for(const std::string& kind) {
  if (kind == "cnn") return models::build_cnn_classifier<float>();
  if (kind == "tdnn") return models::build_tdnn_classifier<float>();
  throw MismatchError("model kind '" + kind + "' is not a classifier");
}

void load_into(const fs::path& prefix, nn::ModelGraph<float>& g) {
  if (!fs::exists(nn::index_path(prefix))) {
    throw MismatchError("checkpoint not found: " + nn::index_path(prefix).string());
  }
  nn::load_checkpoint(prefix, g);
}

std::string class_list() {
  std::string s;
  for (const auto& n : corpus::class_names()) s += (s.empty() ? "" : ", ") + n;
  return s;
}

int parse_accent(const std::string& name) {
  try {
    return static_cast<int>(corpus::class_from_name(name));
  } catch (const Error&) {
    throw UsageError("unknown accent '" + name + "'; valid names: " + class_list());
  }
}

std::size_t frozen_params(const nn::ModelGraph<float>& g, std::size_t* layers) {
  std::size_t n = 0;
  *layers = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.layer(i).frozen()) continue;
    ++*layers;
    n += g.layer(i).param_count();
  }
  return n;
}

void freeze_report(std::ostream& out, const nn::ModelGraph<float>& g) {
  std::size_t layers = 0;
  const std::size_t frozen = frozen_params(g, &layers);
  out << "freeze report (" << g.name() << "): frozen " << frozen << " parameters in " << layers
      << " layers";
  if (layers > 0) {
    out << " [";
    for (std::size_t i = 0, k = 0; i < g.size(); ++i) {
      if (g.layer(i).frozen()) out << (k++ ? " " : "") << g.layer(i).name();
    }
    out << "]";
  }
  out << "; trainable " << g.trainable_count() << " parameters\n";
}

models::EpochCallback progress(std::ostream& out) {
  return [&out](const models::EpochMetrics& m) {
    out << "epoch " << m.epoch << " " << m.split << " loss " << std::setprecision(5) << m.loss_total;
    if (m.loss_dec != 0.0) out << " (cls " << m.loss_cls << ", dec " << m.loss_dec << ")";
    out << " acc " << std::setprecision(4) << m.accuracy << "\n" << std::flush;
  };
}

std::string waveform_csv(const audio::Signal& s) {
  std::ostringstream out;
  out << "sample,time_s,value\n" << std::setprecision(9);
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << i << "," << static_cast<double>(i) / s.sample_rate << "," << s.samples[i] << "\n";
  }
  return out.str();
}

// ------------------------------------------------------------------ options

struct Common {
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string config;
};

void add_common(CLI::App* sub, Common& c, bool needs_out = true) {
  auto* o = sub->add_option("--out", c.out, "Base directory for the run directory");
  if (needs_out) o->required();
  sub->add_option("--seed", c.seed, "Random seed (falls back to $ACCENTLAB_SEED, then 0)");
  // Expanded into flags before parsing; see expand_config.
  sub->add_option("--config", c.config, "Read flags from a config.txt written by an earlier run");
}

struct Run {
  fs::path dir;
  std::uint64_t seed;
};

Run start_run(const CLI::App& sub, const Common& c, std::ostream& out) {
  Run r;
  r.seed = resolve_seed(c.seed);
  r.dir = make_run_dir(c.out, r.seed);
  write_text(r.dir / kConfigFile, config_text(sub, r.seed));
  out << "run directory: " << r.dir.string() << "\n";
  return r;
}

// ------------------------------------------------------------------ synth-data

struct SynthOpts {
  Common common;
  corpus::SynthSpec spec;
};

void cmd_synth(const CLI::App& sub, SynthOpts& o, std::ostream& out) {
  const Run run = start_run(sub, o.common, out);
  o.spec.seed = run.seed;
  o.spec.threads = o.common.threads;
  const auto m = corpus::build_manifest(o.spec, run.dir);
  std::map<std::pair<std::string, std::string>, int> counts;
  for (const auto& r : m.records) ++counts[{r.accent_class, r.split}];
  out << "class      train  test\n";
  for (const auto& name : corpus::class_names()) {
    out << std::left << std::setw(10) << name << std::right << std::setw(6)
        << counts[{name, "train"}] << std::setw(6) << counts[{name, "test"}] << "\n";
  }
  out << m.records.size() << " utterances\n";
  out << "manifest: " << (run.dir / "manifest.csv").string() << "\n";
}

// ------------------------------------------------------------------ featurize

struct FeaturizeOpts {
  Common common;
  std::string manifest;
};

void cmd_featurize(const CLI::App& sub, FeaturizeOpts& o, std::ostream& out) {
  const auto manifest = corpus::read_manifest(o.manifest);
  const Run run = start_run(sub, o.common, out);
  const fs::path dir = run.dir / "features";
  fs::create_directories(dir);
  std::vector<audio::FeatureMatrix> train_spec, train_mfcc;
  for (const auto& r : manifest.records) {
    const auto sig = audio::read_wav(manifest.resolve(r));
    auto spec = audio::stft_magnitude(sig);
    auto mf = audio::mfcc(sig);
    audio::write_features(dir / (r.utt_id + ".spec"), spec);
    audio::write_features(dir / (r.utt_id + ".mfcc"), mf);
    if (r.split == "train") {
      train_spec.push_back(std::move(spec));
      train_mfcc.push_back(std::move(mf));
    }
  }
  if (train_spec.empty()) throw DataError("manifest has no training records");
  audio::save_transform_state(run.dir / kTransformFile, audio::fit_transform_state(train_spec));
  models::save_feature_norm(run.dir / kNormFile, models::fit_feature_norm(train_mfcc));
  out << "featurized " << manifest.records.size() << " utterances (" << train_spec.size()
      << " train)\n";
}

// ------------------------------------------------------------------ train

struct TrainOpts {
  Common common;
  std::string model;
  std::string manifest;
  std::string classifier;
  std::string phase = "joint";
  int epochs = 25;
  int batch_size = 128;
  double lr = 1e-3;
  int pretrain_epochs = 10;
  double pretrain_lr = 1e-3;
  double momentum = 0.5;
  int chunk_frames = 120;
  double w_cls = 1.0;
  double w_dec = 1.0;
  bool freeze = false;
};

void train_cnn_run(const TrainOpts& o, const Run& run, const corpus::Manifest& manifest,
                   std::ostream& out) {
  using namespace models;
  const auto train_raw = load_features(manifest, "train", FeatureKind::kSpectrogram, o.common.threads);
  const auto test_raw = load_features(manifest, "test", FeatureKind::kSpectrogram, o.common.threads);
  if (train_raw.empty()) throw DataError("manifest has no training records");
  const auto state = audio::fit_transform_state(train_raw.features);
  audio::save_transform_state(run.dir / kTransformFile, state);
  auto g = build_cnn_classifier<float>();
  Rng init(derive_seed(run.seed, "cnn/init"));
  g.initialize(init);
  TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch_size;
  cfg.learning_rate = o.lr;
  cfg.seed = run.seed;
  cfg.on_epoch = progress(out);
  const auto log = train_cnn(g, transform_set(train_raw, state), transform_set(test_raw, state), cfg);
  if (o.freeze) freeze_report(out, g);
  nn::save_checkpoint(run.dir / "model", g);
  write_metrics_csv(run.dir / kMetricsFile, log);
  write_model_file(run.dir, "cnn");
}

void train_tdnn_run(const TrainOpts& o, const Run& run, const corpus::Manifest& manifest,
                    std::ostream& out) {
  using namespace models;
  const auto train_raw = load_features(manifest, "train", FeatureKind::kMfcc, o.common.threads);
  const auto test_raw = load_features(manifest, "test", FeatureKind::kMfcc, o.common.threads);
  if (train_raw.empty()) throw DataError("manifest has no training records");
  const auto norm = fit_feature_norm(train_raw.features);
  save_feature_norm(run.dir / kNormFile, norm);
  const auto train = normalize_set(train_raw, norm);
  const auto speakers = relabel_by_speaker(manifest, "train", train);
  TransferConfig cfg;
  cfg.pretrain_epochs = o.pretrain_epochs;
  cfg.pretrain_lr = o.pretrain_lr;
  cfg.transfer_epochs = o.epochs;
  cfg.transfer_lr = o.lr;
  cfg.momentum = o.momentum;
  cfg.batch_size = o.batch_size;
  cfg.chunk_frames = o.chunk_frames;
  cfg.seed = run.seed;
  cfg.on_epoch = progress(out);
  auto result = pretrain_and_transfer(speakers, train, normalize_set(test_raw, norm), cfg);
  if (o.freeze) freeze_report(out, result.graph);
  nn::save_checkpoint(run.dir / "model", result.graph);
  MetricsLog log = result.pretrain_log;
  log.insert(log.end(), result.transfer_log.begin(), result.transfer_log.end());
  write_metrics_csv(run.dir / kMetricsFile, log);
  write_model_file(run.dir, "tdnn");
}

models::ConverterPhase parse_phase(const std::string& s) {
  if (s == "joint") return models::ConverterPhase::kJoint;
  if (s == "encoder-only") return models::ConverterPhase::kEncoderOnly;
  if (s == "decoder-only") return models::ConverterPhase::kDecoderOnly;
  throw UsageError("unknown phase '" + s + "'");
}

void train_converter_run(const TrainOpts& o, const Run& run, const corpus::Manifest& manifest,
                         std::ostream& out) {
  using namespace models;
  if (o.classifier.empty()) throw UsageError("--classifier <cnn run directory> is required for the converter");
  const fs::path cls_dir = o.classifier;
  if (model_kind(cls_dir) != "cnn") throw MismatchError("--classifier must be a cnn run");
  auto cls = build_cnn_classifier<float>();
  load_into(cls_dir / "model", cls);
  const auto state = audio::load_transform_state(cls_dir / kTransformFile);
  audio::save_transform_state(run.dir / kTransformFile, state);
  const auto phase = parse_phase(o.phase);

  auto enc = build_encoder<float>();
  auto dec = build_decoder<float>();
  Rng init(derive_seed(run.seed, "converter/init"));
  enc.initialize(init);
  dec.initialize(init);
  ConverterTrainer trainer(std::move(enc), std::move(dec), std::move(cls), o.w_cls, o.w_dec);
  const auto train = transform_set(load_features(manifest, "train", FeatureKind::kSpectrogram, o.common.threads), state);
  const auto test = transform_set(load_features(manifest, "test", FeatureKind::kSpectrogram, o.common.threads), state);
  ConverterConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch_size;
  cfg.learning_rate = o.lr;
  cfg.seed = run.seed;
  cfg.phase = phase;
  cfg.on_epoch = progress(out);
  const auto log = train_converter(trainer, train, test, cfg);
  if (o.freeze) {
    freeze_report(out, trainer.classifier());
    freeze_report(out, trainer.encoder());
    freeze_report(out, trainer.decoder());
  }
  if (!test.empty()) {
    out << "held-out reconstruction MSE " << std::setprecision(6)
        << reconstruction_mse(trainer, test, derive_seed(run.seed, "converter/eval")) << "\n";
  }
  nn::save_checkpoint(run.dir / "encoder", trainer.encoder());
  nn::save_checkpoint(run.dir / "decoder", trainer.decoder());
  write_metrics_csv(run.dir / kMetricsFile, log);
  write_model_file(run.dir, "converter");
}

void cmd_train(const CLI::App& sub, TrainOpts& o, std::ostream& out) {
  const auto manifest = corpus::read_manifest(o.manifest);
  if (o.model == "converter") parse_phase(o.phase);
  const Run run = start_run(sub, o.common, out);
  if (o.model == "cnn") {
    train_cnn_run(o, run, manifest, out);
  } else if (o.model == "tdnn") {
    train_tdnn_run(o, run, manifest, out);
  } else {
    train_converter_run(o, run, manifest, out);
  }
  out << "checkpoint written to " << run.dir.string() << "\n";
}

// ------------------------------------------------------------------ convert

struct ConvertOpts {
  Common common;
  std::string input;
  std::string accent;
  std::string model;
  int gl_iterations = models::kGriffinLimIterations;
};

void cmd_convert(const CLI::App& sub, ConvertOpts& o, std::ostream& out) {
  const int target = parse_accent(o.accent);
  const fs::path dir = o.model;
  if (model_kind(dir) != "converter") throw MismatchError("--model must be a converter run");
  auto enc = models::build_encoder<float>();
  auto dec = models::build_decoder<float>();
  load_into(dir / "encoder", enc);
  load_into(dir / "decoder", dec);
  const auto state = audio::load_transform_state(dir / kTransformFile);
  const auto input = audio::read_wav(o.input);

  const Run run = start_run(sub, o.common, out);
  models::ConversionTrace trace;
  const auto output = models::convert(input, target, enc, dec, state,
                                      derive_seed(run.seed, "convert/crop"), o.gl_iterations, &trace);
  audio::write_wav(run.dir / "original.wav", input);
  audio::write_wav(run.dir / "converted.wav", output);
  audio::write_features(run.dir / "input_spectrogram.feat", trace.input_scaled);
  audio::write_features(run.dir / "output_spectrogram.feat", trace.output_scaled);
  write_text(run.dir / "input_spectrogram.pgm", encode_pgm(trace.input_scaled));
  write_text(run.dir / "output_spectrogram.pgm", encode_pgm(trace.output_scaled));
  write_text(run.dir / "input_waveform.csv", waveform_csv(input));
  write_text(run.dir / "output_waveform.csv", waveform_csv(output));
  out << "converted to " << o.accent << ": " << (run.dir / "converted.wav").string() << " ("
      << output.size() << " samples)\n";
}

// ------------------------------------------------------------------ evaluate

struct EvaluateOpts {
  Common common;
  std::vector<std::string> models;
  std::string manifest;
  std::string split = "test";
};

struct Evaluated {
  std::string label;
  eval::ClassificationReport report;
};

Evaluated evaluate_one(const fs::path& dir, const corpus::Manifest& manifest,
                       const EvaluateOpts& o, std::uint64_t seed) {
  using namespace models;
  const std::string kind = model_kind(dir);
  auto g = graph_for(kind);
  load_into(dir / "model", g);
  LabeledSet set;
  if (kind == "cnn") {
    const auto state = audio::load_transform_state(dir / kTransformFile);
    set = transform_set(load_features(manifest, o.split, FeatureKind::kSpectrogram, o.common.threads), state);
  } else {
    const auto norm = load_feature_norm(dir / kNormFile);
    set = normalize_set(load_features(manifest, o.split, FeatureKind::kMfcc, o.common.threads), norm);
  }
  if (set.empty()) throw DataError("split '" + o.split + "' is empty");
  const auto pred = argmax_rows(predict_proba(g, set, derive_seed(seed, "evaluate/crop")));
  const auto& names = corpus::class_names();
  Evaluated e;
  e.label = kind + " (" + dir.filename().string() + ")";
  e.report = eval::classification_report(set.labels, pred, kNumClasses,
                                         std::vector<std::string>(names.begin(), names.end()));
  return e;
}

void cmd_evaluate(const CLI::App& sub, EvaluateOpts& o, std::ostream& out) {
  const auto manifest = corpus::read_manifest(o.manifest);
  const std::uint64_t seed = resolve_seed(o.common.seed);
  std::vector<Evaluated> results;
  for (const auto& m : o.models) results.push_back(evaluate_one(m, manifest, o, seed));

  const Run run = start_run(sub, o.common, out);
  out << std::fixed << std::setprecision(4);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    out << r.label << ": accuracy " << r.report.accuracy << " macro-F1 " << r.report.macro_f1 << "\n";
    const std::string stem = "confusion_" + std::to_string(i + 1);
    eval::write_confusion_csvs(run.dir / (stem + ".csv"), run.dir / (stem + "_normalized.csv"),
                               r.report.confusion);
  }
  if (results.size() < 2) return;

  const auto& names = corpus::class_names();
  auto best_worst = [&](const eval::ClassificationReport& r) {
    const auto best = std::max_element(r.recall.begin(), r.recall.end()) - r.recall.begin();
    const auto worst = std::min_element(r.recall.begin(), r.recall.end()) - r.recall.begin();
    return std::pair{names[best], names[worst]};
  };
  std::size_t widest = 18;
  for (const auto& r : results) widest = std::max(widest, r.label.size());
  const int kw = static_cast<int>(widest) + 2;
  out << "\n" << std::left << std::setw(kw) << "";
  for (const auto& r : results) out << std::setw(kw) << r.label;
  out << "\n" << std::setw(kw) << "accuracy";
  for (const auto& r : results) out << std::setw(kw) << r.report.accuracy;
  out << "\n" << std::setw(kw) << "macro-F1";
  for (const auto& r : results) out << std::setw(kw) << r.report.macro_f1;
  for (int c = 0; c < models::kNumClasses; ++c) {
    out << "\n" << std::setw(kw) << ("recall " + names[c]);
    for (const auto& r : results) out << std::setw(kw) << r.report.recall[c];
  }
  out << "\n" << std::setw(kw) << "best classified";
  for (const auto& r : results) out << std::setw(kw) << best_worst(r.report).first;
  out << "\n" << std::setw(kw) << "worst classified";
  for (const auto& r : results) out << std::setw(kw) << best_worst(r.report).second;
  out << std::right << "\n";
}

std::string unquote(std::string v) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"') return v;
  std::string s;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] == '\\' && i + 2 < v.size()) ++i;
    s += v[i];
  }
  return s;
}

// Splits `[a,b]` lists; plain values come back as one element.
std::vector<std::string> config_values(const std::string& raw) {
  if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']') return {unquote(raw)};
  std::vector<std::string> out;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
    const char ch = raw[i];
    if (ch == '"' && (i == 1 || raw[i - 1] != '\\')) in_quotes = !in_quotes;
    if (ch == ',' && !in_quotes) {
      out.push_back(unquote(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(unquote(cur));
  return out;
}

// Replaces `--config <file>` with the flags stored in that file. Flags given
// explicitly on the command line take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (path.empty()) return args;
  auto given = [&](const std::string& key) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == "--" + key || a.rfind("--" + key + "=", 0) == 0;
    });
  };
  std::vector<std::string> extra;
  for (const auto& [key, raw] : read_key_values(path)) {
    if (given(key)) continue;
    const std::string plain = unquote(raw);
    if (plain == "true" || plain == "false") {
      if (plain == "true") extra.push_back("--" + key);
      continue;
    }
    for (const auto& v : config_values(raw)) {
      extra.push_back("--" + key);
      extra.push_back(v);
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

int report(std::ostream& err, int code, const std::string& what) {
  err << "error: " << what << "\n";
  return code;
}

}  // namespace

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  const char* env = std::getenv("ACCENTLAB_SEED");
  if (!env || !*env) return 0;
  std::size_t used = 0;
  const std::string s(env);
  const auto v = std::stoull(s, &used);
  if (used != s.size()) throw std::invalid_argument("ACCENTLAB_SEED is not an integer: " + s);
  return v;
}

fs::path make_run_dir(const fs::path& base, std::uint64_t seed) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream name;
  name << std::put_time(&tm, "%Y%m%d-%H%M%S") << "-seed" << seed;
  fs::create_directories(base);
  fs::path dir = base / name.str();
  for (int k = 2; !fs::create_directory(dir); ++k) dir = base / (name.str() + "-" + std::to_string(k));
  return dir;
}

std::string encode_pgm(const audio::FeatureMatrix& m) {
  std::ostringstream out;
  out << "P5\n" << m.cols << " " << m.rows << "\n255\n";
  double lo = 0, hi = 0;
  if (!m.values.empty()) {
    const auto [a, b] = std::minmax_element(m.values.begin(), m.values.end());
    lo = *a;
    hi = *b;
  }
  const double span = hi > lo ? hi - lo : 1.0;
  std::string pixels(m.values.size(), '\0');
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    pixels[i] = static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * (m.values[i] - lo) / span)));
  }
  out << pixels;
  return out.str();
}

std::pair<int, int> pgm_dimensions(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || !in || maxval != 255) throw FormatError("not a P5 image");
  in.get();
  if (bytes.size() - static_cast<std::size_t>(in.tellg()) != static_cast<std::size_t>(w) * h) {
    throw FormatError("P5 pixel data has the wrong size");
  }
  return {w, h};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Accent classification and conversion toolkit", "accentlab"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  SynthOpts synth;
  auto* s = app.add_subcommand("synth-data", "Generate a synthetic five-accent corpus");
  add_common(s, synth.common);
  s->add_option("--speakers-per-class", synth.spec.speakers_per_class)->check(CLI::PositiveNumber);
  s->add_option("--utts-per-speaker", synth.spec.utts_per_speaker)->check(CLI::PositiveNumber);
  s->add_option("--min-duration", synth.spec.min_duration_s, "Seconds")->check(CLI::PositiveNumber);
  s->add_option("--max-duration", synth.spec.max_duration_s, "Seconds")->check(CLI::PositiveNumber);
  s->add_option("--test-fraction", synth.spec.test_fraction)->check(CLI::Range(0.0, 1.0));
  s->add_option("--threads", synth.common.threads)->check(CLI::PositiveNumber);

  FeaturizeOpts feat;
  auto* f = app.add_subcommand("featurize", "Extract spectrogram and MFCC feature files");
  add_common(f, feat.common);
  f->add_option("--manifest", feat.manifest)->required();

  TrainOpts tr;
  auto* t = app.add_subcommand("train", "Train a classifier or the accent converter");
  add_common(t, tr.common);
  t->add_option("--model", tr.model, "tdnn | cnn | converter")
      ->required()
      ->check(CLI::IsMember({"tdnn", "cnn", "converter"}));
  t->add_option("--manifest", tr.manifest)->required();
  t->add_option("--epochs", tr.epochs, "Epochs (tdnn: transfer-phase epochs)")->check(CLI::NonNegativeNumber);
  t->add_option("--batch-size", tr.batch_size)->check(CLI::PositiveNumber);
  t->add_option("--lr", tr.lr, "Learning rate (tdnn: transfer phase)")->check(CLI::PositiveNumber);
  t->add_option("--pretrain-epochs", tr.pretrain_epochs)->check(CLI::NonNegativeNumber);
  t->add_option("--pretrain-lr", tr.pretrain_lr)->check(CLI::PositiveNumber);
  t->add_option("--momentum", tr.momentum)->check(CLI::Range(0.0, 1.0));
  t->add_option("--chunk-frames", tr.chunk_frames)->check(CLI::Range(15, 1000000));
  t->add_option("--classifier", tr.classifier, "Run directory of a trained cnn (converter only)");
  t->add_option("--phase", tr.phase, "joint | encoder-only | decoder-only (converter only)");
  t->add_option("--w-cls", tr.w_cls)->check(CLI::NonNegativeNumber);
  t->add_option("--w-dec", tr.w_dec)->check(CLI::NonNegativeNumber);
  t->add_option("--threads", tr.common.threads)->check(CLI::PositiveNumber);
  t->add_flag("--freeze-report", tr.freeze, "Print frozen vs trainable parameter counts");

  ConvertOpts cv;
  auto* c = app.add_subcommand("convert", "Convert an utterance to a target accent");
  add_common(c, cv.common);
  c->add_option("--input", cv.input, "16 kHz mono WAV")->required();
  c->add_option("--accent", cv.accent, "Target accent: " + class_list())->required();
  c->add_option("--model", cv.model, "Run directory of a trained converter")->required();
  c->add_option("--gl-iterations", cv.gl_iterations)->check(CLI::PositiveNumber);

  EvaluateOpts ev;
  auto* e = app.add_subcommand("evaluate", "Score one or two classifiers on a manifest split");
  add_common(e, ev.common);
  e->add_option("--model", ev.models, "Classifier run directory (give two to compare)")
      ->required()
      ->expected(1, 2);
  e->add_option("--manifest", ev.manifest)->required();
  e->add_option("--split", ev.split)->check(CLI::IsMember({"train", "test"}));
  e->add_option("--threads", ev.common.threads)->check(CLI::PositiveNumber);

  try {
    const auto expanded = expand_config(args);
    std::vector<std::string> rev(expanded.rbegin(), expanded.rend() - (expanded.empty() ? 0 : 1));
    app.parse(rev);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex, out, err);
    return kExitUsage;
  } catch (const IoError& ex) {
    return report(err, kExitIo, ex.what());
  }

  try {
    if (s->parsed()) cmd_synth(*s, synth, out);
    if (f->parsed()) cmd_featurize(*f, feat, out);
    if (t->parsed()) cmd_train(*t, tr, out);
    if (c->parsed()) cmd_convert(*c, cv, out);
    if (e->parsed()) cmd_evaluate(*e, ev, out);
  } catch (const UsageError& ex) {
    return report(err, kExitUsage, ex.what());
  } catch (const std::invalid_argument& ex) {
    return report(err, kExitUsage, ex.what());
  } catch (const NumericError& ex) {
    return report(err, kExitNumeric, ex.what());
  } catch (const MismatchError& ex) {
    return report(err, kExitMismatch, ex.what());
  } catch (const CheckpointError& ex) {
    return report(err, kExitMismatch, std::string("checkpoint does not match the architecture: ") + ex.what());
  } catch (const WiringError& ex) {
    return report(err, kExitMismatch, ex.what());
  } catch (const IoError& ex) {
    return report(err, kExitIo, ex.what());
  } catch (const FormatError& ex) {
    return report(err, kExitIo, ex.what());
  } catch (const UnsupportedFormatError& ex) {
    return report(err, kExitIo, ex.what());
  } catch (const DataError& ex) {
    return report(err, kExitIo, ex.what());
  } catch (const fs::filesystem_error& ex) {
    return report(err, kExitIo, ex.what());
  } catch (const std::exception& ex) {
    return report(err, kExitFailure, ex.what());
  }
  return kExitOk;
}

}  // namespace accentlab::cli
