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

#include "accentlab/models/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "accentlab/audio/wav.hpp"
#include "accentlab/error.hpp"
#include "accentlab/nn/losses.hpp"
#include "accentlab/nn/optimizer.hpp"

namespace accentlab::models {

using nn::Tensor;

int distinct_labels(const LabeledSet& set) {
  return static_cast<int>(std::set<int>(set.labels.begin(), set.labels.end()).size());
}

// ------------------------------------------------------------------ features

FeatureNorm fit_feature_norm(std::span<const audio::FeatureMatrix> set) {
  if (set.empty()) throw DataError("cannot fit a normalization on an empty set");
  const int cols = set.front().cols;
  std::vector<double> sum(cols, 0.0), sq(cols, 0.0);
  double n = 0;
  for (const auto& m : set) {
    if (m.cols != cols) throw ShapeError("feature column count differs across the set");
    for (int r = 0; r < m.rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        sum[c] += m.at(r, c);
        sq[c] += m.at(r, c) * m.at(r, c);
      }
    }
    n += m.rows;
  }
  if (n < 2) throw DataError("normalization needs at least two frames");
  FeatureNorm norm;
  for (int c = 0; c < cols; ++c) {
    const double mu = sum[c] / n;
    norm.mean.push_back(mu);
    norm.std.push_back(std::sqrt(std::max(sq[c] / n - mu * mu, 0.0)) + 1e-8);
  }
  return norm;
}

audio::FeatureMatrix apply_feature_norm(const audio::FeatureMatrix& m, const FeatureNorm& norm) {
  if (static_cast<std::size_t>(m.cols) != norm.mean.size()) {
    throw ShapeError("normalization expects " + std::to_string(norm.mean.size()) +
                     " columns, got " + std::to_string(m.cols));
  }
  audio::FeatureMatrix out = m;
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) out.at(r, c) = (m.at(r, c) - norm.mean[c]) / norm.std[c];
  }
  return out;
}

void save_feature_norm(const std::filesystem::path& path, const FeatureNorm& norm) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "mean";
  for (double v : norm.mean) out << ' ' << v;
  out << "\nstd";
  for (double v : norm.std) out << ' ' << v;
  out << "\n";
  if (!out) throw IoError("short write to " + path.string());
}

FeatureNorm load_feature_norm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  FeatureNorm norm;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    auto* dst = key == "mean" ? &norm.mean : key == "std" ? &norm.std : nullptr;
    if (!dst) {
      if (key.empty()) continue;
      throw FormatError("unknown key '" + key + "' in " + path.string());
    }
    double v;
    while (ls >> v) dst->push_back(v);
  }
  if (norm.mean.empty() || norm.mean.size() != norm.std.size()) {
    throw FormatError("incomplete normalization file " + path.string());
  }
  return norm;
}

LabeledSet load_features(const corpus::Manifest& manifest, std::string_view split,
                         FeatureKind kind, int threads) {
  const auto records = manifest.split(split);
  LabeledSet set;
  set.features.resize(records.size());
  set.labels.resize(records.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < records.size(); i += stride) {
      const auto sig = audio::read_wav(manifest.resolve(records[i]));
      set.features[i] = kind == FeatureKind::kMfcc ? audio::mfcc(sig) : audio::stft_magnitude(sig);
      set.labels[i] = static_cast<int>(corpus::class_from_name(records[i].accent_class));
    }
  };
  const auto n_threads = static_cast<std::size_t>(std::max(1, threads));
  if (n_threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex mu;
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          work(t, n_threads);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  return set;
}

LabeledSet relabel_by_speaker(const corpus::Manifest& manifest, std::string_view split,
                              const LabeledSet& set, std::vector<std::string>* speakers) {
  const auto records = manifest.split(split);
  if (records.size() != set.size()) throw DataError("feature set does not match the manifest split");
  std::map<std::string, int> ids;
  std::vector<std::string> order;
  LabeledSet out;
  out.features = set.features;
  for (const auto& r : records) {
    auto [it, fresh] = ids.emplace(r.speaker, static_cast<int>(order.size()));
    if (fresh) order.push_back(r.speaker);
    out.labels.push_back(it->second);
  }
  if (speakers) *speakers = std::move(order);
  return out;
}

LabeledSet transform_set(const LabeledSet& set, const audio::TransformState& state) {
  LabeledSet out;
  out.labels = set.labels;
  for (const auto& f : set.features) out.features.push_back(audio::log_standardize(f, state));
  return out;
}

LabeledSet normalize_set(const LabeledSet& set, const FeatureNorm& norm) {
  LabeledSet out;
  out.labels = set.labels;
  for (const auto& f : set.features) out.features.push_back(apply_feature_norm(f, norm));
  return out;
}

// ------------------------------------------------------------------ batching

namespace {

void copy_rows(const audio::FeatureMatrix& m, int first_row, int rows, float* dst) {
  const double* src = m.values.data() + static_cast<std::size_t>(first_row) * m.cols;
  const std::size_t n = static_cast<std::size_t>(rows) * m.cols;
  for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<float>(src[i]);
}

Tensor<float> stack_vectors(const LabeledSet& set, std::span<const std::size_t> idx) {
  const int dim = set.features.at(idx[0]).cols;
  Tensor<float> out({static_cast<int>(idx.size()), dim});
  for (std::size_t b = 0; b < idx.size(); ++b) copy_rows(set.features[idx[b]], 0, 1, out.ptr() + b * dim);
  return out;
}

}  // namespace

Tensor<float> stack_batch(const LabeledSet& set, std::span<const std::size_t> indices, Rng& rng,
                          int frames) {
  if (indices.empty()) throw DataError("empty batch");
  const int cols = set.features.at(indices[0]).cols;
  Tensor<float> out({static_cast<int>(indices.size()), frames, cols});
  const std::size_t per = static_cast<std::size_t>(frames) * cols;
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const auto& f = set.features.at(indices[b]);
    if (f.cols != cols) throw ShapeError("batch items differ in column count");
    const auto fixed = audio::trim_or_pad(f, rng, frames);
    copy_rows(fixed, 0, frames, out.ptr() + b * per);
  }
  return out;
}

Tensor<float> stack_chunks(const LabeledSet& set, std::span<const std::size_t> indices, Rng& rng,
                           int chunk) {
  if (indices.empty()) throw DataError("empty batch");
  int len = chunk;
  for (auto i : indices) len = std::min(len, set.features.at(i).rows);
  if (len < 1) throw DataError("batch contains an empty feature matrix");
  const int cols = set.features.at(indices[0]).cols;
  Tensor<float> out({static_cast<int>(indices.size()), len, cols});
  const std::size_t per = static_cast<std::size_t>(len) * cols;
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const auto& f = set.features[indices[b]];
    if (f.cols != cols) throw ShapeError("batch items differ in column count");
    const int start = static_cast<int>(rng.uniform_int(0, f.rows - len));
    copy_rows(f, start, len, out.ptr() + b * per);
  }
  return out;
}

std::string describe_items(std::span<const std::size_t> items) {
  std::string s = "items";
  for (std::size_t i = 0; i < items.size(); ++i) s += (i ? ", " : " ") + std::to_string(items[i]);
  return s;
}

Tensor<float> one_hot(std::span<const int> labels, int n_classes) {
  Tensor<float> out({static_cast<int>(labels.size()), n_classes});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= n_classes) {
      throw LabelError("label " + std::to_string(labels[i]) + " outside [0, " +
                       std::to_string(n_classes) + ")");
    }
    out[i * n_classes + labels[i]] = 1.0f;
  }
  return out;
}

Tensor<float> uniform_target(int batch, int n_classes) {
  return Tensor<float>({batch, n_classes}, 1.0f / static_cast<float>(n_classes));
}

void calibrate_batchnorm(nn::ModelGraph<float>& graph, const LabeledSet& set, int batch_size,
                         std::uint64_t seed,
                         const std::function<Tensor<float>(const Tensor<float>&)>& transform,
                         int label_classes) {
  if (set.empty()) return;
  Rng rng(seed);
  std::vector<std::size_t> order(set.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, i - 1))]);
  }
  order.resize(std::min(order.size(), kCalibrationItems));
  const std::size_t bs = static_cast<std::size_t>(std::max(1, batch_size));
  const std::size_t n_batches = (order.size() + bs - 1) / bs;
  const int frames = graph.input_shape().at(0);
  nn::recompute_batchnorm_stats<float>(
      graph, n_batches,
      [&](std::size_t b, Tensor<float>& label) {
        const std::span<const std::size_t> idx(order.data() + b * bs,
                                               std::min(bs, order.size() - b * bs));
        if (label_classes > 0) {
          std::vector<int> labels;
          for (auto i : idx) labels.push_back(set.labels[i]);
          label = one_hot(labels, label_classes);
        }
        auto x = stack_batch(set, idx, rng, frames);
        return transform ? transform(x) : x;
      },
      rng);
}

// ------------------------------------------------------------------ metrics log

std::string metrics_csv(const MetricsLog& log) {
  std::string out = std::string(kMetricsHeader) + "\n";
  char buf[256];
  for (const auto& m : log) {
    std::snprintf(buf, sizeof buf, "%d,%s,%.8g,%.8g,%.8g,%.6f\n", m.epoch, m.split.c_str(),
                  m.loss_total, m.loss_cls, m.loss_dec, m.accuracy);
    out += buf;
  }
  return out;
}

void write_metrics_csv(const std::filesystem::path& path, const MetricsLog& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << metrics_csv(log);
  if (!out) throw IoError("short write to " + path.string());
}

// ------------------------------------------------------------------ classifiers

namespace {

std::vector<std::size_t> shuffled(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.uniform_int(0, i - 1))]);
  }
  return idx;
}

void check_finite(double loss, int epoch, std::size_t batch, std::span<const std::size_t> items) {
  if (std::isfinite(loss)) return;
  throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                     std::to_string(batch) + " (" + describe_items(items) + ")");
}

int row_argmax(const float* row, int n) {
  return static_cast<int>(std::max_element(row, row + n) - row);
}

int correct_count(const Tensor<float>& out, std::span<const int> labels) {
  const int n = out.dim(1);
  int hits = 0;
  for (std::size_t b = 0; b < labels.size(); ++b) hits += row_argmax(out.ptr() + b * n, n) == labels[b];
  return hits;
}

std::vector<int> gather(std::span<const int> labels, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(labels[i]);
  return out;
}

/// Log-probability outputs are never positive; probability rows are.
bool is_log_output(const Tensor<float>& out) {
  return *std::max_element(out.data.begin(), out.data.end()) <= 0.0f;
}

EpochMetrics eval_row(const nn::ModelGraph<float>& graph, const LabeledSet& set, int epoch,
                      std::uint64_t seed) {
  const auto probs = predict_proba(graph, set, seed);
  EpochMetrics m{epoch, "test", 0, 0, 0, 0};
  int hits = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double p = std::clamp(probs[i][set.labels[i]], nn::kProbClamp, 1.0 - nn::kProbClamp);
    m.loss_cls -= std::log(p);
    hits += argmax_rows({probs[i]})[0] == set.labels[i];
  }
  m.loss_cls /= static_cast<double>(set.size());
  m.loss_total = m.loss_cls;
  m.accuracy = static_cast<double>(hits) / static_cast<double>(set.size());
  return m;
}

void emit(MetricsLog& log, EpochMetrics m, const EpochCallback& cb) {
  if (cb) cb(m);
  log.push_back(std::move(m));
}

}  // namespace

std::vector<std::vector<double>> predict_proba(const nn::ModelGraph<float>& graph,
                                               const LabeledSet& set, std::uint64_t crop_seed) {
  std::vector<std::vector<double>> out;
  out.reserve(set.size());
  const auto& in_shape = graph.input_shape();
  const int frames = in_shape.at(0);
  auto take = [&](const Tensor<float>& y) {
    const bool logs = is_log_output(y);
    const int n = y.dim(1);
    for (int b = 0; b < y.dim(0); ++b) {
      std::vector<double> row(n);
      for (int j = 0; j < n; ++j) {
        const double v = y[static_cast<std::size_t>(b) * n + j];
        row[j] = logs ? std::exp(v) : v;
      }
      out.push_back(std::move(row));
    }
  };
  if (frames == nn::kAnyLength) {
    for (const auto& f : set.features) {
      Tensor<float> x({1, f.rows, f.cols});
      copy_rows(f, 0, f.rows, x.ptr());
      take(graph.predict(x));
    }
    return out;
  }
  Rng rng(crop_seed);
  constexpr std::size_t kChunk = 64;
  for (std::size_t first = 0; first < set.size(); first += kChunk) {
    std::vector<std::size_t> idx(std::min(kChunk, set.size() - first));
    std::iota(idx.begin(), idx.end(), first);
    take(graph.predict(in_shape.size() == 1 ? stack_vectors(set, idx)
                                            : stack_batch(set, idx, rng, frames)));
  }
  return out;
}

std::vector<int> argmax_rows(const std::vector<std::vector<double>>& probs) {
  std::vector<int> out;
  for (const auto& row : probs) {
    out.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
  return out;
}

MetricsLog train_cnn(nn::ModelGraph<float>& graph, const LabeledSet& train, const LabeledSet& test,
                     const TrainConfig& config) {
  if (train.empty()) throw DataError("training set is empty");
  if (config.epochs < 0 || config.batch_size < 1) throw DataError("invalid epoch or batch settings");
  const int n_classes = graph.output_shape().at(0);
  const int frames = graph.input_shape().at(0);
  Rng rng(derive_seed(config.seed, "cnn/train"));
  nn::Adam<float> opt(config.learning_rate);
  MetricsLog log;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto order = shuffled(train.size(), rng);
    double loss_sum = 0;
    int hits = 0;
    std::size_t batch_no = 0;
    for (std::size_t first = 0; first < order.size(); first += config.batch_size, ++batch_no) {
      const std::span<const std::size_t> idx(
          order.data() + first, std::min<std::size_t>(config.batch_size, order.size() - first));
      const auto labels = gather(train.labels, idx);
      const auto x = stack_batch(train, idx, rng, frames);
      const auto target = one_hot(labels, n_classes);
      nn::Tape<float> tape;
      nn::ForwardContext<float> ctx{nn::Mode::kTrain, &rng, nullptr, nullptr};
      const auto y = graph.forward(x, ctx, &tape);
      const auto loss = nn::categorical_crossentropy(target, y);
      check_finite(loss.value, epoch, batch_no, idx);
      graph.zero_grad();
      graph.backward(tape, loss.grad);
      opt.step(graph.parameters());
      graph.commit(tape);
      loss_sum += loss.value * static_cast<double>(idx.size());
      hits += correct_count(y, labels);
    }
    calibrate_batchnorm(graph, train, config.batch_size,
                        derive_seed(config.seed, "cnn/calibrate/" + std::to_string(epoch)));
    const double n = static_cast<double>(train.size());
    emit(log, {epoch, "train", loss_sum / n, loss_sum / n, 0.0, hits / n}, config.on_epoch);
    if (!test.empty()) emit(log, eval_row(graph, test, epoch, config.seed), config.on_epoch);
  }
  return log;
}

// ------------------------------------------------------------------ tdnn transfer

namespace {

/// Trains `graph` (log-softmax output) on pre-batched inputs produced by
/// `make_batch`; returns per-epoch train rows.
template <typename MakeBatch>
void train_nll(nn::ModelGraph<float>& graph, nn::Optimizer<float>& opt, const LabeledSet& set,
               int epochs, int batch_size, Rng& rng, const std::string& split, MakeBatch make_batch,
               const LabeledSet* test, const std::function<EpochMetrics(int)>& eval,
               MetricsLog& log, const EpochCallback& cb) {
  const int n_classes = graph.output_shape().at(0);
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    const auto order = shuffled(set.size(), rng);
    double loss_sum = 0;
    int hits = 0;
    std::size_t batch_no = 0;
    for (std::size_t first = 0; first < order.size(); first += batch_size, ++batch_no) {
      const std::span<const std::size_t> idx(
          order.data() + first, std::min<std::size_t>(batch_size, order.size() - first));
      const auto labels = gather(set.labels, idx);
      const auto x = make_batch(idx);
      nn::Tape<float> tape;
      nn::ForwardContext<float> ctx{nn::Mode::kTrain, &rng, nullptr, nullptr};
      const auto y = graph.forward(x, ctx, &tape);
      const auto loss = nn::nll_log_probs(one_hot(labels, n_classes), y);
      check_finite(loss.value, epoch, batch_no, idx);
      graph.zero_grad();
      graph.backward(tape, loss.grad);
      opt.step(graph.parameters());
      graph.commit(tape);
      loss_sum += loss.value * static_cast<double>(idx.size());
      hits += correct_count(y, labels);
    }
    const double n = static_cast<double>(set.size());
    emit(log, {epoch, split, loss_sum / n, loss_sum / n, 0.0, hits / n}, cb);
    if (test && !test->empty()) emit(log, eval(epoch), cb);
  }
}

LabeledSet embed(const nn::ModelGraph<float>& trunk, const LabeledSet& set) {
  LabeledSet out;
  out.labels = set.labels;
  for (const auto& f : set.features) {
    Tensor<float> x({1, f.rows, f.cols});
    copy_rows(f, 0, f.rows, x.ptr());
    const auto e = trunk.predict(x);
    audio::FeatureMatrix m(1, e.dim(1));
    for (int j = 0; j < e.dim(1); ++j) m.at(0, j) = e[j];
    out.features.push_back(std::move(m));
  }
  return out;
}

}  // namespace

TransferResult pretrain_and_transfer(const LabeledSet& speakers, const LabeledSet& accents,
                                     const LabeledSet& accent_test, const TransferConfig& config,
                                     int n_classes) {
  const int n_speakers = distinct_labels(speakers);
  if (n_speakers < 2) throw DataError("speaker pretraining needs at least two speakers");
  if (distinct_labels(accents) < n_classes) {
    throw DataError("accent set covers " + std::to_string(distinct_labels(accents)) + " of " +
                    std::to_string(n_classes) + " classes");
  }
  for (int l : speakers.labels) {
    if (l < 0 || l >= n_speakers) throw LabelError("speaker labels must be dense in [0, n)");
  }
  Rng rng(derive_seed(config.seed, "tdnn/transfer"));

  // Phase 1: speaker identification with a temporary head.
  auto graph = build_tdnn_trunk<float>();
  graph.emplace<nn::Dense<float>>("spk_fc7", 512, 512, nn::Activation::kRelu);
  graph.emplace<nn::Dense<float>>("spk_output", 512, n_speakers, nn::Activation::kLogSoftmax);
  graph.initialize(rng);
  MetricsLog pre_log;
  {
    nn::Adam<float> opt(config.pretrain_lr);
    train_nll(graph, opt, speakers, config.pretrain_epochs, config.batch_size, rng, "pretrain",
              [&](std::span<const std::size_t> idx) {
                return stack_chunks(speakers, idx, rng, config.chunk_frames);
              },
              nullptr, {}, pre_log, config.on_epoch);
  }
  graph.pop();
  graph.pop();

  std::vector<Tensor<float>> snapshot;
  for (const auto* p : std::as_const(graph).parameters()) snapshot.push_back(p->value);

  // Phase 2: the trunk is frozen, so its embeddings are fixed per utterance.
  graph.freeze_first(kTdnnTrunkLayers);
  const auto train_emb = embed(graph, accents);
  const auto test_emb = embed(graph, accent_test);
  nn::ModelGraph<float> head("tdnn_head", {512});
  append_tdnn_head(head, n_classes);
  head.initialize(rng);
  MetricsLog transfer_log;
  {
    nn::SgdMomentum<float> opt(config.transfer_lr, config.momentum);
    train_nll(head, opt, train_emb, config.transfer_epochs, config.batch_size, rng, "train",
              [&](std::span<const std::size_t> idx) { return stack_vectors(train_emb, idx); },
              &test_emb, [&](int epoch) { return eval_row(head, test_emb, epoch, 0); },
              transfer_log, config.on_epoch);
  }

  std::vector<std::unique_ptr<nn::Layer<float>>> moved;
  while (head.size() > 0) moved.push_back(head.pop());
  for (auto it = moved.rbegin(); it != moved.rend(); ++it) graph.add(std::move(*it));
  return {std::move(graph), std::move(pre_log), std::move(transfer_log), std::move(snapshot)};
}

}  // namespace accentlab::models
