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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "accentlab/audio/features.hpp"
#include "accentlab/audio/transform.hpp"
#include "accentlab/corpus/corpus.hpp"
#include "accentlab/models/architectures.hpp"
#include "accentlab/nn/graph.hpp"

namespace accentlab::models {

/// Variable-length feature matrices with one integer label each.
struct LabeledSet {
  std::vector<audio::FeatureMatrix> features;
  std::vector<int> labels;

  std::size_t size() const { return features.size(); }
  bool empty() const { return features.empty(); }
  void push_back(audio::FeatureMatrix f, int label) {
    features.push_back(std::move(f));
    labels.push_back(label);
  }
};

/// Number of distinct labels present.
int distinct_labels(const LabeledSet& set);

/// Per-column mean/std normalization for MFCC input.
struct FeatureNorm {
  std::vector<double> mean;
  std::vector<double> std;

  bool operator==(const FeatureNorm&) const = default;
};

FeatureNorm fit_feature_norm(std::span<const audio::FeatureMatrix> set);
audio::FeatureMatrix apply_feature_norm(const audio::FeatureMatrix& m, const FeatureNorm& norm);
void save_feature_norm(const std::filesystem::path& path, const FeatureNorm& norm);
FeatureNorm load_feature_norm(const std::filesystem::path& path);

enum class FeatureKind { kSpectrogram, kMfcc };

/// Reads every record's wav and extracts raw (untransformed) features,
/// labelled by accent class. Records are processed in manifest order.
LabeledSet load_features(const corpus::Manifest& manifest, std::string_view split,
                         FeatureKind kind, int threads = 1);

/// Relabels by speaker: labels become indices into `speakers`, which lists
/// the distinct speaker ids in order of first appearance.
LabeledSet relabel_by_speaker(const corpus::Manifest& manifest, std::string_view split,
                              const LabeledSet& set, std::vector<std::string>* speakers = nullptr);

/// log_standardize applied to every matrix.
LabeledSet transform_set(const LabeledSet& set, const audio::TransformState& state);
LabeledSet normalize_set(const LabeledSet& set, const FeatureNorm& norm);

/// Rows of `features` at `indices`, each trimmed or padded to `frames`.
nn::Tensor<float> stack_batch(const LabeledSet& set, std::span<const std::size_t> indices,
                              Rng& rng, int frames = kFrames);

/// Random contiguous chunks of a common length: min(chunk, shortest item).
nn::Tensor<float> stack_chunks(const LabeledSet& set, std::span<const std::size_t> indices,
                               Rng& rng, int chunk);

/// Upper bound on the items drawn for a batch-norm calibration pass.
inline constexpr std::size_t kCalibrationItems = 256;

/// Re-estimates running batch-norm statistics of `graph` from random
/// crops of up to kCalibrationItems items of `set`, in batches of
/// `batch_size`. `transform`, when set, maps each stacked batch before it
/// reaches the graph; `label_classes` > 0 supplies one-hot labels as the
/// second input.
void calibrate_batchnorm(nn::ModelGraph<float>& graph, const LabeledSet& set, int batch_size,
                         std::uint64_t seed,
                         const std::function<nn::Tensor<float>(const nn::Tensor<float>&)>&
                             transform = {},
                         int label_classes = 0);

/// "items i, j, ..." for error messages naming a batch.
std::string describe_items(std::span<const std::size_t> items);

nn::Tensor<float> one_hot(std::span<const int> labels, int n_classes);

/// Uniform target distribution, shape (batch, n).
nn::Tensor<float> uniform_target(int batch, int n_classes);

/// One row of the metrics log.
struct EpochMetrics {
  int epoch = 0;
  std::string split;
  double loss_total = 0.0;
  double loss_cls = 0.0;
  double loss_dec = 0.0;
  double accuracy = 0.0;
};

using MetricsLog = std::vector<EpochMetrics>;
using EpochCallback = std::function<void(const EpochMetrics&)>;

inline constexpr const char* kMetricsHeader = "epoch,split,loss_total,loss_cls,loss_dec,accuracy";
std::string metrics_csv(const MetricsLog& log);
void write_metrics_csv(const std::filesystem::path& path, const MetricsLog& log);

struct TrainConfig {
  int epochs = 25;
  int batch_size = 128;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  EpochCallback on_epoch;
};

/// Adam training of a spectrogram classifier with per-epoch random crops.
/// After each epoch a "train" row and, when `test` is non-empty, a "test"
/// row are logged. Throws NumericError naming the batch on a non-finite
/// loss.
MetricsLog train_cnn(nn::ModelGraph<float>& graph, const LabeledSet& train,
                     const LabeledSet& test, const TrainConfig& config);

/// Class posteriors for each item (probabilities, also for log-softmax
/// outputs). Spectrogram items are cropped with a generator seeded from
/// `crop_seed`; variable-length graphs see whole items.
std::vector<std::vector<double>> predict_proba(const nn::ModelGraph<float>& graph,
                                               const LabeledSet& set,
                                               std::uint64_t crop_seed = 0);
std::vector<int> argmax_rows(const std::vector<std::vector<double>>& probs);

struct TransferConfig {
  int pretrain_epochs = 10;
  double pretrain_lr = 1e-3;
  int transfer_epochs = 150;
  double transfer_lr = 0.05;
  double momentum = 0.5;
  int batch_size = 128;
  int chunk_frames = 120;
  std::uint64_t seed = 0;
  EpochCallback on_epoch;
};

struct TransferResult {
  nn::ModelGraph<float> graph;
  MetricsLog pretrain_log;
  MetricsLog transfer_log;
  /// Snapshot of the first seven layers' parameters taken after phase 1.
  std::vector<nn::Tensor<float>> pretrained_values;
};

/// Phase 1 trains tdnn1..tdnn6 plus a temporary head on speaker ids
/// (Adam, random chunks). Phase 2 discards that head, freezes the first
/// seven layers and trains a new fc1/fc2/fc3/output head on accent
/// classes with SGD + momentum. Embeddings of the frozen trunk do not
/// change during phase 2, so they are extracted once per utterance.
/// Throws DataError for fewer than two speakers or when the accent set
/// covers fewer than n_classes classes.
TransferResult pretrain_and_transfer(const LabeledSet& speakers, const LabeledSet& accents,
                                     const LabeledSet& accent_test, const TransferConfig& config,
                                     int n_classes = kNumClasses);

}  // namespace accentlab::models
