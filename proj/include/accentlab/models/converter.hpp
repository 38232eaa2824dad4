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

#include "accentlab/audio/signal.hpp"
#include "accentlab/audio/transform.hpp"
#include "accentlab/models/training.hpp"
#include "accentlab/nn/graph.hpp"
#include "accentlab/nn/optimizer.hpp"

namespace accentlab::models {

struct LossBreakdown {
  double total = 0.0;
  double cls = 0.0;  // CCE of classifier output against the uniform target
  double dec = 0.0;  // BCE of decoder output against the encoder input
};

/// Which sub-networks a training step updates.
///   kJoint:       encoder + decoder on w_cls*CCE + w_dec*BCE
///   kEncoderOnly: encoder on the classifier loss alone
///   kDecoderOnly: decoder on BCE, encoder fixed (inference mode)
enum class ConverterPhase { kJoint, kEncoderOnly, kDecoderOnly };

/// Encoder feeding both a frozen accent classifier and a label-conditioned
/// decoder. Inputs: features and one-hot target label. Outputs: classifier
/// probabilities and the decoder reconstruction.
class ConverterTrainer {
 public:
  static constexpr int kInputs = 2;
  static constexpr int kOutputs = 2;

  /// Throws WiringError when shapes do not line up; freezes the classifier.
  ConverterTrainer(nn::ModelGraph<float> encoder, nn::ModelGraph<float> decoder,
                   nn::ModelGraph<float> classifier, double w_cls = 1.0, double w_dec = 1.0);

  nn::ModelGraph<float>& encoder() { return encoder_; }
  nn::ModelGraph<float>& decoder() { return decoder_; }
  nn::ModelGraph<float>& classifier() { return classifier_; }
  const nn::ModelGraph<float>& encoder() const { return encoder_; }
  const nn::ModelGraph<float>& decoder() const { return decoder_; }
  const nn::ModelGraph<float>& classifier() const { return classifier_; }
  int n_classes() const { return n_classes_; }
  double w_cls() const { return w_cls_; }
  double w_dec() const { return w_dec_; }

  std::vector<nn::Parameter<float>*> trainable_parameters(ConverterPhase phase);

  /// One optimizer step on a (B, 256, 129) batch with (B, N) labels. The
  /// classifier always runs in inference mode. `correct`, when given,
  /// receives the number of rows whose classifier argmax equals the label.
  LossBreakdown train_step(const nn::Tensor<float>& x, const nn::Tensor<float>& label,
                           nn::Optimizer<float>& opt, Rng& rng,
                           ConverterPhase phase = ConverterPhase::kJoint, int* correct = nullptr);

  /// Both losses in inference mode; no state changes.
  LossBreakdown evaluate(const nn::Tensor<float>& x, const nn::Tensor<float>& label,
                         int* correct = nullptr) const;

  /// Encoder then decoder (inference mode).
  nn::Tensor<float> reconstruct(const nn::Tensor<float>& x, const nn::Tensor<float>& label) const;

 private:
  nn::ModelGraph<float> encoder_, decoder_, classifier_;
  double w_cls_, w_dec_;
  int n_classes_;
};

ConverterTrainer assemble_converter_trainer(nn::ModelGraph<float> encoder,
                                            nn::ModelGraph<float> decoder,
                                            nn::ModelGraph<float> classifier, double w_cls = 1.0,
                                            double w_dec = 1.0);

struct ConverterConfig {
  int epochs = 25;
  int batch_size = 128;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  ConverterPhase phase = ConverterPhase::kJoint;
  EpochCallback on_epoch;
};

/// Logs epoch 0 (inference-mode losses before any update) and then one
/// row per epoch, for "train" and, when `test` is non-empty, "test". Epoch
/// 0 and every test row are inference-mode averages over fixed crops;
/// train rows for epochs >= 1 average the training-step losses. The
/// accuracy column is the frozen classifier's accuracy on encoder output.
/// Throws DataError on an empty training set, NumericError on a
/// non-finite loss.
MetricsLog train_converter(ConverterTrainer& trainer, const LabeledSet& train,
                           const LabeledSet& test, const ConverterConfig& config);

/// Inference-mode averages over `set` with crops drawn from `crop_seed`.
LossBreakdown evaluate_converter(const ConverterTrainer& trainer, const LabeledSet& set,
                                 std::uint64_t crop_seed, double* accuracy = nullptr);

/// Mean squared error between decoder(encoder(x), own label) and x in the
/// scaled feature space.
double reconstruction_mse(const ConverterTrainer& trainer, const LabeledSet& set,
                          std::uint64_t crop_seed);

/// Intermediate matrices of one conversion.
struct ConversionTrace {
  audio::FeatureMatrix input_magnitude;   // cropped/padded input, linear
  audio::FeatureMatrix input_scaled;      // encoder input
  audio::FeatureMatrix output_scaled;     // decoder output
  audio::FeatureMatrix output_magnitude;  // de-scaled decoder output, linear
};

inline constexpr int kGriffinLimIterations = 32;

/// stft -> log/standardize/scale -> trim_or_pad(256) -> encoder -> decoder
/// with `target_class` -> inverse transform -> Griffin-Lim. Returns
/// 255*160+256 samples clipped to [-1, 1]. Throws TooShortError when the
/// input holds less than one analysis frame.
audio::Signal convert(const audio::Signal& input, int target_class,
                      const nn::ModelGraph<float>& encoder, const nn::ModelGraph<float>& decoder,
                      const audio::TransformState& state, std::uint64_t crop_seed,
                      int gl_iterations = kGriffinLimIterations, ConversionTrace* trace = nullptr);

}  // namespace accentlab::models
