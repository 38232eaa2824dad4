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

#include "accentlab/models/converter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "accentlab/audio/features.hpp"
#include "accentlab/audio/griffin_lim.hpp"
#include "accentlab/error.hpp"
#include "accentlab/nn/losses.hpp"

namespace accentlab::models {

using nn::Tensor;

namespace {

void scale(Tensor<float>& t, double w) {
  if (w == 1.0) return;
  for (auto& v : t.data) v = static_cast<float>(v * w);
}

void add_into(Tensor<float>& acc, const Tensor<float>& g) {
  if (acc.data.empty()) {
    acc = g;
    return;
  }
  for (std::size_t i = 0; i < acc.size(); ++i) acc.data[i] += g.data[i];
}

int count_correct(const Tensor<float>& probs, const Tensor<float>& label) {
  const int n = probs.dim(1);
  int hits = 0;
  for (int b = 0; b < probs.dim(0); ++b) {
    const float* p = probs.ptr() + static_cast<std::size_t>(b) * n;
    const float* l = label.ptr() + static_cast<std::size_t>(b) * n;
    hits += (std::max_element(p, p + n) - p) == (std::max_element(l, l + n) - l);
  }
  return hits;
}

void wiring_fail(const std::string& what) { throw WiringError("converter trainer: " + what); }

}  // namespace

ConverterTrainer::ConverterTrainer(nn::ModelGraph<float> encoder, nn::ModelGraph<float> decoder,
                                   nn::ModelGraph<float> classifier, double w_cls, double w_dec)
    : encoder_(std::move(encoder)),
      decoder_(std::move(decoder)),
      classifier_(std::move(classifier)),
      w_cls_(w_cls),
      w_dec_(w_dec),
      n_classes_(0) {
  const auto in = encoder_.input_shape();
  const auto enc_out = encoder_.output_shape();
  if (enc_out != in) {
    wiring_fail("encoder maps " + nn::shape_str(in) + " to " + nn::shape_str(enc_out));
  }
  if (classifier_.input_shape() != enc_out) {
    wiring_fail("classifier expects " + nn::shape_str(classifier_.input_shape()) +
                " but the encoder produces " + nn::shape_str(enc_out));
  }
  const auto cls_out = classifier_.output_shape();
  if (cls_out.size() != 1 || cls_out[0] < 2) {
    wiring_fail("classifier must output a class distribution, got " + nn::shape_str(cls_out));
  }
  n_classes_ = cls_out[0];
  const auto* head = dynamic_cast<const nn::Dense<float>*>(&classifier_.layer(classifier_.size() - 1));
  if (!head || head->activation() != nn::Activation::kSoftmax) {
    wiring_fail("classifier must end in a softmax dense layer");
  }
  if (decoder_.input_shape() != enc_out) {
    wiring_fail("decoder expects " + nn::shape_str(decoder_.input_shape()) +
                " but the encoder produces " + nn::shape_str(enc_out));
  }
  if (decoder_.output_shape() != in) {
    wiring_fail("decoder output " + nn::shape_str(decoder_.output_shape()) +
                " differs from the encoder input " + nn::shape_str(in));
  }
  const auto* emb = decoder_.size() ? dynamic_cast<const nn::EmbeddingConcat<float>*>(&decoder_.layer(0))
                                    : nullptr;
  if (!emb) wiring_fail("decoder must start with a label embedding");
  if (emb->n_labels() != n_classes_) {
    wiring_fail("decoder takes " + std::to_string(emb->n_labels()) + " labels, classifier has " +
                std::to_string(n_classes_) + " classes");
  }
  if (!(w_cls >= 0.0 && w_dec >= 0.0)) wiring_fail("loss weights must be non-negative");
  classifier_.freeze_first(classifier_.size());
}

std::vector<nn::Parameter<float>*> ConverterTrainer::trainable_parameters(ConverterPhase phase) {
  std::vector<nn::Parameter<float>*> out;
  if (phase != ConverterPhase::kDecoderOnly) out = encoder_.parameters();
  if (phase != ConverterPhase::kEncoderOnly) {
    for (auto* p : decoder_.parameters()) out.push_back(p);
  }
  return out;
}

LossBreakdown ConverterTrainer::train_step(const Tensor<float>& x, const Tensor<float>& label,
                                           nn::Optimizer<float>& opt, Rng& rng,
                                           ConverterPhase phase, int* correct) {
  const bool train_enc = phase != ConverterPhase::kDecoderOnly;
  const bool use_cls = phase != ConverterPhase::kDecoderOnly;
  const bool use_dec = phase != ConverterPhase::kEncoderOnly;
  nn::ForwardContext<float> train_ctx{nn::Mode::kTrain, &rng, nullptr, nullptr};
  nn::ForwardContext<float> infer_ctx{nn::Mode::kInfer, nullptr, nullptr, nullptr};

  nn::Tape<float> enc_tape;
  const Tensor<float> e = train_enc ? encoder_.forward(x, train_ctx, &enc_tape)
                                    : encoder_.forward(x, infer_ctx, nullptr);
  LossBreakdown out;
  Tensor<float> grad_e;
  if (use_cls) {
    nn::Tape<float> cls_tape;
    const auto p = classifier_.forward(e, infer_ctx, &cls_tape);
    // Log-space CCE: a saturated classifier still passes a gradient.
    auto loss = nn::categorical_crossentropy_from_logits(uniform_target(x.dim(0), n_classes_),
                                                         classifier_.logits(cls_tape));
    out.cls = loss.value;
    if (correct) *correct = count_correct(p, label);
    scale(loss.grad, w_cls_);
    add_into(grad_e, classifier_.backward_from_logits(cls_tape, loss.grad, true));
  }
  nn::Tape<float> dec_tape;
  if (use_dec) {
    nn::ForwardContext<float> dec_ctx = train_ctx;
    dec_ctx.label = &label;
    const auto d = decoder_.forward(e, dec_ctx, &dec_tape);
    auto loss = nn::binary_crossentropy(x, d);
    out.dec = loss.value;
    scale(loss.grad, w_dec_);
    decoder_.zero_grad();
    auto g = decoder_.backward(dec_tape, loss.grad, train_enc);
    if (train_enc) add_into(grad_e, g);
  }
  out.total = (use_cls ? w_cls_ * out.cls : 0.0) + (use_dec ? w_dec_ * out.dec : 0.0);
  if (!std::isfinite(out.total)) throw NumericError("non-finite converter loss");
  if (train_enc) {
    encoder_.zero_grad();
    encoder_.backward(enc_tape, grad_e);
  }
  opt.step(trainable_parameters(phase));
  if (train_enc) encoder_.commit(enc_tape);
  if (use_dec) decoder_.commit(dec_tape);
  return out;
}

LossBreakdown ConverterTrainer::evaluate(const Tensor<float>& x, const Tensor<float>& label,
                                         int* correct) const {
  const auto e = encoder_.predict(x);
  nn::Tape<float> cls_tape;
  const auto p = classifier_.forward(e, {}, &cls_tape);
  const auto d = decoder_.predict(e, &label);
  LossBreakdown out;
  out.cls = nn::categorical_crossentropy_from_logits(uniform_target(x.dim(0), n_classes_),
                                                     classifier_.logits(cls_tape))
                .value;
  out.dec = nn::binary_crossentropy(x, d).value;
  out.total = w_cls_ * out.cls + w_dec_ * out.dec;
  if (correct) *correct = count_correct(p, label);
  return out;
}

Tensor<float> ConverterTrainer::reconstruct(const Tensor<float>& x,
                                            const Tensor<float>& label) const {
  return decoder_.predict(encoder_.predict(x), &label);
}

ConverterTrainer assemble_converter_trainer(nn::ModelGraph<float> encoder,
                                            nn::ModelGraph<float> decoder,
                                            nn::ModelGraph<float> classifier, double w_cls,
                                            double w_dec) {
  return ConverterTrainer(std::move(encoder), std::move(decoder), std::move(classifier), w_cls,
                          w_dec);
}

namespace {

constexpr std::size_t kEvalChunk = 32;

template <typename Fn>
void for_each_chunk(const LabeledSet& set, std::uint64_t seed, int frames, int n_classes, Fn fn) {
  Rng rng(seed);
  for (std::size_t first = 0; first < set.size(); first += kEvalChunk) {
    std::vector<std::size_t> idx(std::min(kEvalChunk, set.size() - first));
    std::iota(idx.begin(), idx.end(), first);
    std::vector<int> labels;
    for (auto i : idx) labels.push_back(set.labels[i]);
    fn(stack_batch(set, idx, rng, frames), one_hot(labels, n_classes), idx.size());
  }
}

}  // namespace

LossBreakdown evaluate_converter(const ConverterTrainer& trainer, const LabeledSet& set,
                                 std::uint64_t crop_seed, double* accuracy) {
  if (set.empty()) throw DataError("evaluation set is empty");
  LossBreakdown sum;
  int hits = 0;
  for_each_chunk(set, crop_seed, trainer.encoder().input_shape()[0], trainer.n_classes(),
                 [&](const Tensor<float>& x, const Tensor<float>& y, std::size_t n) {
                   int c = 0;
                   const auto l = trainer.evaluate(x, y, &c);
                   sum.total += l.total * n;
                   sum.cls += l.cls * n;
                   sum.dec += l.dec * n;
                   hits += c;
                 });
  const double n = static_cast<double>(set.size());
  if (accuracy) *accuracy = hits / n;
  return {sum.total / n, sum.cls / n, sum.dec / n};
}

double reconstruction_mse(const ConverterTrainer& trainer, const LabeledSet& set,
                          std::uint64_t crop_seed) {
  if (set.empty()) throw DataError("evaluation set is empty");
  double sum = 0.0;
  for_each_chunk(set, crop_seed, trainer.encoder().input_shape()[0], trainer.n_classes(),
                 [&](const Tensor<float>& x, const Tensor<float>& y, std::size_t n) {
                   sum += nn::mean_squared_error(trainer.reconstruct(x, y), x) * n;
                 });
  return sum / static_cast<double>(set.size());
}

MetricsLog train_converter(ConverterTrainer& trainer, const LabeledSet& train,
                           const LabeledSet& test, const ConverterConfig& config) {
  if (train.empty()) throw DataError("converter training set is empty");
  if (config.epochs < 0 || config.batch_size < 1) throw DataError("invalid epoch or batch settings");
  const int frames = trainer.encoder().input_shape()[0];
  const std::uint64_t eval_seed = derive_seed(config.seed, "converter/eval");
  Rng rng(derive_seed(config.seed, "converter/train"));
  nn::Adam<float> opt(config.learning_rate);
  MetricsLog log;
  auto emit = [&](EpochMetrics m) {
    if (config.on_epoch) config.on_epoch(m);
    log.push_back(std::move(m));
  };
  auto eval_row = [&](int epoch, const LabeledSet& set, const char* split) {
    double acc = 0;
    const auto l = evaluate_converter(trainer, set, eval_seed, &acc);
    emit({epoch, split, l.total, l.cls, l.dec, acc});
  };
  eval_row(0, train, "train");
  if (!test.empty()) eval_row(0, test, "test");

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, i - 1))]);
    }
    LossBreakdown sum;
    int hits = 0;
    std::size_t batch_no = 0;
    for (std::size_t first = 0; first < order.size(); first += config.batch_size, ++batch_no) {
      const std::span<const std::size_t> idx(
          order.data() + first, std::min<std::size_t>(config.batch_size, order.size() - first));
      std::vector<int> labels;
      for (auto i : idx) labels.push_back(train.labels[i]);
      const auto x = stack_batch(train, idx, rng, frames);
      const auto y = one_hot(labels, trainer.n_classes());
      int c = 0;
      LossBreakdown l;
      try {
        l = trainer.train_step(x, y, opt, rng, config.phase, &c);
      } catch (const NumericError&) {
        throw NumericError("non-finite converter loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch_no) + " (" + describe_items(idx) + ")");
      }
      const double n = static_cast<double>(idx.size());
      sum.total += l.total * n;
      sum.cls += l.cls * n;
      sum.dec += l.dec * n;
      hits += c;
    }
    const std::string tag = "converter/calibrate/" + std::to_string(epoch);
    if (config.phase != ConverterPhase::kDecoderOnly) {
      calibrate_batchnorm(trainer.encoder(), train, config.batch_size, derive_seed(config.seed, tag));
    }
    if (config.phase != ConverterPhase::kEncoderOnly) {
      const auto& enc = trainer.encoder();
      calibrate_batchnorm(
          trainer.decoder(), train, config.batch_size, derive_seed(config.seed, tag + "/dec"),
          [&](const Tensor<float>& x) { return enc.predict(x); }, trainer.n_classes());
    }
    const double n = static_cast<double>(train.size());
    emit({epoch, "train", sum.total / n, sum.cls / n, sum.dec / n, hits / n});
    if (!test.empty()) eval_row(epoch, test, "test");
  }
  return log;
}

audio::Signal convert(const audio::Signal& input, int target_class,
                      const nn::ModelGraph<float>& encoder, const nn::ModelGraph<float>& decoder,
                      const audio::TransformState& state, std::uint64_t crop_seed,
                      int gl_iterations, ConversionTrace* trace) {
  if (input.samples.size() < static_cast<std::size_t>(audio::kFftSize)) {
    throw TooShortError("conversion needs at least " + std::to_string(audio::kFftSize) +
                        " samples, got " + std::to_string(input.samples.size()));
  }
  const int frames = encoder.input_shape().at(0);
  const auto magnitude = audio::stft_magnitude(input);
  // Crop the linear magnitude so the trace holds the matching input frames.
  Rng rng(crop_seed);
  const auto cropped = audio::trim_or_pad(magnitude, rng, frames);
  auto scaled = audio::log_standardize(cropped, state);
  if (magnitude.rows < frames) {
    // Padding rows should read as silence, i.e. the bottom of the scale.
    for (int r = magnitude.rows; r < frames; ++r) {
      for (int c = 0; c < scaled.cols; ++c) scaled.at(r, c) = 0.0;
    }
  }
  LabeledSet one;
  one.push_back(scaled, target_class);
  Rng unused(0);
  const std::size_t idx = 0;
  const auto x = stack_batch(one, std::span<const std::size_t>(&idx, 1), unused, frames);
  const auto* emb = decoder.size() ? dynamic_cast<const nn::EmbeddingConcat<float>*>(&decoder.layer(0))
                                   : nullptr;
  if (!emb) throw WiringError("decoder must start with a label embedding");
  const std::vector<int> lab{target_class};
  const auto label = one_hot(lab, emb->n_labels());
  const auto y = decoder.predict(encoder.predict(x), &label);

  audio::FeatureMatrix out_scaled(frames, y.dim(2));
  for (std::size_t i = 0; i < y.size(); ++i) out_scaled.values[i] = y[i];
  const auto out_mag = audio::destandardize_exp(out_scaled, state);
  auto sig = audio::griffin_lim(out_mag, gl_iterations);
  for (auto& s : sig.samples) s = std::clamp(s, -1.0f, 1.0f);
  if (trace) *trace = {cropped, scaled, out_scaled, out_mag};
  return sig;
}

}  // namespace accentlab::models
