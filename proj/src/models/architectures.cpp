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

#include "accentlab/models/architectures.hpp"

namespace accentlab::models {

using nn::Activation;
using nn::Padding;

template <typename T>
nn::ModelGraph<T> build_tdnn_trunk() {
  nn::ModelGraph<T> g("tdnn", {nn::kAnyLength, kMfccDim});
  // Frame contexts: [t-2, t+2], {t-2, t, t+2}, {t-3, t, t+3}, {t}, {t}.
  g.template emplace<nn::Conv1D<T>>("tdnn1", kMfccDim, 512, 5, 1, Padding::kValid, Activation::kRelu);
  g.template emplace<nn::Conv1D<T>>("tdnn2", 512, 512, 3, 2, Padding::kValid, Activation::kRelu);
  g.template emplace<nn::Conv1D<T>>("tdnn3", 512, 512, 3, 3, Padding::kValid, Activation::kRelu);
  g.template emplace<nn::Conv1D<T>>("tdnn4", 512, 512, 1, 1, Padding::kValid, Activation::kRelu);
  g.template emplace<nn::Conv1D<T>>("tdnn5", 512, 1500, 1, 1, Padding::kValid, Activation::kRelu);
  g.template emplace<nn::StatsPooling<T>>("stats_pooling");
  g.template emplace<nn::Dense<T>>("tdnn6", 3000, 512, Activation::kRelu);
  return g;
}

template <typename T>
void append_tdnn_head(nn::ModelGraph<T>& g, int n_classes) {
  g.template emplace<nn::Dense<T>>("fc1", 512, 256, Activation::kRelu);
  g.template emplace<nn::Dense<T>>("fc2", 256, 128, Activation::kRelu);
  g.template emplace<nn::Dense<T>>("fc3", 128, 64, Activation::kRelu);
  g.template emplace<nn::Dense<T>>("output", 64, n_classes, Activation::kLogSoftmax);
}

template <typename T>
nn::ModelGraph<T> build_tdnn_classifier(int n_classes) {
  auto g = build_tdnn_trunk<T>();
  append_tdnn_head(g, n_classes);
  return g;
}

template <typename T>
nn::ModelGraph<T> build_cnn_classifier(int n_classes) {
  nn::ModelGraph<T> g("cnn", {kFrames, kSpecBins});
  g.template emplace<nn::BatchNorm<T>>("cnn_bn1", kSpecBins);
  g.template emplace<nn::Conv1D<T>>("cnn_conv1", kSpecBins, 100, kConvKernel, 1, Padding::kValid, Activation::kRelu);
  g.template emplace<nn::Conv1D<T>>("cnn_conv2", 100, 100, kConvKernel, 1, Padding::kValid, Activation::kRelu);
  g.template emplace<nn::MaxPool1D<T>>("cnn_pool", 3);
  g.template emplace<nn::BatchNorm<T>>("cnn_bn2", 100);
  g.template emplace<nn::Conv1D<T>>("cnn_conv3", 100, 160, kConvKernel, 1, Padding::kValid, Activation::kRelu);
  g.template emplace<nn::Conv1D<T>>("cnn_conv4", 160, 160, kConvKernel, 1, Padding::kValid, Activation::kRelu);
  g.template emplace<nn::GlobalAvgPool1D<T>>("cnn_gap");
  g.template emplace<nn::Dropout<T>>("cnn_dropout", kDropoutRate);
  g.template emplace<nn::Dense<T>>("cnn_output", 160, n_classes, Activation::kSoftmax);
  return g;
}

template <typename T>
nn::ModelGraph<T> build_encoder() {
  nn::ModelGraph<T> g("encoder", {kFrames, kSpecBins});
  const auto same = Padding::kSame;
  const auto relu = Activation::kRelu;
  g.template emplace<nn::BatchNorm<T>>("enc_bn1", kSpecBins);
  g.template emplace<nn::Conv1D<T>>("enc_conv1", kSpecBins, 160, kConvKernel, 1, same, relu);
  g.template emplace<nn::Conv1D<T>>("enc_conv2", 160, 160, kConvKernel, 1, same, relu);
  g.template emplace<nn::BatchNorm<T>>("enc_bn2", 160);
  g.template emplace<nn::Conv1D<T>>("enc_conv3", 160, 160, kConvKernel, 1, same, relu);
  g.template emplace<nn::Conv1D<T>>("enc_conv4", 160, 160, kConvKernel, 1, same, relu);
  g.template emplace<nn::MaxPool1D<T>>("enc_pool", 8);
  g.template emplace<nn::BatchNorm<T>>("enc_bn3", 160);
  g.template emplace<nn::Dropout<T>>("enc_dropout", kDropoutRate);
  g.template emplace<nn::Conv1D<T>>("enc_conv5", 160, 100, kConvKernel, 1, same, relu);
  g.template emplace<nn::Conv1D<T>>("enc_conv6", 100, 100, kConvKernel, 1, same, relu);
  g.template emplace<nn::Upsample1D<T>>("enc_upsample", 8);
  g.template emplace<nn::BatchNorm<T>>("enc_bn4", 100);
  g.template emplace<nn::Conv1D<T>>("enc_conv_out", 100, kSpecBins, kConvKernel, 1, same,
                                    Activation::kSigmoid);
  return g;
}

template <typename T>
nn::ModelGraph<T> build_decoder(int n_classes) {
  nn::ModelGraph<T> g("decoder", {kFrames, kSpecBins});
  const auto same = Padding::kSame;
  const auto relu = Activation::kRelu;
  g.template emplace<nn::EmbeddingConcat<T>>("dec_embedding", n_classes, kSpecBins);
  g.template emplace<nn::Conv1D<T>>("dec_conv1", kSpecBins, 160, kConvKernel, 1, same, relu);
  g.template emplace<nn::Conv1D<T>>("dec_conv2", 160, 160, kConvKernel, 1, same, relu);
  g.template emplace<nn::MaxPool1D<T>>("dec_pool", 8);
  g.template emplace<nn::BatchNorm<T>>("dec_bn1", 160);
  g.template emplace<nn::Conv1D<T>>("dec_conv3", 160, 100, kConvKernel, 1, same, relu);
  g.template emplace<nn::Conv1D<T>>("dec_conv4", 100, 100, kConvKernel, 1, same, relu);
  g.template emplace<nn::Dropout<T>>("dec_dropout", kDropoutRate);
  g.template emplace<nn::Upsample1D<T>>("dec_upsample", 8);
  g.template emplace<nn::BatchNorm<T>>("dec_bn2", 100);
  g.template emplace<nn::Conv1D<T>>("dec_conv_out", 100, kSpecBins, kConvKernel, 1, same,
                                    Activation::kSigmoid);
  return g;
}

#define ACCENTLAB_MODELS(T)                                       \
  template nn::ModelGraph<T> build_tdnn_trunk<T>();               \
  template void append_tdnn_head<T>(nn::ModelGraph<T>&, int);     \
  template nn::ModelGraph<T> build_tdnn_classifier<T>(int);       \
  template nn::ModelGraph<T> build_cnn_classifier<T>(int);        \
  template nn::ModelGraph<T> build_encoder<T>();                  \
  template nn::ModelGraph<T> build_decoder<T>(int);

ACCENTLAB_MODELS(float)
ACCENTLAB_MODELS(double)

}  // namespace accentlab::models
