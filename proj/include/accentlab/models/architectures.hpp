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

#include "accentlab/nn/graph.hpp"

namespace accentlab::models {

inline constexpr int kNumClasses = 5;
inline constexpr int kSpecBins = 129;
inline constexpr int kFrames = 256;
inline constexpr int kMfccDim = 30;
inline constexpr int kConvKernel = 10;
inline constexpr double kDropoutRate = 0.3;

/// Number of leading TDNN layers that carry over from speaker pretraining
/// and stay frozen afterwards: tdnn1..tdnn5, stats pooling, tdnn6.
inline constexpr std::size_t kTdnnTrunkLayers = 7;

/// tdnn1..tdnn6 with statistics pooling; input (T, 30), output (512,).
template <typename T>
nn::ModelGraph<T> build_tdnn_trunk();

/// Appends fc1 (512->256), fc2 (->128), fc3 (->64) and a log-softmax output.
template <typename T>
void append_tdnn_head(nn::ModelGraph<T>& graph, int n_classes = kNumClasses);

template <typename T>
nn::ModelGraph<T> build_tdnn_classifier(int n_classes = kNumClasses);

/// Spectrogram classifier; input (256, 129), softmax output.
template <typename T>
nn::ModelGraph<T> build_cnn_classifier(int n_classes = kNumClasses);

/// (256, 129) -> (256, 129), sigmoid output.
template <typename T>
nn::ModelGraph<T> build_encoder();

/// (256, 129) plus a one-hot label -> (256, 129), sigmoid output.
template <typename T>
nn::ModelGraph<T> build_decoder(int n_classes = kNumClasses);

}  // namespace accentlab::models
