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

#include <filesystem>
#include <string>
#include <vector>

#include "accentlab/nn/graph.hpp"

namespace accentlab::nn {

// A checkpoint is two files: `<prefix>.index` with one line per tensor
//   name \t float32 \t d0,d1,... \t byte_offset
// and `<prefix>.bin`, the float32 little-endian tensors back to back.

struct CheckpointEntry {
  std::string name;
  Shape shape;
  std::size_t offset = 0;
};

std::filesystem::path index_path(const std::filesystem::path& prefix);
std::filesystem::path blob_path(const std::filesystem::path& prefix);

void save_checkpoint(const std::filesystem::path& prefix,
                     const std::vector<const Parameter<float>*>& params);

/// Every parameter must appear in the index with the same shape, and the
/// index may not list anything else. Throws CheckpointError otherwise.
void load_checkpoint(const std::filesystem::path& prefix,
                     const std::vector<Parameter<float>*>& params);

std::vector<CheckpointEntry> read_checkpoint_index(const std::filesystem::path& prefix);

inline void save_checkpoint(const std::filesystem::path& prefix, const ModelGraph<float>& g) {
  save_checkpoint(prefix, g.parameters());
}
inline void load_checkpoint(const std::filesystem::path& prefix, ModelGraph<float>& g) {
  load_checkpoint(prefix, g.parameters());
}

}  // namespace accentlab::nn
