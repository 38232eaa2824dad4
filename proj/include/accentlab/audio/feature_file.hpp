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
#include <span>
#include <vector>

#include "accentlab/audio/features.hpp"

namespace accentlab::audio {

// Layout: "ACFT", u32 rows, u32 cols, rows*cols float32, all little-endian.
// Values are narrowed to float32 on write.
std::vector<std::uint8_t> encode_features(const FeatureMatrix& m);
FeatureMatrix decode_features(std::span<const std::uint8_t> bytes);

void write_features(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix read_features(const std::filesystem::path& path);

}  // namespace accentlab::audio
