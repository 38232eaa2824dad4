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

#include "accentlab/audio/signal.hpp"

namespace accentlab::audio {

/// Decodes a RIFF/WAVE byte stream. Only 16-bit PCM, mono, 16 kHz is
/// accepted; anything else is rejected rather than converted.
///
/// Chunks other than "fmt " and "data" are skipped (respecting the RIFF
/// even-byte padding rule). Throws FormatError for a malformed container
/// and UnsupportedFormatError for a well-formed file with the wrong
/// encoding, channel count or rate.
Signal decode_wav(std::span<const std::uint8_t> bytes);

/// Canonical 44-byte-header encoding. Samples are scaled by 32768,
/// rounded to nearest and clamped to the int16 range.
std::vector<std::uint8_t> encode_wav(const Signal& signal);

Signal read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const Signal& signal);

}  // namespace accentlab::audio
