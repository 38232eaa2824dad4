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

#include "accentlab/audio/feature_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "accentlab/error.hpp"

namespace accentlab::audio {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) |
         (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

}  // namespace

std::vector<std::uint8_t> encode_features(const FeatureMatrix& m) {
  std::vector<std::uint8_t> out;
  out.reserve(12 + m.values.size() * 4);
  out.insert(out.end(), {'A', 'C', 'F', 'T'});
  put_u32(out, static_cast<std::uint32_t>(m.rows));
  put_u32(out, static_cast<std::uint32_t>(m.cols));
  for (double v : m.values) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

FeatureMatrix decode_features(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "ACFT", 4) != 0) {
    throw FormatError("missing ACFT magic");
  }
  const std::uint32_t rows = get_u32(bytes, 4), cols = get_u32(bytes, 8);
  const std::uint64_t n = static_cast<std::uint64_t>(rows) * cols;
  if (bytes.size() != 12 + n * 4) {
    throw FormatError("feature payload size does not match header");
  }
  FeatureMatrix m(static_cast<int>(rows), static_cast<int>(cols));
  for (std::uint64_t i = 0; i < n; ++i) {
    m.values[i] = std::bit_cast<float>(get_u32(bytes, 12 + 4 * i));
  }
  return m;
}

void write_features(const std::filesystem::path& path, const FeatureMatrix& m) {
  const auto bytes = encode_features(m);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

FeatureMatrix read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_features(bytes);
}

}  // namespace accentlab::audio
