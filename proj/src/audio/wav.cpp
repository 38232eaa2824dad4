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

#include "accentlab/audio/wav.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "accentlab/error.hpp"

namespace accentlab::audio {

void validate(const Signal& signal) {
  if (signal.sample_rate != kSampleRate) {
    throw UnsupportedFormatError("sample rate " +
                                 std::to_string(signal.sample_rate) +
                                 " Hz, expected 16000");
  }
  for (float s : signal.samples) {
    if (!std::isfinite(s)) throw NumericError("non-finite sample in signal");
  }
}

namespace {

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) |
         (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

Signal decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw FormatError("file too small for a RIFF header");
  if (!tag_is(bytes, 0, "RIFF")) throw FormatError("missing RIFF magic");
  if (!tag_is(bytes, 8, "WAVE")) throw FormatError("missing WAVE form type");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (size > bytes.size() - body) {
      throw FormatError("chunk extends past end of file");
    }
    if (tag_is(bytes, pos, "fmt ")) {
      if (size < 16) throw FormatError("fmt chunk shorter than 16 bytes");
      format = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      rate = read_u32(bytes, body + 4);
      bits = read_u16(bytes, body + 14);
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      if (!have_fmt) throw FormatError("data chunk before fmt chunk");
      if (format != 1) {
        throw UnsupportedFormatError("format tag " + std::to_string(format) +
                                     ", only PCM (1) is supported");
      }
      if (channels != 1) {
        throw UnsupportedFormatError(std::to_string(channels) +
                                     " channels, only mono is supported");
      }
      if (bits != 16) {
        throw UnsupportedFormatError(std::to_string(bits) +
                                     "-bit samples, only 16-bit is supported");
      }
      if (rate != kSampleRate) {
        throw UnsupportedFormatError("sample rate " + std::to_string(rate) +
                                     " Hz, only 16000 is supported");
      }
      if (size % 2 != 0) throw FormatError("odd data chunk size for 16-bit PCM");
      Signal signal;
      signal.samples.resize(size / 2);
      for (std::size_t i = 0; i < signal.samples.size(); ++i) {
        const auto v = static_cast<std::int16_t>(read_u16(bytes, body + 2 * i));
        signal.samples[i] = static_cast<float>(v) / 32768.0f;
      }
      return signal;
    }
    pos = body + size + (size & 1u);
  }
  throw FormatError(have_fmt ? "no data chunk" : "no fmt chunk");
}

std::vector<std::uint8_t> encode_wav(const Signal& signal) {
  validate(signal);
  const auto data_bytes = static_cast<std::uint32_t>(signal.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, kSampleRate);
  put_u32(out, kSampleRate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (float s : signal.samples) {
    long q = std::lround(static_cast<double>(s) * 32768.0);
    if (q > 32767) q = 32767;
    if (q < -32768) q = -32768;
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return out;
}

Signal read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

void write_wav(const std::filesystem::path& path, const Signal& signal) {
  const auto bytes = encode_wav(signal);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace accentlab::audio
