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

#include "accentlab/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

namespace accentlab::nn {

namespace {

std::string join_shape(const Shape& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s[i]);
  }
  return out;
}

Shape parse_shape(const std::string& text) {
  Shape s;
  if (text.empty()) return s;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      const int d = std::stoi(part, &used);
      if (used != part.size() || d < 0) throw std::invalid_argument(part);
      s.push_back(d);
    } catch (const std::exception&) {
      throw CheckpointError("bad shape field '" + text + "'");
    }
  }
  return s;
}

}  // namespace

std::filesystem::path index_path(const std::filesystem::path& prefix) {
  return prefix.string() + ".index";
}

std::filesystem::path blob_path(const std::filesystem::path& prefix) {
  return prefix.string() + ".bin";
}

void save_checkpoint(const std::filesystem::path& prefix,
                     const std::vector<const Parameter<float>*>& params) {
  std::set<std::string> seen;
  std::ofstream index(index_path(prefix), std::ios::binary);
  std::ofstream blob(blob_path(prefix), std::ios::binary);
  if (!index || !blob) throw IoError("cannot write checkpoint " + prefix.string());
  std::size_t offset = 0;
  std::vector<char> bytes;
  for (const auto* p : params) {
    if (!seen.insert(p->name).second) {
      throw CheckpointError("duplicate parameter name " + p->name);
    }
    index << p->name << '\t' << "float32" << '\t' << join_shape(p->value.shape) << '\t'
          << offset << '\n';
    bytes.resize(p->size() * 4);
    for (std::size_t i = 0; i < p->size(); ++i) {
      const auto u = std::bit_cast<std::uint32_t>(p->value[i]);
      for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<char>(u >> (8 * b));
    }
    blob.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    offset += bytes.size();
  }
  if (!index || !blob) throw IoError("short write to checkpoint " + prefix.string());
}

std::vector<CheckpointEntry> read_checkpoint_index(const std::filesystem::path& prefix) {
  std::ifstream in(index_path(prefix));
  if (!in) throw CheckpointError("missing checkpoint index " + index_path(prefix).string());
  std::vector<CheckpointEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    if (line.back() == '\t') fields.emplace_back();
    if (fields.size() != 4) throw CheckpointError("malformed index line: " + line);
    if (fields[1] != "float32") throw CheckpointError("unsupported dtype " + fields[1]);
    CheckpointEntry e{fields[0], parse_shape(fields[2]), 0};
    try {
      e.offset = std::stoull(fields[3]);
    } catch (const std::exception&) {
      throw CheckpointError("bad offset in index line: " + line);
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

void load_checkpoint(const std::filesystem::path& prefix,
                     const std::vector<Parameter<float>*>& params) {
  const auto entries = read_checkpoint_index(prefix);
  std::map<std::string, const CheckpointEntry*> by_name;
  for (const auto& e : entries) {
    if (!by_name.emplace(e.name, &e).second) {
      throw CheckpointError("index lists " + e.name + " twice");
    }
  }
  std::ifstream in(blob_path(prefix), std::ios::binary);
  if (!in) throw CheckpointError("missing checkpoint blob " + blob_path(prefix).string());
  const std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());

  std::size_t expected = 0;
  for (const auto& e : entries) expected += shape_size(e.shape) * 4;
  if (blob.size() != expected) {
    throw CheckpointError("blob holds " + std::to_string(blob.size()) + " bytes, index needs " +
                          std::to_string(expected));
  }
  if (entries.size() != params.size()) {
    throw CheckpointError("checkpoint has " + std::to_string(entries.size()) +
                          " tensors, model has " + std::to_string(params.size()));
  }
  // Validate everything before touching any parameter.
  for (const auto* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) throw CheckpointError("checkpoint lacks " + p->name);
    if (it->second->shape != p->value.shape) {
      throw CheckpointError(p->name + ": checkpoint shape " + shape_str(it->second->shape) +
                            " vs model " + shape_str(p->value.shape));
    }
    if (it->second->offset + p->size() * 4 > blob.size()) {
      throw CheckpointError(p->name + ": offset past end of blob");
    }
  }
  for (auto* p : params) {
    const std::size_t off = by_name.at(p->name)->offset;
    for (std::size_t i = 0; i < p->size(); ++i) {
      const std::uint8_t* b = blob.data() + off + i * 4;
      const std::uint32_t u = static_cast<std::uint32_t>(b[0]) |
                              (static_cast<std::uint32_t>(b[1]) << 8) |
                              (static_cast<std::uint32_t>(b[2]) << 16) |
                              (static_cast<std::uint32_t>(b[3]) << 24);
      p->value[i] = std::bit_cast<float>(u);
    }
  }
}

}  // namespace accentlab::nn
