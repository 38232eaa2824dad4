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
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "accentlab/audio/features.hpp"

namespace accentlab::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitIo = 3,
  kExitNumeric = 4,
  kExitMismatch = 5,
};

/// Entry point shared by the executable and the tests. argv[0] is the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Explicit seed, else $ACCENTLAB_SEED, else 0. Throws std::invalid_argument
/// for a malformed environment value.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag);

/// Creates `<base>/<YYYYmmdd-HHMMSS>-seed<N>`, adding a numeric suffix when
/// that directory already exists.
std::filesystem::path make_run_dir(const std::filesystem::path& base, std::uint64_t seed);

/// Binary greyscale Netpbm image (P5), one pixel per matrix cell: width =
/// columns, height = rows. Values are min-max scaled to 0..255.
std::string encode_pgm(const audio::FeatureMatrix& m);

/// Parses the text written by encode_pgm; returns {width, height}.
std::pair<int, int> pgm_dimensions(const std::string& bytes);

}  // namespace accentlab::cli
