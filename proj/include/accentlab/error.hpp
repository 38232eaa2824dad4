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

#include <stdexcept>
#include <string>

namespace accentlab {

/// Root of every error thrown by the library. Each subclass names one
/// failure family so callers (and the CLI's exit-code mapping) can
/// dispatch on type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Audio containers.
class FormatError : public Error { using Error::Error; };
class UnsupportedFormatError : public Error { using Error::Error; };
class TooShortError : public Error { using Error::Error; };

// Feature transforms.
class StateError : public Error { using Error::Error; };

// Tensor engine.
class ShapeError : public Error { using Error::Error; };
class LabelError : public Error { using Error::Error; };
class CheckpointError : public Error { using Error::Error; };
class WiringError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };

// Data and metrics.
class DataError : public Error { using Error::Error; };
class UnknownProvinceError : public Error { using Error::Error; };
class MetricError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

}  // namespace accentlab
