# Copyright 2026 The accentlab Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#  http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Accent recognition and conversion toolkit."""

from ._core import (
    Error,
    class_names,
    classification_report,
    eer,
    griffin_lim,
    mfcc,
    min_dcf,
    model_summary,
    read_wav,
    relative_spectral_error,
    run_cli,
    stft_magnitude,
    write_wav,
)

__all__ = [
    "Error",
    "class_names",
    "classification_report",
    "eer",
    "griffin_lim",
    "mfcc",
    "min_dcf",
    "model_summary",
    "read_wav",
    "relative_spectral_error",
    "run_cli",
    "stft_magnitude",
    "write_wav",
]
