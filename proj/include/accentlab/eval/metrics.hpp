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
#include <string>
#include <vector>

namespace accentlab::eval {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  int n = 0;
  std::vector<std::int64_t> counts;
  std::vector<std::string> class_names;

  std::int64_t at(int truth, int pred) const { return counts[truth * n + pred]; }
  std::int64_t row_sum(int truth) const;
  std::int64_t total() const;
};

struct ClassificationReport {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<double> precision, recall, f1;
};

/// Throws LabelError for a label outside [0, n) and DataError for empty or
/// mismatched inputs. Per-class F1 is 0 when precision + recall is 0.
ClassificationReport classification_report(std::span<const int> truth, std::span<const int> pred,
                                           int n, std::vector<std::string> class_names = {});

/// Counts, then the row-normalized matrix; "true\pred" header row.
std::string confusion_csv(const ConfusionMatrix& m);
std::string confusion_normalized_csv(const ConfusionMatrix& m);
void write_confusion_csvs(const std::filesystem::path& counts_path,
                          const std::filesystem::path& normalized_path, const ConfusionMatrix& m);

/// Detection trials; label 1 marks a target trial. A trial is accepted at
/// threshold t when score >= t.
struct ScoreSet {
  std::vector<double> scores;
  std::vector<int> labels;
};

struct OperatingPoint {
  double threshold;
  double far;  // non-targets accepted / non-targets
  double frr;  // targets rejected / targets
};

/// One point per distinct score plus +infinity, in increasing threshold
/// order. Throws MetricError unless both labels are present.
std::vector<OperatingPoint> operating_points(const ScoreSet& set);

/// Equal error rate, linearly interpolated where FRR - FAR changes sign.
/// A result above 0.5 means the scores are inverted; the rate of the
/// negated scores is returned instead, so the value always lies in [0, 0.5].
double eer(const ScoreSet& set);

/// min over thresholds of p*P_miss + (1-p)*P_fa, divided by min(p, 1-p).
double min_dcf(const ScoreSet& set, double p_target);

/// Shared by eer(): interpolation of a FAR/FRR sweep, no normalization.
double eer_from_points(const std::vector<OperatingPoint>& pts);

}  // namespace accentlab::eval
