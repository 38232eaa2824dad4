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

#include "accentlab/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "accentlab/error.hpp"

namespace accentlab::eval {

std::int64_t ConfusionMatrix::row_sum(int truth) const {
  std::int64_t s = 0;
  for (int j = 0; j < n; ++j) s += at(truth, j);
  return s;
}

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ClassificationReport classification_report(std::span<const int> truth, std::span<const int> pred,
                                           int n, std::vector<std::string> class_names) {
  if (n < 1) throw DataError("class count must be positive");
  if (truth.size() != pred.size()) throw DataError("truth and prediction lengths differ");
  if (truth.empty()) throw DataError("classification report needs at least one sample");
  if (class_names.empty()) {
    for (int i = 0; i < n; ++i) class_names.push_back(std::to_string(i));
  }
  if (static_cast<int>(class_names.size()) != n) throw DataError("class name count mismatch");

  ClassificationReport r;
  r.confusion.n = n;
  r.confusion.counts.assign(static_cast<std::size_t>(n) * n, 0);
  r.confusion.class_names = std::move(class_names);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= n || pred[i] < 0 || pred[i] >= n) {
      throw LabelError("label outside [0, " + std::to_string(n) + ") at index " +
                       std::to_string(i));
    }
    ++r.confusion.counts[truth[i] * n + pred[i]];
  }
  std::int64_t diag = 0;
  for (int c = 0; c < n; ++c) {
    const std::int64_t tp = r.confusion.at(c, c);
    std::int64_t col = 0;
    for (int t = 0; t < n; ++t) col += r.confusion.at(t, c);
    const std::int64_t row = r.confusion.row_sum(c);
    const double p = col ? static_cast<double>(tp) / col : 0.0;
    const double rec = row ? static_cast<double>(tp) / row : 0.0;
    r.precision.push_back(p);
    r.recall.push_back(rec);
    r.f1.push_back(p + rec > 0 ? 2 * p * rec / (p + rec) : 0.0);
    diag += tp;
  }
  r.accuracy = static_cast<double>(diag) / static_cast<double>(truth.size());
  r.macro_f1 = std::accumulate(r.f1.begin(), r.f1.end(), 0.0) / n;
  return r;
}

namespace {

std::string header(const ConfusionMatrix& m) {
  std::string out = "true\\pred";
  for (const auto& name : m.class_names) out += "," + name;
  return out + "\n";
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("short write to " + p.string());
}

}  // namespace

std::string confusion_csv(const ConfusionMatrix& m) {
  std::string out = header(m);
  for (int i = 0; i < m.n; ++i) {
    out += m.class_names[i];
    for (int j = 0; j < m.n; ++j) out += "," + std::to_string(m.at(i, j));
    out += "\n";
  }
  return out;
}

std::string confusion_normalized_csv(const ConfusionMatrix& m) {
  std::string out = header(m);
  char buf[32];
  for (int i = 0; i < m.n; ++i) {
    out += m.class_names[i];
    const std::int64_t row = m.row_sum(i);
    for (int j = 0; j < m.n; ++j) {
      std::snprintf(buf, sizeof buf, ",%.6f", row ? static_cast<double>(m.at(i, j)) / row : 0.0);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

void write_confusion_csvs(const std::filesystem::path& counts_path,
                          const std::filesystem::path& normalized_path, const ConfusionMatrix& m) {
  write_text(counts_path, confusion_csv(m));
  write_text(normalized_path, confusion_normalized_csv(m));
}

std::vector<OperatingPoint> operating_points(const ScoreSet& set) {
  if (set.scores.size() != set.labels.size()) throw MetricError("scores and labels differ in length");
  std::vector<std::size_t> order(set.scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return set.scores[a] < set.scores[b]; });
  std::int64_t n_target = 0, n_non = 0;
  for (std::size_t i = 0; i < set.labels.size(); ++i) {
    if (!std::isfinite(set.scores[i])) throw MetricError("scores must be finite");
    if (set.labels[i] == 1) {
      ++n_target;
    } else if (set.labels[i] == 0) {
      ++n_non;
    } else {
      throw MetricError("labels must be 0 or 1");
    }
  }
  if (n_target == 0 || n_non == 0) {
    throw MetricError("detection metrics need both target and non-target trials");
  }
  // Walking upward through the sorted scores, everything strictly below
  // the current threshold is rejected.
  std::vector<OperatingPoint> pts;
  std::int64_t targets_below = 0, non_below = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double t = set.scores[order[i]];
    pts.push_back({t, static_cast<double>(n_non - non_below) / static_cast<double>(n_non),
                   static_cast<double>(targets_below) / static_cast<double>(n_target)});
    while (i < order.size() && set.scores[order[i]] == t) {
      (set.labels[order[i]] == 1 ? targets_below : non_below)++;
      ++i;
    }
  }
  pts.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  return pts;
}

double eer_from_points(const std::vector<OperatingPoint>& pts) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = pts[i].frr - pts[i].far;
    if (d < 0) continue;
    if (i == 0) return pts[0].far;
    const double d_prev = pts[i - 1].frr - pts[i - 1].far;
    const double t = -d_prev / (d - d_prev);
    return pts[i - 1].far + t * (pts[i].far - pts[i - 1].far);
  }
  return 1.0;  // unreachable: the +inf point has FRR 1 >= FAR 0
}

double eer(const ScoreSet& set) {
  const double raw = eer_from_points(operating_points(set));
  if (raw <= 0.5) return raw;
  ScoreSet neg = set;
  for (auto& s : neg.scores) s = -s;
  return std::min(raw, eer_from_points(operating_points(neg)));
}

double min_dcf(const ScoreSet& set, double p_target) {
  if (!(p_target > 0.0 && p_target < 1.0)) throw MetricError("p_target must lie in (0, 1)");
  const auto pts = operating_points(set);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) best = std::min(best, p_target * p.frr + (1 - p_target) * p.far);
  return best / std::min(p_target, 1 - p_target);
}

}  // namespace accentlab::eval
