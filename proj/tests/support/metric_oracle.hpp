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

// Brute-force detection metrics: every candidate threshold is scored by
// recounting all trials. Quadratic, but shares no code with the library.

#include <algorithm>
#include <limits>
#include <set>
#include <vector>

namespace oracle {

struct Point {
  double far, frr;
};

inline std::vector<Point> sweep(const std::vector<double>& s, const std::vector<int>& y) {
  std::set<double> uniq(s.begin(), s.end());
  std::vector<double> thresholds(uniq.begin(), uniq.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());
  std::vector<Point> out;
  for (double t : thresholds) {
    long fa = 0, miss = 0, nt = 0, nn = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (y[i] == 1) {
        ++nt;
        if (s[i] < t) ++miss;
      } else {
        ++nn;
        if (s[i] >= t) ++fa;
      }
    }
    out.push_back({static_cast<double>(fa) / static_cast<double>(nn),
                   static_cast<double>(miss) / static_cast<double>(nt)});
  }
  return out;
}

inline double raw_eer(const std::vector<double>& s, const std::vector<int>& y) {
  const auto pts = sweep(s, y);
  std::size_t k = 0;
  while (pts[k].frr - pts[k].far < 0) ++k;
  if (k == 0) return pts[0].far;
  const double a = pts[k - 1].frr - pts[k - 1].far;
  const double b = pts[k].frr - pts[k].far;
  const double t = -a / (b - a);
  return pts[k - 1].far + t * (pts[k].far - pts[k - 1].far);
}

inline double eer(const std::vector<double>& s, const std::vector<int>& y) {
  const double e = raw_eer(s, y);
  if (e <= 0.5) return e;
  std::vector<double> neg(s);
  for (auto& v : neg) v = -v;
  return std::min(e, raw_eer(neg, y));
}

inline double min_dcf(const std::vector<double>& s, const std::vector<int>& y, double p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& pt : sweep(s, y)) best = std::min(best, p * pt.frr + (1 - p) * pt.far);
  return best / std::min(p, 1 - p);
}

}  // namespace oracle
