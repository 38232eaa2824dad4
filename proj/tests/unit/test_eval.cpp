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

#include <cmath>
#include <vector>

#include "../support/metric_oracle.hpp"
#include "accentlab/error.hpp"
#include "accentlab/eval/metrics.hpp"
#include "accentlab/rng.hpp"
#include "doctest.h"

using namespace accentlab;
using namespace accentlab::eval;

TEST_CASE("classification report on fixtures") {
  SUBCASE("perfect") {
    const std::vector<int> y{0, 1, 2, 3, 4, 4, 2};
    const auto r = classification_report(y, y, 5);
    CHECK(r.accuracy == 1.0);
    CHECK(r.macro_f1 == 1.0);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        if (i != j) CHECK(r.confusion.at(i, j) == 0);
      }
    }
  }
  SUBCASE("hand computed") {
    const std::vector<int> t{0, 0, 1, 1}, p{0, 1, 1, 1};
    const auto r = classification_report(t, p, 2);
    CHECK(r.accuracy == doctest::Approx(0.75));
    // class 0: P = 1, R = 1/2; class 1: P = 2/3, R = 1
    CHECK(r.precision[0] == doctest::Approx(1.0));
    CHECK(r.recall[0] == doctest::Approx(0.5));
    CHECK(r.precision[1] == doctest::Approx(2.0 / 3.0));
    CHECK(r.recall[1] == doctest::Approx(1.0));
    CHECK(r.f1[0] == doctest::Approx(2.0 / 3.0));
    CHECK(r.f1[1] == doctest::Approx(0.8));
    CHECK(r.macro_f1 == doctest::Approx((2.0 / 3.0 + 0.8) / 2));
  }
  SUBCASE("constant predictor") {
    std::vector<int> t, p;
    for (int c = 0; c < 5; ++c) {
      for (int k = 0; k < 4; ++k) {
        t.push_back(c);
        p.push_back(0);
      }
    }
    const auto r = classification_report(t, p, 5);
    CHECK(r.accuracy == doctest::Approx(0.2));
    CHECK(r.f1[1] == 0.0);
  }
  SUBCASE("errors") {
    const std::vector<int> a{0, 5}, b{0, 1};
    CHECK_THROWS_AS(classification_report(a, b, 5), LabelError);
    CHECK_THROWS_AS(classification_report(std::vector<int>{0}, b, 5), DataError);
  }
}

TEST_CASE("confusion invariants on random labels") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> t, p;
    const int n = static_cast<int>(rng.uniform_int(1, 60));
    for (int i = 0; i < n; ++i) {
      t.push_back(static_cast<int>(rng.uniform_int(0, 4)));
      p.push_back(static_cast<int>(rng.uniform_int(0, 4)));
    }
    const auto r = classification_report(t, p, 5);
    CHECK(r.confusion.total() == n);
    int correct = 0;
    std::vector<int> per(5, 0);
    for (int i = 0; i < n; ++i) {
      correct += t[i] == p[i];
      ++per[t[i]];
    }
    CHECK(r.accuracy == static_cast<double>(correct) / n);
    for (int c = 0; c < 5; ++c) CHECK(r.confusion.row_sum(c) == per[c]);
  }
}

TEST_CASE("confusion csv export") {
  const std::vector<int> t{0, 0, 1, 1}, p{0, 1, 1, 1};
  const auto r = classification_report(t, p, 2, {"a", "b"});
  CHECK(confusion_csv(r.confusion) == "true\\pred,a,b\na,1,1\nb,0,2\n");
  CHECK(confusion_normalized_csv(r.confusion) ==
        "true\\pred,a,b\na,0.500000,0.500000\nb,0.000000,1.000000\n");
}

TEST_CASE("eer and min_dcf closed cases") {
  ScoreSet sep{{0.1, 0.2, 0.3, 0.8, 0.9}, {0, 0, 0, 1, 1}};
  CHECK(eer(sep) == 0.0);
  CHECK(min_dcf(sep, 0.01) == 0.0);
  ScoreSet same{{0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}};
  CHECK(eer(same) == doctest::Approx(0.5));
  CHECK(min_dcf(same, 0.01) == doctest::Approx(1.0));
  CHECK(min_dcf(same, 0.3) == doctest::Approx(1.0));
  CHECK_THROWS_AS(eer(ScoreSet{{1, 2}, {1, 1}}), MetricError);
  CHECK_THROWS_AS(min_dcf(sep, 0.0), MetricError);
}

TEST_CASE("20-point hand-built set matches the brute-force sweep") {
  const std::vector<double> s{0.91, 0.85, 0.85, 0.77, 0.74, 0.70, 0.66, 0.61, 0.60, 0.55,
                              0.52, 0.49, 0.45, 0.41, 0.41, 0.33, 0.30, 0.22, 0.15, 0.05};
  const std::vector<int> y{1, 1, 0, 1, 1, 0, 1, 0, 1, 1, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0};
  ScoreSet set{s, y};
  CHECK(eer(set) == oracle::eer(s, y));
  CHECK(min_dcf(set, 0.01) == oracle::min_dcf(s, y, 0.01));
  CHECK(eer(set) > 0.0);
  CHECK(eer(set) < 0.5);
}

TEST_CASE("random score sets match the oracle and respect bounds") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < 50; ++i) {
      const int label = i < 2 ? i : static_cast<int>(rng.uniform_int(0, 1));
      y.push_back(label);
      // Coarse rounding makes ties common.
      s.push_back(std::round((rng.normal() + 0.8 * label) * 8) / 8);
    }
    ScoreSet set{s, y};
    const double e = eer(set);
    CHECK(e == oracle::eer(s, y));
    CHECK(e >= 0.0);
    CHECK(e <= 0.5);
    for (double p : {0.01, 0.1, 0.5}) {
      const double d = min_dcf(set, p);
      CHECK(d == oracle::min_dcf(s, y, p));
      CHECK(d >= 0.0);
      CHECK(d <= 1.0);
    }
    // Strictly increasing transform leaves both metrics unchanged.
    ScoreSet warped = set;
    for (auto& v : warped.scores) v = std::exp(3 * v) + 1;
    CHECK(eer(warped) == e);
    CHECK(min_dcf(warped, 0.01) == min_dcf(set, 0.01));
  }
}
