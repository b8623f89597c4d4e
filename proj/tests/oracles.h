// Copyright 2026 The Entrank Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Independent reference implementations used by the tests. They share no
// code with the library beyond plain data types.

#ifndef ENTRANK_TESTS_ORACLES_H_
#define ENTRANK_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace entrank::oracle {

// NDCG@k with linear gain; the ideal ordering uses every judged grade.
inline double Ndcg(const std::vector<std::string> &ranking,
                   const std::map<std::string, int> &judged, int k) {
  double dcg = 0.0;
  for (int i = 0; i < k && i < static_cast<int>(ranking.size()); ++i) {
    auto it = judged.find(ranking[i]);
    const int g = it == judged.end() ? 0 : std::max(it->second, 0);
    dcg += g / std::log2(i + 2.0);
  }
  std::vector<int> grades;
  for (const auto &[doc, g] : judged) grades.push_back(std::max(g, 0));
  std::sort(grades.rbegin(), grades.rend());
  double ideal = 0.0;
  for (int i = 0; i < k && i < static_cast<int>(grades.size()); ++i) {
    ideal += grades[i] / std::log2(i + 2.0);
  }
  return ideal > 0.0 ? dcg / ideal : 0.0;
}

// Scores every document from raw word lists and sorts with the tie rule.
inline std::vector<std::pair<std::string, double>> ExhaustiveBm25(
    const std::vector<std::pair<std::string, std::vector<std::string>>> &docs,
    const std::vector<std::string> &query, double k1, double b) {
  const double n = static_cast<double>(docs.size());
  double total = 0.0;
  for (const auto &[id, words] : docs) total += static_cast<double>(words.size());
  const double avgdl = total / n;
  std::vector<std::pair<std::string, double>> scored;
  for (const auto &[id, words] : docs) {
    double score = 0.0;
    for (const std::string &term : query) {
      int df = 0;
      for (const auto &[other, w] : docs) {
        if (std::find(w.begin(), w.end(), term) != w.end()) ++df;
      }
      const double tf = static_cast<double>(std::count(words.begin(), words.end(), term));
      if (tf == 0.0) continue;
      const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
      const double dl = static_cast<double>(words.size());
      score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl));
    }
    scored.emplace_back(id, score);
  }
  std::sort(scored.begin(), scored.end(), [](const auto &x, const auto &y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  return scored;
}

// Binary cross-entropy of a probability.
inline double LogLoss(double s, int label) {
  return label ? -std::log(s) : -std::log(1.0 - s);
}

}  // namespace entrank::oracle

#endif  // ENTRANK_TESTS_ORACLES_H_
