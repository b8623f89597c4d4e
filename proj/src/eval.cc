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

#include "entrank/eval.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "entrank/embeddings.h"
#include "entrank/status.h"
#include "entrank/text.h"

namespace entrank {

QrelMap MakeQrelMap(std::span<const Qrel> qrels) {
  QrelMap out;
  for (const Qrel &q : qrels) out[q.query_id][q.doc_id] = q.grade;
  return out;
}

namespace {

template <typename GetId>
double Ndcg(size_t n, GetId id_at, const std::map<std::string, int> &judgments,
            int k) {
  if (k < 1) throw Error(ErrorCode::kConfig, "NDCG cutoff must be at least 1");
  std::vector<int> grades;
  for (const auto &[doc, grade] : judgments) grades.push_back(std::max(grade, 0));
  std::sort(grades.rbegin(), grades.rend());
  double ideal = 0.0;
  for (size_t i = 0; i < grades.size() && i < static_cast<size_t>(k); ++i) {
    ideal += grades[i] / std::log2(static_cast<double>(i) + 2.0);
  }
  if (ideal == 0.0) return 0.0;
  double dcg = 0.0;
  for (size_t i = 0; i < n && i < static_cast<size_t>(k); ++i) {
    auto it = judgments.find(id_at(i));
    if (it == judgments.end() || it->second <= 0) continue;
    dcg += it->second / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg / ideal;
}

const std::map<std::string, int> &EmptyJudgments() {
  static const std::map<std::string, int> empty;
  return empty;
}

}  // namespace

double NdcgAtK(std::span<const std::string> ranking,
               const std::map<std::string, int> &judgments, int k) {
  return Ndcg(
      ranking.size(), [&](size_t i) -> const std::string & { return ranking[i]; },
      judgments, k);
}

double NdcgAtK(std::span<const RunEntry> ranking,
               const std::map<std::string, int> &judgments, int k) {
  return Ndcg(
      ranking.size(),
      [&](size_t i) -> const std::string & { return ranking[i].doc_id; },
      judgments, k);
}

EvalReport EvaluateRun(const Run &run, const QrelMap &qrels,
                       std::span<const int> cutoffs) {
  if (cutoffs.empty()) throw Error(ErrorCode::kConfig, "no NDCG cutoffs given");
  EvalReport report;
  report.cutoffs.assign(cutoffs.begin(), cutoffs.end());
  std::set<std::string> ids;
  for (const auto &[qid, entries] : run.queries) ids.insert(qid);
  for (const auto &[qid, judged] : qrels) ids.insert(qid);
  static const std::vector<RunEntry> kEmptyRanking;
  for (const std::string &qid : ids) {
    auto r = run.queries.find(qid);
    auto j = qrels.find(qid);
    if (j == qrels.end()) {
      report.warnings.push_back("query " + qid + " has no judgments; scored 0");
    }
    if (r == run.queries.end() || r->second.empty()) {
      report.warnings.push_back("query " + qid + " has no ranked documents; scored 0");
    }
    const std::vector<RunEntry> &ranking =
        r == run.queries.end() ? kEmptyRanking : r->second;
    const std::map<std::string, int> &judged =
        j == qrels.end() ? EmptyJudgments() : j->second;
    std::vector<double> &values = report.per_query[qid];
    for (int k : cutoffs) values.push_back(NdcgAtK(ranking, judged, k));
  }
  report.means.assign(cutoffs.size(), 0.0);
  for (size_t c = 0; c < cutoffs.size(); ++c) {
    double sum = 0.0;
    for (const auto &[qid, values] : report.per_query) sum += values[c];
    if (!report.per_query.empty()) {
      report.means[c] = sum / static_cast<double>(report.per_query.size());
    }
  }
  return report;
}

std::string EvalReport::ToTsv() const {
  std::string out = "query_id";
  for (int k : cutoffs) out += "\tndcg@" + std::to_string(k);
  out += '\n';
  for (const auto &[qid, values] : per_query) {
    out += qid;
    for (double v : values) out += '\t' + FormatDouble(v);
    out += '\n';
  }
  out += "all";
  for (double v : means) out += '\t' + FormatDouble(v);
  out += '\n';
  return out;
}

// Continued fraction for I_x(a, b), evaluated with the modified Lentz method.
static double BetaFraction(double a, double b, double x) {
  constexpr int kMaxIterations = 1000;
  constexpr double kEpsilon = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEpsilon) break;
  }
  return h;
}

double IncompleteBeta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw Error(ErrorCode::kInvalid, "incomplete beta needs a, b > 0");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges quickly only on the near side of the mean.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * BetaFraction(a, b, x) / a;
  return 1.0 - front * BetaFraction(b, a, 1.0 - x) / b;
}

double StudentTTwoTailed(double t, double df) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  return IncompleteBeta(df / 2.0, 0.5, df / (df + t * t));
}

TTestResult PairedTTest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "paired samples differ in length: " + std::to_string(a.size()) +
                    " vs " + std::to_string(b.size()));
  }
  if (a.size() < 2) {
    throw Error(ErrorCode::kLengthMismatch, "paired t-test needs at least two pairs");
  }
  const size_t n = a.size();
  std::vector<double> d(n);
  for (size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  TTestResult r;
  r.df = static_cast<int>(n) - 1;
  if (std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; })) {
    return r;  // t = 0, p = 1
  }
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) {
    r.t = mean > 0 ? std::numeric_limits<double>::infinity()
                   : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p = StudentTTwoTailed(r.t, r.df);
  return r;
}

std::pair<std::vector<double>, std::vector<double>> AlignedScores(
    const EvalReport &a, const EvalReport &b, int cutoff) {
  auto column = [cutoff](const EvalReport &r) {
    auto it = std::find(r.cutoffs.begin(), r.cutoffs.end(), cutoff);
    if (it == r.cutoffs.end()) {
      throw Error(ErrorCode::kConfig, "report lacks cutoff " + std::to_string(cutoff));
    }
    return static_cast<size_t>(it - r.cutoffs.begin());
  };
  const size_t ca = column(a), cb = column(b);
  std::pair<std::vector<double>, std::vector<double>> out;
  for (const auto &[qid, values] : a.per_query) {
    auto it = b.per_query.find(qid);
    if (it == b.per_query.end()) continue;
    out.first.push_back(values[ca]);
    out.second.push_back(it->second[cb]);
  }
  return out;
}

// ---------------------------------------------------------------------------

MentionCategory QueryCategory(const Collection &collection,
                              std::string_view query_id, const Vocabulary &vocab) {
  std::vector<Annotation> annotations = collection.AnnotationsFor(query_id);
  return CategorizeAnnotations(annotations, vocab);
}

CategoryReport BuildCategoryReport(const Run &run_a, const Run &run_b,
                                   const Collection &collection,
                                   const Vocabulary &vocab, int cutoff) {
  struct Bucket {
    int count = 0;
    double sum_a = 0.0, sum_b = 0.0;
  };
  std::map<MentionCategory, Bucket> buckets;
  static const std::vector<RunEntry> kEmpty;
  auto ranking = [](const Run &run, const std::string &qid) -> const std::vector<RunEntry> & {
    auto it = run.queries.find(qid);
    return it == run.queries.end() ? kEmpty : it->second;
  };
  for (const Query &q : collection.queries()) {
    const std::map<std::string, int> *judged = collection.Judgments(q.query_id);
    const std::map<std::string, int> &j = judged ? *judged : EmptyJudgments();
    Bucket &b = buckets[QueryCategory(collection, q.query_id, vocab)];
    ++b.count;
    b.sum_a += NdcgAtK(ranking(run_a, q.query_id), j, cutoff);
    b.sum_b += NdcgAtK(ranking(run_b, q.query_id), j, cutoff);
  }
  CategoryReport report;
  report.cutoff = cutoff;
  for (MentionCategory c : kAllCategories) {
    auto it = buckets.find(c);
    if (it == buckets.end()) continue;
    const Bucket &b = it->second;
    report.rows.push_back({c, b.count, b.sum_a / b.count, b.sum_b / b.count});
  }
  return report;
}

std::string CategoryReport::ToTsv() const {
  const std::string k = std::to_string(cutoff);
  std::string out = "category\tqueries\tndcg@" + k + "_a\tndcg@" + k + "_b\n";
  for (const CategoryRow &r : rows) {
    out += std::string(MentionCategoryName(r.category)) + "\t" +
           std::to_string(r.count) + "\t" + FormatDouble(r.mean_a) + "\t" +
           FormatDouble(r.mean_b) + "\n";
  }
  return out;
}

int Crosstab::at(MentionCategory c, QueryType t) const {
  auto it = cells.find({c, t});
  return it == cells.end() ? 0 : it->second;
}

Crosstab BuildCrosstab(const Collection &collection, const Vocabulary &vocab) {
  Crosstab x;
  for (const Query &q : collection.queries()) {
    const MentionCategory c = QueryCategory(collection, q.query_id, vocab);
    ++x.cells[{c, q.query_type}];
    ++x.row_totals[c];
    ++x.column_totals[q.query_type];
    ++x.total;
  }
  return x;
}

std::string Crosstab::ToTsv() const {
  std::string out = "category";
  for (QueryType t : kAllQueryTypes) out += "\t" + std::string(QueryTypeName(t));
  out += "\ttotal\n";
  auto count = [](const auto &m, auto key) {
    auto it = m.find(key);
    return it == m.end() ? 0 : it->second;
  };
  for (MentionCategory c : kAllCategories) {
    out += std::string(MentionCategoryName(c));
    for (QueryType t : kAllQueryTypes) out += "\t" + std::to_string(at(c, t));
    out += "\t" + std::to_string(count(row_totals, c)) + "\n";
  }
  out += "total";
  for (QueryType t : kAllQueryTypes) {
    out += "\t" + std::to_string(count(column_totals, t));
  }
  out += "\t" + std::to_string(total) + "\n";
  return out;
}

// ---------------------------------------------------------------------------

std::vector<EmbeddingRow> ExportFinalEmbeddings(const EncoderWeights &weights,
                                                const EntityVectors *entities,
                                                std::span<const ProbeInput> inputs,
                                                int max_entities) {
  std::vector<EmbeddingRow> rows;
  for (const ProbeInput &probe : inputs) {
    const ScoreOutput out = Forward(weights, probe.input, entities);
    int emitted = 0;
    const std::vector<Token> &tokens = probe.input.tokens;
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i].kind != TokenKind::kEntity) continue;
      if (max_entities > 0 && emitted >= max_entities) break;
      ++emitted;
      const std::string entity_id = tokens[i].surface.substr(kEntityPrefix.size());
      auto vec = [&](size_t pos) {
        std::span<const double> r = out.final_hidden.row(pos);
        return std::vector<double>(r.begin(), r.end());
      };
      rows.push_back({"entity", tokens[i].surface, probe.query_id, entity_id, vec(i)});
      for (size_t j = i; j-- > 0;) {
        if (tokens[j].kind == TokenKind::kWordPiece && !tokens[j].continuation()) {
          rows.push_back({"mention", tokens[j].surface, probe.query_id, entity_id, vec(j)});
          break;
        }
      }
    }
  }
  return rows;
}

std::string EmbeddingRowsToTsv(std::span<const EmbeddingRow> rows) {
  std::string out = "kind\tsurface\tquery_id\tentity_id\tvector\n";
  for (const EmbeddingRow &r : rows) {
    out += r.kind + "\t" + r.surface + "\t" + r.query_id + "\t" + r.entity_id + "\t";
    for (size_t i = 0; i < r.vector.size(); ++i) {
      if (i > 0) out += ' ';
      out += FormatDouble(r.vector[i]);
    }
    out += '\n';
  }
  return out;
}

ClusterProbe ProbeClusters(std::span<const EmbeddingRow> rows,
                           const std::map<std::string, int> &group_of) {
  std::vector<std::pair<const EmbeddingRow *, int>> grouped;
  for (const EmbeddingRow &r : rows) {
    if (r.kind != "entity") continue;
    auto it = group_of.find(r.entity_id);
    if (it != group_of.end()) grouped.push_back({&r, it->second});
  }
  ClusterProbe probe;
  double intra = 0.0, inter = 0.0;
  for (size_t i = 0; i < grouped.size(); ++i) {
    for (size_t j = i + 1; j < grouped.size(); ++j) {
      // Two occurrences of one entity say nothing about clustering.
      if (grouped[i].first->entity_id == grouped[j].first->entity_id) continue;
      const double c = Cosine(grouped[i].first->vector, grouped[j].first->vector);
      if (grouped[i].second == grouped[j].second) {
        intra += c;
        ++probe.intra_pairs;
      } else {
        inter += c;
        ++probe.inter_pairs;
      }
    }
  }
  if (probe.intra_pairs) probe.intra = intra / static_cast<double>(probe.intra_pairs);
  if (probe.inter_pairs) probe.inter = inter / static_cast<double>(probe.inter_pairs);
  return probe;
}

std::vector<AttentionWeight> ExportAttention(const EncoderWeights &weights,
                                             const EntityVectors *entities,
                                             const ModelInput &input) {
  const ScoreOutput out = Forward(weights, input, entities);
  const Matrix &a = out.attentions.at(0).at(0);
  std::vector<AttentionWeight> result;
  for (size_t j = 0; j < input.size(); ++j) {
    result.push_back({input.tokens[j].surface, a(0, j)});
  }
  return result;
}

std::string AttentionToTsv(std::string_view query_id, std::string_view doc_id,
                           std::span<const AttentionWeight> weights) {
  std::string out = "query_id\tdoc_id\tposition\ttoken\tweight\n";
  for (size_t i = 0; i < weights.size(); ++i) {
    out += std::string(query_id) + "\t" + std::string(doc_id) + "\t" +
           std::to_string(i) + "\t" + weights[i].surface + "\t" +
           FormatDouble(weights[i].weight) + "\n";
  }
  return out;
}

}  // namespace entrank
