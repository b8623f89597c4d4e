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

#ifndef ENTRANK_EVAL_H_
#define ENTRANK_EVAL_H_

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "entrank/alignment.h"
#include "entrank/corpus.h"
#include "entrank/encoder.h"
#include "entrank/pipeline.h"
#include "entrank/tokenizer.h"

namespace entrank {

// query_id -> doc_id -> grade.
using QrelMap = std::map<std::string, std::map<std::string, int>>;
QrelMap MakeQrelMap(std::span<const Qrel> qrels);

// Linear-gain NDCG@k. The ideal DCG uses every judged document of the query;
// queries without relevant documents score 0. Throws ConfigError if k < 1.
double NdcgAtK(std::span<const std::string> ranking,
               const std::map<std::string, int> &judgments, int k);
double NdcgAtK(std::span<const RunEntry> ranking,
               const std::map<std::string, int> &judgments, int k);

struct EvalReport {
  std::vector<int> cutoffs;
  // query_id -> one value per cutoff.
  std::map<std::string, std::vector<double>> per_query;
  std::vector<double> means;  // one per cutoff
  std::vector<std::string> warnings;

  // "query_id<TAB>ndcg@k..." rows, then the "all" row of means.
  std::string ToTsv() const;
};

// Scores the union of run and qrels queries; queries missing from either
// side contribute 0 and a warning.
EvalReport EvaluateRun(const Run &run, const QrelMap &qrels,
                       std::span<const int> cutoffs);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;  // two-tailed
  int df = 0;
};

// Regularized incomplete beta I_x(a, b).
double IncompleteBeta(double a, double b, double x);
// P(|T| >= |t|) for Student's t with df degrees of freedom.
double StudentTTwoTailed(double t, double df);
// Paired two-tailed t-test on a - b. Throws LengthMismatch when lengths
// differ or fewer than two pairs are given.
TTestResult PairedTTest(std::span<const double> a, std::span<const double> b);

// Per-query values of one cutoff for the queries both reports share.
std::pair<std::vector<double>, std::vector<double>> AlignedScores(
    const EvalReport &a, const EvalReport &b, int cutoff);

// Category of a query: most severe category over its annotations.
MentionCategory QueryCategory(const Collection &collection,
                              std::string_view query_id, const Vocabulary &vocab);

struct CategoryRow {
  MentionCategory category = MentionCategory::kNoEntity;
  int count = 0;
  double mean_a = 0.0;  // NDCG@cutoff
  double mean_b = 0.0;
};

struct CategoryReport {
  int cutoff = 10;
  std::vector<CategoryRow> rows;  // only categories with queries
  std::string ToTsv() const;
};

// Buckets the collection's queries by mention category and averages each
// run's NDCG@cutoff per bucket. Queries missing from a run score 0.
CategoryReport BuildCategoryReport(const Run &run_a, const Run &run_b,
                                   const Collection &collection,
                                   const Vocabulary &vocab, int cutoff = 10);

struct Crosstab {
  // (category, query type) -> count
  std::map<std::pair<MentionCategory, QueryType>, int> cells;
  std::map<MentionCategory, int> row_totals;
  std::map<QueryType, int> column_totals;
  int total = 0;

  int at(MentionCategory c, QueryType t) const;
  std::string ToTsv() const;
};

Crosstab BuildCrosstab(const Collection &collection, const Vocabulary &vocab);

// One model input to inspect, tagged with the query it came from.
struct ProbeInput {
  std::string query_id;
  ModelInput input;
};

struct EmbeddingRow {
  std::string kind;  // "entity" or "mention"
  std::string surface;
  std::string query_id;
  std::string entity_id;  // the entity the row belongs to
  std::vector<double> vector;
};

// Final-layer vectors of entity tokens and of the first word-initial piece
// before each of them. At most `max_entities` entities per input (0 = all).
std::vector<EmbeddingRow> ExportFinalEmbeddings(
    const EncoderWeights &weights, const EntityVectors *entities,
    std::span<const ProbeInput> inputs, int max_entities = 0);

std::string EmbeddingRowsToTsv(std::span<const EmbeddingRow> rows);

struct ClusterProbe {
  double intra = 0.0;  // mean cosine of entity rows in the same group
  double inter = 0.0;  // mean cosine across groups
  size_t intra_pairs = 0;
  size_t inter_pairs = 0;
};

// Uses "entity" rows whose entity_id has a group.
ClusterProbe ProbeClusters(std::span<const EmbeddingRow> rows,
                           const std::map<std::string, int> &group_of);

struct AttentionWeight {
  std::string surface;
  double weight = 0.0;
};

// [CLS] row of layer 0, head 0.
std::vector<AttentionWeight> ExportAttention(const EncoderWeights &weights,
                                             const EntityVectors *entities,
                                             const ModelInput &input);
std::string AttentionToTsv(std::string_view query_id, std::string_view doc_id,
                           std::span<const AttentionWeight> weights);

}  // namespace entrank

#endif  // ENTRANK_EVAL_H_
