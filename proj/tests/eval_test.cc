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


#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "entrank/alignment.h"
#include "entrank/eval.h"
#include "entrank/status.h"
#include "oracles.h"

namespace entrank {
namespace {

const std::string kVocab = std::string(ENTRANK_TEST_DATA) + "/fixture_vocab.txt";

Annotation On(const std::string &owner, const std::string &text,
              const std::string &mention, const std::string &entity) {
  const size_t pos = text.find(mention);
  REQUIRE(pos != std::string::npos);
  return {owner, pos, pos + mention.size(), mention, entity};
}

// One query per mention category plus an unannotated one.
Collection CategoryFixture() {
  std::vector<Query> queries = {
      {"SemSearch_ES-1", "give me france", QueryType::kSemSearch, false},
      {"SemSearch_ES-2", "who is yoko ono", QueryType::kSemSearch, false},
      {"INEX_LD-1", "the weser", QueryType::kInexLd, false},
      {"INEX_LD-2", "frisian films", QueryType::kInexLd, false},
      {"QALD2_te-1", "all countries in africa", QueryType::kQald2, false}};
  std::vector<Annotation> annotations = {
      On("SemSearch_ES-1", queries[0].text, "france", "France"),
      On("SemSearch_ES-2", queries[1].text, "yoko ono", "Yoko_Ono"),
      On("INEX_LD-1", queries[2].text, "weser", "Weser"),
      On("INEX_LD-2", queries[3].text, "frisian", "Frisian")};
  std::vector<Document> docs;
  std::vector<Qrel> qrels;
  for (int i = 0; i < 6; ++i) docs.push_back({"d" + std::to_string(i), "doc text"});
  for (size_t q = 0; q < queries.size(); ++q) {
    for (int i = 0; i < 6; ++i) {
      qrels.push_back({queries[q].query_id, "d" + std::to_string(i),
                       static_cast<int>((i + q) % 3)});
    }
  }
  return Collection(docs, queries, qrels, annotations);
}

Run ShuffledRun(const Collection &c, uint64_t seed, std::string tag) {
  std::mt19937_64 rng(seed);
  Run run;
  run.tag = std::move(tag);
  for (const Query &q : c.queries()) {
    std::vector<std::string> ids;
    for (const Document &d : c.documents()) ids.push_back(d.doc_id);
    std::shuffle(ids.begin(), ids.end(), rng);
    auto &entries = run.queries[q.query_id];
    for (size_t i = 0; i < ids.size(); ++i) {
      entries.push_back({ids[i], 10.0 - i, static_cast<int>(i) + 1});
    }
  }
  return run;
}

std::vector<std::string> DocIds(const std::vector<RunEntry> &entries) {
  std::vector<std::string> ids;
  for (const RunEntry &e : entries) ids.push_back(e.doc_id);
  return ids;
}

TEST_SUITE("eval") {

TEST_CASE("ndcg reference values") {
  const std::map<std::string, int> judged = {{"a", 2}, {"b", 1}, {"c", 0}};
  const std::vector<std::string> ideal = {"a", "b", "c"}, delivered = {"a", "c", "b"};
  CHECK(NdcgAtK(ideal, judged, 10) == doctest::Approx(1.0).epsilon(1e-12));
  const double expected = 2.5 / (2.0 + 1.0 / std::log2(3.0));
  CHECK(std::abs(NdcgAtK(delivered, judged, 10) - expected) < 1e-12);
  CHECK(NdcgAtK(delivered, judged, 10) == doctest::Approx(0.9502).epsilon(1e-4));
  const std::vector<std::string> bad = {"c", "a"};
  CHECK(NdcgAtK(bad, judged, 1) == 0.0);
  CHECK(NdcgAtK(ideal, {{"a", 0}}, 10) == 0.0);
  CHECK_THROWS_AS(NdcgAtK(ideal, judged, 0), Error);
}

TEST_CASE("ideal dcg counts judged documents that were not retrieved") {
  const std::map<std::string, int> judged = {{"a", 1}, {"z", 1}};
  const std::vector<std::string> ranking = {"a"};
  CHECK(NdcgAtK(ranking, judged, 10) == doctest::Approx(1.0 / (1.0 + 1.0 / std::log2(3.0))));
}

TEST_CASE("moving a better document up never lowers ndcg") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    std::map<std::string, int> judged;
    std::vector<std::string> ranking;
    for (int i = 0; i < 12; ++i) {
      ranking.push_back("d" + std::to_string(i));
      judged[ranking.back()] = static_cast<int>(rng() % 3);
    }
    std::shuffle(ranking.begin(), ranking.end(), rng);
    const size_t i = rng() % 12, j = rng() % 12;
    const size_t hi = std::min(i, j), lo = std::max(i, j);
    if (judged[ranking[lo]] <= judged[ranking[hi]]) continue;
    const int k = 1 + static_cast<int>(rng() % 12);
    const double before = NdcgAtK(ranking, judged, k);
    std::swap(ranking[hi], ranking[lo]);
    CHECK(NdcgAtK(ranking, judged, k) >= before - 1e-15);
  }
}

TEST_CASE("evaluation matches the oracle and averages per query") {
  const Collection c = CategoryFixture();
  const QrelMap qrels = MakeQrelMap(c.qrels());
  const Run run = ShuffledRun(c, 3, "r");
  const std::vector<int> cutoffs = {1, 5, 10};
  const EvalReport report = EvaluateRun(run, qrels, cutoffs);
  CHECK(report.warnings.empty());
  for (size_t ci = 0; ci < cutoffs.size(); ++ci) {
    double sum = 0.0;
    for (const auto &[qid, entries] : run.queries) {
      const double o = oracle::Ndcg(DocIds(entries), qrels.at(qid), cutoffs[ci]);
      CHECK(std::abs(report.per_query.at(qid)[ci] - o) < 1e-9);
      sum += NdcgAtK(entries, qrels.at(qid), cutoffs[ci]);
    }
    CHECK(std::abs(report.means[ci] - sum / run.queries.size()) < 1e-12);
  }
}

TEST_CASE("an oracle run is perfect") {
  const Collection c = CategoryFixture();
  const QrelMap qrels = MakeQrelMap(c.qrels());
  Run run;
  for (const auto &[qid, judged] : qrels) {
    std::vector<std::pair<int, std::string>> byg;
    for (const auto &[doc, g] : judged) byg.push_back({-g, doc});
    std::sort(byg.begin(), byg.end());
    for (size_t i = 0; i < byg.size(); ++i) {
      run.queries[qid].push_back({byg[i].second, 1.0 - 0.1 * i, static_cast<int>(i) + 1});
    }
  }
  const std::vector<int> cutoffs = {10};
  CHECK(EvaluateRun(run, qrels, cutoffs).means[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a query without ranked documents scores zero with a warning") {
  const Collection c = CategoryFixture();
  const QrelMap qrels = MakeQrelMap(c.qrels());
  Run run = ShuffledRun(c, 1, "r");
  run.queries.erase("INEX_LD-1");
  const std::vector<int> cutoffs = {10};
  const EvalReport report = EvaluateRun(run, qrels, cutoffs);
  CHECK(report.per_query.at("INEX_LD-1")[0] == 0.0);
  REQUIRE(report.warnings.size() == 1);
  CHECK(report.warnings[0].find("INEX_LD-1") != std::string::npos);
  CHECK(report.ToTsv().starts_with("query_id\tndcg@10\n"));
}

TEST_CASE("paired t-test") {
  const std::vector<double> a = {0.1, 0.5, 0.7};
  CHECK(PairedTTest(a, a).p == 1.0);
  CHECK(PairedTTest(a, a).t == 0.0);

  const std::vector<double> d = {1, 2, 3, 4, 5}, zero(5, 0.0);
  const TTestResult r = PairedTTest(d, zero);
  CHECK(r.df == 4);
  CHECK(r.t == doctest::Approx(3.0 / std::sqrt(2.5 / 5.0)).epsilon(1e-12));
  CHECK(r.t == doctest::Approx(4.2426).epsilon(1e-4));
  const boost::math::students_t dist(4.0);
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, r.t));
  CHECK(std::abs(r.p - p) < 1e-10);
  CHECK(r.p == doctest::Approx(0.0132).epsilon(2e-3));

  const std::vector<double> one = {1.0};
  CHECK_THROWS_AS(PairedTTest(one, one), Error);
  const std::vector<double> two = {1.0, 2.0};
  CHECK_THROWS_AS(PairedTTest(two, d), Error);
}

TEST_CASE("t-test agrees with the reference distribution and is antisymmetric") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.05, 0.2);
  for (int n : {2, 3, 7, 20, 60}) {
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = noise(rng);
      b[i] = noise(rng);
    }
    const TTestResult ab = PairedTTest(a, b), ba = PairedTTest(b, a);
    CHECK(ab.t == doctest::Approx(-ba.t).epsilon(1e-12));
    CHECK(ab.p == doctest::Approx(ba.p).epsilon(1e-12));
    const boost::math::students_t dist(n - 1.0);
    const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(ab.t)));
    CHECK(std::abs(ab.p - p) < 1e-9);
  }
  for (double x : {0.01, 0.3, 0.5, 0.9}) {
    CHECK(std::abs(IncompleteBeta(2.5, 0.5, x) - boost::math::ibeta(2.5, 0.5, x)) < 1e-12);
  }
}

TEST_CASE("category report buckets by the most severe mention") {
  const Vocabulary v = Vocabulary::Load(kVocab);
  const Collection c = CategoryFixture();
  const Run a = ShuffledRun(c, 1, "a"), b = ShuffledRun(c, 2, "b");
  const CategoryReport report = BuildCategoryReport(a, b, c, v);
  REQUIRE(report.rows.size() == 5);
  const QrelMap qrels = MakeQrelMap(c.qrels());
  for (const CategoryRow &row : report.rows) {
    CHECK(row.count == 1);
    double sa = 0.0, sb = 0.0;
    int n = 0;
    for (const Query &q : c.queries()) {
      if (QueryCategory(c, q.query_id, v) != row.category) continue;
      sa += oracle::Ndcg(DocIds(a.queries.at(q.query_id)), qrels.at(q.query_id), 10);
      sb += oracle::Ndcg(DocIds(b.queries.at(q.query_id)), qrels.at(q.query_id), 10);
      ++n;
    }
    CHECK(std::abs(row.mean_a - sa / n) < 1e-12);
    CHECK(std::abs(row.mean_b - sb / n) < 1e-12);
  }
  CHECK(QueryCategory(c, "INEX_LD-2", v) == MentionCategory::kMultiCont);
  CHECK(QueryCategory(c, "QALD2_te-1", v) == MentionCategory::kNoEntity);

  const Collection bare(c.documents(), c.queries(), c.qrels(), {});
  const CategoryReport none = BuildCategoryReport(a, b, bare, v);
  REQUIRE(none.rows.size() == 1);
  CHECK(none.rows[0].category == MentionCategory::kNoEntity);
  CHECK(none.rows[0].count == 5);
}

TEST_CASE("crosstab marginals") {
  const Vocabulary v = Vocabulary::Load(kVocab);
  const Collection c = CategoryFixture();
  const Crosstab x = BuildCrosstab(c, v);
  CHECK(x.total == 5);
  int rows = 0, cols = 0;
  for (MentionCategory cat : kAllCategories) {
    int sum = 0;
    for (QueryType t : kAllQueryTypes) sum += x.at(cat, t);
    CHECK(sum == (x.row_totals.count(cat) ? x.row_totals.at(cat) : 0));
    rows += sum;
  }
  for (QueryType t : kAllQueryTypes) {
    int sum = 0;
    for (MentionCategory cat : kAllCategories) sum += x.at(cat, t);
    CHECK(sum == (x.column_totals.count(t) ? x.column_totals.at(t) : 0));
    cols += sum;
  }
  CHECK(rows == 5);
  CHECK(cols == 5);

  const Collection single({{"d", "x"}}, {{"INEX_LD-9", "rivers", QueryType::kInexLd, false}},
                          {}, {});
  CHECK(BuildCrosstab(single, v).at(MentionCategory::kNoEntity, QueryType::kInexLd) == 1);
}

TEST_CASE("half-unannotated list queries give a half no-entity share") {
  const Vocabulary v = Vocabulary::Load(kVocab);
  std::vector<Query> queries;
  std::vector<Annotation> annotations;
  for (int i = 0; i < 20; ++i) {
    const std::string id = "INEX_LD-" + std::to_string(i);
    queries.push_back({id, "rivers of france", QueryType::kInexLd, false});
    if (i % 2 == 0) annotations.push_back(On(id, queries.back().text, "france", "France"));
  }
  const Crosstab x = BuildCrosstab(Collection({{"d", "x"}}, queries, {}, annotations), v);
  const double share = static_cast<double>(x.at(MentionCategory::kNoEntity, QueryType::kInexLd)) /
                       x.column_totals.at(QueryType::kInexLd);
  CHECK(share == doctest::Approx(0.5));
}

struct ProbeFixture {
  Vocabulary vocab;
  JointEmbeddingTable table;
  AlignmentMatrix w;
  EncoderWeights weights;

  ProbeFixture()
      : vocab(Vocabulary::Load(kVocab).WithEntities({"France", "Yoko_Ono"})),
        table(2, {}, {"France", "Yoko_Ono"}, {}, {1.0, 0.0, 0.0, 1.0}) {
    weights = EncoderWeights::Init({.d_model = 8, .n_layers = 1, .n_heads = 2, .d_ff = 16,
                                    .max_positions = 64, .vocab_size = vocab.native_size()});
    w.weights = Matrix(8, 2, 0.05);
  }

  ModelInput Input() const {
    const std::string q = "who is yoko ono", d = "yoko ono lives in france";
    const std::vector<Annotation> qa = {On("q", q, "yoko ono", "Yoko_Ono")};
    const std::vector<Annotation> da = {On("d", d, "france", "France")};
    return BuildInput(AnnotateTokens(q, qa, vocab), AnnotateTokens(d, da, vocab));
  }
};

TEST_CASE("final-layer export emits an entity and a mention row per entity") {
  const ProbeFixture f;
  const AlignedEntityVectors aligned(f.table, f.w);
  const std::vector<ProbeInput> inputs = {{"q", f.Input()}};
  const std::vector<EmbeddingRow> rows = ExportFinalEmbeddings(f.weights, &aligned, inputs);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].kind == "entity");
  CHECK(rows[0].entity_id == "Yoko_Ono");
  CHECK(rows[1].kind == "mention");
  CHECK(rows[1].surface == "ono");  // nearest word start before the entity
  CHECK(rows[3].surface == "france");
  for (const EmbeddingRow &r : rows) CHECK(r.vector.size() == 8);
  CHECK(ExportFinalEmbeddings(f.weights, &aligned, inputs, 1).size() == 2);
  CHECK(EmbeddingRowsToTsv(rows).starts_with("kind\tsurface\tquery_id\tentity_id\tvector\n"));
}

TEST_CASE("cluster probe averages cosines within and across groups") {
  std::vector<EmbeddingRow> rows = {{"entity", "", "q", "A", {1, 0}},
                                    {"entity", "", "q", "B", {1, 1}},
                                    {"entity", "", "q", "C", {0, 1}},
                                    {"mention", "", "q", "C", {1, 0}}};
  const ClusterProbe p = ProbeClusters(rows, {{"A", 0}, {"B", 0}, {"C", 1}});
  CHECK(p.intra_pairs == 1);
  CHECK(p.inter_pairs == 2);
  CHECK(p.intra == doctest::Approx(std::sqrt(0.5)));
  CHECK(p.inter == doctest::Approx(std::sqrt(0.5) / 2));
}

TEST_CASE("attention export") {
  ProbeFixture f;
  const AlignedEntityVectors aligned(f.table, f.w);
  const ModelInput input = f.Input();
  const std::vector<AttentionWeight> a = ExportAttention(f.weights, &aligned, input);
  CHECK(a.size() == input.size());
  double sum = 0.0;
  for (const AttentionWeight &x : a) sum += x.weight;
  CHECK(std::abs(sum - 1.0) < 1e-6);
  CHECK(a[0].surface == "[CLS]");

  for (const char *name : {"layer0.attention.query.weight", "layer0.attention.query.bias",
                           "layer0.attention.key.weight", "layer0.attention.key.bias"}) {
    for (double &p : f.weights.Tensor(name)) p = 0.0;
  }
  for (const AttentionWeight &x : ExportAttention(f.weights, &aligned, input)) {
    CHECK(std::abs(x.weight - 1.0 / input.size()) < 1e-6);
  }
  const std::string tsv = AttentionToTsv("q", "d", a);
  CHECK(std::count(tsv.begin(), tsv.end(), '\n') == static_cast<long>(input.size()) + 1);
}

}  // TEST_SUITE

}  // namespace
}  // namespace entrank
