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


#include <cmath>
#include <random>

#include "doctest.h"
#include "entrank/retrieval.h"
#include "entrank/status.h"
#include "entrank/text.h"
#include "oracles.h"

namespace entrank {
namespace {

std::vector<Document> RandomDocs(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Document> docs;
  for (int i = 0; i < n; ++i) {
    std::string text;
    const int len = 3 + static_cast<int>(rng() % 20);
    for (int j = 0; j < len; ++j) {
      if (j) text += ' ';
      // A skewed vocabulary so document frequencies vary.
      const int w = static_cast<int>(std::sqrt(static_cast<double>(rng() % 900)));
      text += "t" + std::to_string(w);
    }
    char id[16];
    std::snprintf(id, sizeof(id), "doc%04d", static_cast<int>((i * 7919) % n));
    docs.push_back({id, text});
  }
  return docs;
}

std::vector<std::pair<std::string, std::vector<std::string>>> AsWords(
    const std::vector<Document> &docs) {
  std::vector<std::pair<std::string, std::vector<std::string>>> out;
  for (const Document &d : docs) out.emplace_back(d.doc_id, Words(d.text));
  return out;
}

TEST_SUITE("retrieval") {

TEST_CASE("postings and average length") {
  const std::vector<Document> one = {{"d", "a b a"}};
  const InvertedIndex idx = BuildIndex(one);
  CHECK(idx.avgdl() == 3.0);
  CHECK(*idx.Postings("a") == std::vector<Posting>{{0, 2}});
  CHECK(*idx.Postings("b") == std::vector<Posting>{{0, 1}});
  const std::vector<Document> two = {{"x", "a b"}, {"y", "a b c d"}};
  CHECK(BuildIndex(two).avgdl() == 3.0);
  CHECK(BuildIndex(two) == BuildIndex(two));
}

TEST_CASE("hand-evaluated score") {
  const std::vector<Document> docs = {{"d1", "x y"}, {"d2", "z w"}};
  const InvertedIndex idx = BuildIndex(docs);
  const std::vector<std::string> q = {"x"};
  CHECK(std::abs(Bm25Score(idx, q, "d1") - std::log(2.0)) < 1e-12);
  CHECK(Bm25Score(idx, q, "d2") == 0.0);
  const std::vector<std::string> twice = {"x", "x"};
  CHECK(std::abs(Bm25Score(idx, twice, "d1") - 2.0 * std::log(2.0)) < 1e-12);
  try {
    Bm25Score(idx, q, "d9");
    FAIL("expected UnknownDoc");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kUnknownDoc);
  }
}

TEST_CASE("search returns every document when k covers the corpus") {
  const std::vector<Document> docs = {{"b", "x"}, {"a", "x"}, {"c", "y"}};
  const InvertedIndex idx = BuildIndex(docs);
  const std::vector<ScoredDoc> r = Search(idx, QueryTerms("x"), 10);
  REQUIRE(r.size() == 3);
  CHECK(r[0].doc_id == "a");  // tie with b, broken by id
  CHECK(r[1].doc_id == "b");
  CHECK(r[2].doc_id == "c");
  CHECK(r[2].score == 0.0);
}

TEST_CASE("search matches exhaustive scoring") {
  const std::vector<Document> docs = RandomDocs(200, 17);
  const InvertedIndex idx = BuildIndex(docs);
  std::mt19937_64 rng(5);
  for (int q = 0; q < 50; ++q) {
    std::vector<std::string> terms;
    const int len = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < len; ++i) terms.push_back("t" + std::to_string(rng() % 32));
    const auto expected = oracle::ExhaustiveBm25(AsWords(docs), terms, 0.9, 0.4);
    const std::vector<ScoredDoc> got = Search(idx, terms, 1000);
    REQUIRE(got.size() == expected.size());
    for (size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].doc_id == expected[i].first);
      CHECK(std::abs(got[i].score - expected[i].second) < 1e-9);
    }
  }
}

TEST_CASE("adding a neutral document keeps single-term orders") {
  // The new document has the average length and none of the query terms, so
  // idf changes by a common factor and length normalization is unchanged.
  std::vector<Document> docs = {{"a", "x x y"}, {"b", "x y z"}, {"c", "y z z"}};
  const std::vector<std::string> q = {"x"};
  const std::vector<ScoredDoc> before = Search(BuildIndex(docs), q, 3);
  docs.push_back({"d", "w w w"});
  std::vector<ScoredDoc> after = Search(BuildIndex(docs), q, 4);
  std::erase_if(after, [](const ScoredDoc &s) { return s.doc_id == "d"; });
  for (size_t i = 0; i < before.size(); ++i) CHECK(before[i].doc_id == after[i].doc_id);
}

TEST_CASE("idf is never negative") {
  const std::vector<Document> docs = {{"a", "x"}, {"b", "x"}, {"c", "x y"}};
  const InvertedIndex idx = BuildIndex(docs);
  CHECK(Idf(idx, "x") > 0.0);
  CHECK(Idf(idx, "missing") > 0.0);
}

TEST_CASE("index round trip and argument checks") {
  const InvertedIndex idx = BuildIndex(RandomDocs(30, 2));
  CHECK(InvertedIndex::Parse(idx.Serialize(), "memory") == idx);
  try {
    Search(idx, QueryTerms("t1"), 0);
    FAIL("expected a configuration error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kConfig);
  }
  try {
    BuildIndex({});
    FAIL("expected EmptyCorpus");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kEmptyCorpus);
  }
}

TEST_CASE("query terms are normalized words") {
  CHECK(QueryTerms("The Weser, river!") ==
        std::vector<std::string>{"the", "weser", ",", "river", "!"});
}

}  // TEST_SUITE

}  // namespace
}  // namespace entrank
