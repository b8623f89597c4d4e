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

#include "doctest.h"
#include "entrank/embeddings.h"
#include "entrank/status.h"
#include "entrank/text.h"

namespace entrank {
namespace {

// x and y always appear together; z lives in sentences without x.
std::vector<std::string> CooccurrenceCorpus() {
  std::vector<std::string> corpus;
  for (int i = 0; i < 40; ++i) {
    corpus.push_back("x y p q");
    corpus.push_back("z r s t");
  }
  return corpus;
}

KnowledgeGraph CliqueGraph() {
  return KnowledgeGraph({"A", "B", "C", "D"},
                        {{"A", "B"}, {"B", "C"}, {"A", "C"}, {"B", "A"}, {"C", "B"},
                         {"C", "A"}},
                        {{"A", {"p", "q"}}, {"D", {"r"}}});
}

int CooccurrenceCount(const std::vector<std::string> &corpus, const std::string &a,
                      const std::string &b, int window) {
  int count = 0;
  for (const std::string &line : corpus) {
    const std::vector<std::string> w = Words(line);
    for (size_t i = 0; i < w.size(); ++i) {
      for (size_t j = 0; j < w.size(); ++j) {
        if (i != j && std::abs(static_cast<int>(i) - static_cast<int>(j)) <= window &&
            w[i] == a && w[j] == b) {
          ++count;
        }
      }
    }
  }
  return count;
}

TEST_SUITE("embeddings") {

TEST_CASE("co-occurring words end up closer") {
  const std::vector<std::string> corpus = CooccurrenceCorpus();
  REQUIRE(CooccurrenceCount(corpus, "x", "y", 2) > 0);
  REQUIRE(CooccurrenceCount(corpus, "x", "z", 2) == 0);
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    EmbeddingConfig c{.dim = 8, .epochs = 20, .seed = seed};
    const JointEmbeddingTable t = TrainJointEmbeddings(corpus, CliqueGraph(), c).table;
    CHECK(Similarity(t, "x", "y") > Similarity(t, "x", "z"));
  }
}

TEST_CASE("clique members end up closer than the isolated entity") {
  const std::vector<std::string> corpus = CooccurrenceCorpus();
  const std::vector<std::string> clique = {"ENTITY/A", "ENTITY/B", "ENTITY/C"};
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    EmbeddingConfig c{.dim = 8, .epochs = 40, .seed = seed};
    const JointEmbeddingTable t = TrainJointEmbeddings(corpus, CliqueGraph(), c).table;
    double within = 0.0, to_d = 0.0;
    for (size_t i = 0; i < clique.size(); ++i) {
      to_d += Similarity(t, clique[i], "ENTITY/D") / 3.0;
      for (size_t j = i + 1; j < clique.size(); ++j) {
        within += Similarity(t, clique[i], clique[j]) / 3.0;
      }
    }
    CHECK(within > to_d);
  }
}

TEST_CASE("zero epochs leave the seeded initialization") {
  const std::vector<std::string> corpus = CooccurrenceCorpus();
  EmbeddingConfig c{.dim = 8, .epochs = 0, .seed = 4};
  const EmbeddingResult a = TrainJointEmbeddings(corpus, CliqueGraph(), c);
  const EmbeddingResult b = TrainJointEmbeddings(corpus, CliqueGraph(), c);
  CHECK(a.table == b.table);
  CHECK(a.trace.word.empty());
  for (const std::string &key : a.table.Keys()) {
    for (double v : a.table.Vector(key)) {
      CHECK(std::abs(v) <= 0.5 / c.dim);
    }
  }
  c.seed = 5;
  CHECK_FALSE(TrainJointEmbeddings(corpus, CliqueGraph(), c).table == a.table);
}

TEST_CASE("cosine of hand-set vectors") {
  const JointEmbeddingTable t(2, {"a", "b", "c", "d"}, {"E"},
                              {1, 0, 0, 1, 1, 1, -1, 0}, {3, 4});
  CHECK(Similarity(t, "a", "a") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(Similarity(t, "a", "b") == 0.0);
  CHECK(Similarity(t, "ENTITY/E", "a") == doctest::Approx(0.6).epsilon(1e-12));
  try {
    Similarity(t, "a", "zz");
    FAIL("expected UnknownKey");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kUnknownKey);
  }
}

TEST_CASE("neighbors follow hand-computed cosines and break ties by key") {
  // cos(a, c) = 1/sqrt2, cos(a, b) = 0, cos(a, d) = -1.
  const JointEmbeddingTable t(2, {"a", "b", "c", "d"}, {},
                              {1, 0, 0, 1, 1, 1, -1, 0}, {});
  const auto n = Neighbors(t, "a", 10);
  REQUIRE(n.size() == 3);
  CHECK(n[0].first == "c");
  CHECK(n[0].second == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(n[1].first == "b");
  CHECK(n[2].first == "d");
  // x and y are both perpendicular to p.
  const JointEmbeddingTable tie(2, {"p", "y", "x"}, {}, {1, 0, 0, 1, 0, -1}, {});
  const auto m = Neighbors(tie, "p", 2);
  CHECK(m[0].first == "x");
  CHECK(m[1].first == "y");
}

TEST_CASE("training is deterministic and every objective improves") {
  const std::vector<std::string> corpus = CooccurrenceCorpus();
  EmbeddingConfig c{.dim = 8, .epochs = 10, .seed = 9};
  const EmbeddingResult a = TrainJointEmbeddings(corpus, CliqueGraph(), c);
  const EmbeddingResult b = TrainJointEmbeddings(corpus, CliqueGraph(), c);
  CHECK(a.table == b.table);
  CHECK(a.table.Serialize() == b.table.Serialize());
  for (const auto *trace : {&a.trace.word, &a.trace.entity, &a.trace.anchor}) {
    REQUIRE(trace->size() == 10);
    CHECK(trace->back() < trace->front());
  }
  for (const std::string &key : a.table.Keys()) {
    double norm = 0.0;
    for (double v : a.table.Vector(key)) norm += v * v;
    CHECK(std::isfinite(norm));
    CHECK(norm > 0.0);
  }
}

TEST_CASE("empty corpus is rejected") {
  try {
    TrainJointEmbeddings({}, KnowledgeGraph(), EmbeddingConfig{});
    FAIL("expected EmptyCorpus");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kEmptyCorpus);
  }
}

}  // TEST_SUITE

}  // namespace
}  // namespace entrank
