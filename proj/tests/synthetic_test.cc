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


#include <filesystem>

#include "doctest.h"
#include "entrank/status.h"
#include "entrank/synthetic.h"
#include "entrank/text.h"

namespace entrank {
namespace {

TEST_SUITE("synthetic") {

TEST_CASE("default world shape") {
  const SyntheticWorld w = GenerateWorld(SyntheticConfig{});
  CHECK(w.collection.documents().size() == 200);
  CHECK(w.collection.queries().size() == 40);
  CHECK(w.split_queries.size() == 20);
  CHECK(w.collection.folds().size() == 5);
  CHECK(w.graph.entities().size() == 200);
  CHECK(w.notable.size() == 100);
  CHECK(!w.triples.empty());
  CHECK(Validate(w.collection, w.graph).empty());
  for (const Query &q : w.collection.queries()) {
    CHECK(q.query_type != QueryType::kOther);
    CHECK(!w.collection.AnnotationsFor(q.query_id).empty());
    const auto *judged = w.collection.Judgments(q.query_id);
    REQUIRE(judged != nullptr);
    int top = 0;
    for (const auto &[doc, g] : *judged) top += g == 2;
    CHECK(top == 1);
  }
}

TEST_CASE("split queries carry continuation pieces") {
  const SyntheticWorld w = GenerateWorld(SyntheticConfig{});
  for (const Query &q : w.collection.queries()) {
    const std::vector<Annotation> a = w.collection.AnnotationsFor(q.query_id);
    CHECK(IsSplitCategory(CategorizeAnnotations(a, w.vocab)) ==
          (w.split_queries.count(q.query_id) > 0));
  }
}

TEST_CASE("folds never test a query they train on") {
  const SyntheticWorld w = GenerateWorld(SyntheticConfig{});
  std::set<std::string> tested;
  for (const FoldSpec &f : w.collection.folds()) {
    for (const std::string &q : f.test_query_ids) {
      CHECK(f.train_query_ids.count(q) == 0);
      CHECK(tested.insert(q).second);
    }
  }
  CHECK(tested.size() == w.collection.queries().size());
}

TEST_CASE("stage-one triples avoid evaluation documents") {
  const SyntheticWorld w = GenerateWorld(SyntheticConfig{});
  std::set<std::string> judged;
  for (const Qrel &q : w.collection.qrels()) judged.insert(q.doc_id);
  for (const Triple &t : w.triples) {
    CHECK(judged.count(t.positive_doc) == 0);
    CHECK(judged.count(t.negative_doc) == 0);
  }
}

TEST_CASE("generation is deterministic and seed dependent") {
  SyntheticConfig c;
  const SyntheticWorld a = GenerateWorld(c), b = GenerateWorld(c);
  CHECK(SerializeDocuments(a.collection.documents()) ==
        SerializeDocuments(b.collection.documents()));
  CHECK(SerializeGraph(a.graph) == SerializeGraph(b.graph));
  CHECK(a.triples == b.triples);
  c.seed = 2;
  CHECK(SerializeDocuments(GenerateWorld(c).collection.documents()) !=
        SerializeDocuments(a.collection.documents()));
}

TEST_CASE("written worlds load back") {
  const SyntheticWorld w = GenerateWorld(SyntheticConfig{});
  const auto dir = std::filesystem::temp_directory_path() / "entrank_world_test";
  std::filesystem::create_directories(dir);
  WriteWorld(w, dir.string());
  const Collection c = LoadCollection(WorldCollectionPaths(dir.string()));
  CHECK(c.queries().size() == w.collection.queries().size());
  CHECK(c.annotations().size() == w.collection.annotations().size());
  CHECK(LoadGraph((dir / WorldFiles::kGraph).string()).links() == w.graph.links());
  CHECK(Vocabulary::Load((dir / WorldFiles::kVocab).string()).Serialize() ==
        w.vocab.Serialize());
}

TEST_CASE("inconsistent configurations are rejected") {
  SyntheticConfig c;
  c.eval_topics = 7;
  CHECK_THROWS_AS(GenerateWorld(c), Error);
  c = SyntheticConfig{};
  c.eval_topics = c.n_topics;
  CHECK_THROWS_AS(GenerateWorld(c), Error);
}

}  // TEST_SUITE

}  // namespace
}  // namespace entrank
